#include "doctest.h"

#include "fixtures.hpp"
#include "hqs/graph.hpp"
#include "hqs/slices.hpp"
#include "rng.hpp"

using namespace hqs;

namespace {

// Re-check the recognition rule for one quorum by direct enumeration.
bool closure_sound(const SliceViews& v, ProcessId observer, Quorum q) {
  bool observer_slice = false;
  for (ProcessSet s : v.view(observer, observer)) observer_slice |= s.subset_of(q);
  if (!observer_slice) return false;
  for (ProcessId m : q.members()) {
    if (!v.has_view(m, observer)) return false;
    bool has = false;
    for (ProcessSet s : v.view(m, observer)) has |= s.subset_of(q);
    if (!has) return false;
  }
  return true;
}

SliceViews random_honest_views(testrng::SplitMix64& rng, int n) {
  ProcessSet universe;
  for (int p = 1; p <= n; p++) universe.add(p);
  SliceViews v(universe);
  for (int p = 1; p <= n; p++) {
    int count = 1 + static_cast<int>(rng.below(2));
    std::vector<ProcessSet> slices;
    for (int i = 0; i < count; i++) {
      ProcessSet s;
      s.add(p);
      for (int o = 1; o <= n; o++)
        if (o != p && rng.chance(1, 3)) s.add(o);
      slices.push_back(s);
    }
    v.set_uniform(p, slices);
  }
  return v;
}

}  // namespace

TEST_CASE("observed quorums of the lying-slices example") {
  SliceViews v = fixtures::fbqs_slice_views();

  auto q1 = observed_quorums(v, 1);
  CHECK(q1 == std::vector<Quorum>{ProcessSet::of({1, 2, 4}), ProcessSet::of({1, 2, 5})});

  auto q2 = observed_quorums(v, 2);
  CHECK(q2 == std::vector<Quorum>{ProcessSet::of({2, 3, 4}), ProcessSet::of({2, 5})});

  CHECK(observed_quorums(v, 3) == std::vector<Quorum>{ProcessSet::of({2, 3, 4})});
  CHECK(observed_quorums(v, 5) == std::vector<Quorum>{ProcessSet::of({2, 5})});

  for (ProcessId obs : {1, 2, 3, 5})
    for (Quorum q : observed_quorums(v, obs)) {
      CHECK(q.contains(obs));
      CHECK(closure_sound(v, obs, q));
    }
}

TEST_CASE("singleton self slices give singleton quorums") {
  ProcessSet universe = ProcessSet::of({1, 2, 3});
  SliceViews v(universe);
  for (ProcessId p : universe.members()) v.set_uniform(p, {ProcessSet::of({p})});
  for (ProcessId p : universe.members())
    CHECK(observed_quorums(v, p) == std::vector<Quorum>{ProcessSet::of({p})});
}

TEST_CASE("derive_system matches the discussion example") {
  SliceViews v = fixtures::fbqs_slice_views();
  Partition part{ProcessSet::of({4}), v.universe()};
  QuorumSystem qs = derive_system(v, part);

  QuorumSystem expected = fixtures::fbqs_derived();
  for (ProcessId p : {1, 2, 3, 5}) {
    auto got = qs.quorums_of(p);
    auto want = expected.quorums_of(p);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
  }
  CHECK_FALSE(qs.declares(4));

  CHECK(strongly_available_set(qs, part) == ProcessSet::of({1, 2, 5}));
  PropertyReport sharing = has_quorum_sharing(qs, part);
  CHECK_FALSE(sharing.holds);
  CHECK(sharing.witness_quorums[0] == ProcessSet::of({1, 2, 4}));
}

TEST_CASE("honest views: all observers agree, and sharing holds") {
  testrng::SplitMix64 rng(0xFACE);
  for (int round = 0; round < 80; round++) {
    int n = 2 + static_cast<int>(rng.below(4));  // up to 5
    SliceViews v = random_honest_views(rng, n);
    Partition part{{}, v.universe()};
    QuorumSystem qs = derive_system(v, part);

    // View-independence: every observer derives the full quorum list the
    // same way, so recomputing per observer matches the aggregate.
    for (ProcessId p : v.universe().members())
      CHECK(qs.quorums_of(p) == observed_quorums(v, p));

    // Minimality within each observer's list.
    for (ProcessId p : v.universe().members()) {
      auto qlist = qs.quorums_of(p);
      for (Quorum a : qlist)
        for (Quorum b : qlist)
          CHECK_FALSE(a.strict_subset_of(b));
    }

    // Honest slices: derived system has quorum sharing over well-behaved
    // quorums.
    CHECK(has_quorum_sharing(qs, part).holds);
  }
}

TEST_CASE("byzantine presentation changes do not disturb unaffected observers") {
  SliceViews v = fixtures::fbqs_slice_views();
  auto before = observed_quorums(v, 5);

  // 5's closure only ever consults slices of 2 and 5; re-presenting 4's
  // slices to 5 differently must not change 5's quorums when 4 cannot
  // appear in any qualifying set.
  SliceViews v2 = v;
  v2.set_view(4, 5, {ProcessSet::of({1, 4}), ProcessSet::of({4, 5})});
  CHECK(observed_quorums(v2, 5) == before);

  // Observer without slices is rejected.
  SliceViews empty(ProcessSet::of({1, 2}));
  empty.set_uniform(1, {ProcessSet::of({1})});
  CHECK_THROWS_AS(observed_quorums(empty, 2), std::invalid_argument);
}
