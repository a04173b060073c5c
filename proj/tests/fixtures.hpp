#pragma once

#include "hqs/core.hpp"
#include "hqs/slices.hpp"

// Shared example systems used across the test suites.

namespace hqs::fixtures {

// Five processes, process 2 Byzantine. Q(1)={{1,2,3},{1,4}},
// Q(3)={{3,4},{1,3}}, Q(4)={{3,4}}, Q(5)={{1,2,3,5}}.
inline QuorumSystem running_example() {
  return QuorumSystem(
      ProcessSet::of({1, 2, 3, 4, 5}),
      {{1, {ProcessSet::of({1, 2, 3}), ProcessSet::of({1, 4})}},
       {3, {ProcessSet::of({3, 4}), ProcessSet::of({1, 3})}},
       {4, {ProcessSet::of({3, 4})}},
       {5, {ProcessSet::of({1, 2, 3, 5})}}});
}

inline Partition running_partition(const QuorumSystem& qs) {
  return make_partition(qs, ProcessSet::of({2}));
}

// Ring of three: Q(a)={{a,c}}, Q(b)={{a,b}}, Q(c)={{b,c}} with a=1, b=2, c=3.
inline QuorumSystem triangle() {
  return QuorumSystem(ProcessSet::of({1, 2, 3}),
                      {{1, {ProcessSet::of({1, 3})}},
                       {2, {ProcessSet::of({1, 2})}},
                       {3, {ProcessSet::of({2, 3})}}});
}

// Q(1)={{1,3,4}}, Q(3)={{1,2,3}}, Q(4)={{2,3,4}}, process 2 Byzantine.
inline QuorumSystem bracha_example() {
  return QuorumSystem(ProcessSet::of({1, 2, 3, 4}),
                      {{1, {ProcessSet::of({1, 3, 4})}},
                       {3, {ProcessSet::of({1, 2, 3})}},
                       {4, {ProcessSet::of({2, 3, 4})}}});
}

// Quorum system derived from the lying-slices example: Q(1)={{1,2,4},{1,2,5}},
// Q(2)={{2,3,4},{2,5}}, Q(3)={{2,3,4}}, Q(5)={{2,5}}, process 4 Byzantine.
inline QuorumSystem fbqs_derived() {
  return QuorumSystem(
      ProcessSet::of({1, 2, 3, 4, 5}),
      {{1, {ProcessSet::of({1, 2, 4}), ProcessSet::of({1, 2, 5})}},
       {2, {ProcessSet::of({2, 3, 4}), ProcessSet::of({2, 5})}},
       {3, {ProcessSet::of({2, 3, 4})}},
       {5, {ProcessSet::of({2, 5})}}});
}

// Slice views behind fbqs_derived(): honest slices for 1,2,3,5 and the
// equivocating presentations of Byzantine 4.
inline SliceViews fbqs_slice_views() {
  SliceViews v(ProcessSet::of({1, 2, 3, 4, 5}));
  v.set_uniform(1, {ProcessSet::of({1, 2})});
  v.set_uniform(2, {ProcessSet::of({2, 3}), ProcessSet::of({2, 4}), ProcessSet::of({2, 5})});
  v.set_uniform(3, {ProcessSet::of({3, 4})});
  v.set_uniform(5, {ProcessSet::of({2, 5})});
  v.set_view(4, 1, {ProcessSet::of({1, 4})});
  v.set_view(4, 2, {ProcessSet::of({3, 4})});
  v.set_view(4, 3, {ProcessSet::of({2, 4})});
  v.set_view(4, 5, {ProcessSet::of({4, 5})});
  v.set_view(4, 4, {ProcessSet::of({4})});
  return v;
}

// Leader-switch consensus system: Q(1)={{1,2,3}}, Q(3)={{3,4},{1,3}},
// Q(4)={{3,4}}, process 2 Byzantine.
inline QuorumSystem consensus_example() {
  return QuorumSystem(ProcessSet::of({1, 2, 3, 4}),
                      {{1, {ProcessSet::of({1, 2, 3})}},
                       {3, {ProcessSet::of({3, 4}), ProcessSet::of({1, 3})}},
                       {4, {ProcessSet::of({3, 4})}}});
}

// Four processes where every 3-subset containing the owner is a quorum;
// used by the last-minute-attack and lock scenarios.
inline QuorumSystem uniform_3of4() {
  auto quorums_containing = [](ProcessId p) {
    std::vector<Quorum> out;
    std::vector<ProcessSet> all = {ProcessSet::of({1, 2, 3}), ProcessSet::of({1, 2, 4}),
                                   ProcessSet::of({1, 3, 4}), ProcessSet::of({2, 3, 4})};
    for (ProcessSet s : all)
      if (s.contains(p)) out.push_back(s);
    return out;
  };
  std::map<ProcessId, std::vector<Quorum>> q;
  for (ProcessId p : {1, 2, 3, 4}) q[p] = quorums_containing(p);
  return QuorumSystem(ProcessSet::of({1, 2, 3, 4}), std::move(q));
}

}  // namespace hqs::fixtures
