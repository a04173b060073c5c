#include "doctest.h"

#include "fixtures.hpp"
#include "hqs/graph.hpp"
#include "rng.hpp"

using namespace hqs;

namespace {

// Independent oracle: Floyd-Warshall style reachability on an explicit
// adjacency matrix, then sinks by scanning component out-edges.
std::vector<ProcessSet> scc_oracle(const QuorumGraph& g) {
  std::vector<ProcessId> ids = g.vertices.members();
  int n = static_cast<int>(ids.size());
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; i++) {
    reach[i][i] = true;
    for (int j = 0; j < n; j++)
      if (g.has_edge(ids[i], ids[j])) reach[i][j] = true;
  }
  for (int k = 0; k < n; k++)
    for (int i = 0; i < n; i++)
      for (int j = 0; j < n; j++)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;

  std::vector<ProcessSet> comps;
  std::vector<bool> done(n, false);
  for (int i = 0; i < n; i++) {
    if (done[i]) continue;
    ProcessSet comp;
    for (int j = 0; j < n; j++)
      if (reach[i][j] && reach[j][i]) {
        comp.add(ids[j]);
        done[j] = true;
      }
    comps.push_back(comp);
  }
  return comps;
}

ProcessSet sink_oracle(const QuorumGraph& g) {
  ProcessSet out;
  for (ProcessSet comp : scc_oracle(g)) {
    bool sink = true;
    for (ProcessId p : comp.members()) {
      auto it = g.adj.find(p);
      if (it == g.adj.end()) continue;
      if (!(it->second - comp).empty()) sink = false;
    }
    if (sink) out = out | comp;
  }
  return out;
}

// Independent oracle for system minimal quorums: pairwise strict-subset scan.
std::vector<Quorum> minimal_quorums_oracle(const QuorumSystem& qs) {
  std::vector<Quorum> all = qs.all_quorums();
  std::vector<Quorum> out;
  for (Quorum q : all) {
    bool keep = true;
    for (Quorum o : all)
      if (o != q && o.subset_of(q)) keep = false;
    if (keep) out.push_back(q);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("build_graph edge sets") {
  QuorumSystem fbqs = fixtures::fbqs_derived();
  QuorumGraph g = build_graph(fbqs);
  CHECK(g.vertices == ProcessSet::of({1, 2, 3, 5}));
  CHECK(g.has_edge(1, 2));
  CHECK(g.has_edge(1, 5));
  CHECK(g.has_edge(2, 5));
  CHECK(g.has_edge(5, 2));
  CHECK(g.has_edge(2, 3));
  CHECK(g.has_edge(3, 2));
  CHECK_FALSE(g.has_edge(5, 1));
  // 4 declares nothing: not a vertex, edges toward it are dropped.
  CHECK_FALSE(g.vertices.contains(4));
  CHECK_FALSE(g.has_edge(2, 4));

  QuorumSystem self(ProcessSet::of({1}), {{1, {ProcessSet::of({1})}}});
  QuorumGraph sg = build_graph(self);
  CHECK(sg.vertices == ProcessSet::of({1}));
  CHECK(sg.has_edge(1, 1));

  QuorumSystem tri = fixtures::triangle();
  QuorumGraph tg = build_graph(tri);
  CHECK(tg.has_edge(1, 3));
  CHECK(tg.has_edge(3, 2));
  CHECK(tg.has_edge(2, 1));
  CHECK(tg.has_edge(1, 1));
  CHECK(tg.has_edge(2, 2));
  CHECK(tg.has_edge(3, 3));
}

TEST_CASE("system minimal quorums") {
  QuorumSystem run = fixtures::running_example();
  auto mq = system_minimal_quorums(run);
  auto expected = std::vector<Quorum>{ProcessSet::of({1, 4}), ProcessSet::of({3, 4}),
                                      ProcessSet::of({1, 3})};
  std::sort(expected.begin(), expected.end());
  CHECK(mq == expected);
  CHECK(mq == minimal_quorums_oracle(run));

  QuorumSystem fbqs = fixtures::fbqs_derived();
  auto fm = system_minimal_quorums(fbqs);
  bool has_25 = false;
  for (Quorum q : fm) has_25 |= q == ProcessSet::of({2, 5});
  CHECK(has_25);
  CHECK(fm == minimal_quorums_oracle(fbqs));

  QuorumSystem self(ProcessSet::of({1}), {{1, {ProcessSet::of({1})}}});
  CHECK(system_minimal_quorums(self) == std::vector<Quorum>{ProcessSet::of({1})});
}

TEST_CASE("sink component") {
  QuorumSystem fbqs = fixtures::fbqs_derived();
  QuorumGraph g = build_graph(fbqs);
  SinkResult r = sink_component(g);
  CHECK(r.unique);
  CHECK(r.sink == sink_oracle(g));
  // 2 and 5 are mutually reachable; 3 exchanges edges with 2, so it sits in
  // the same component; 1 has no incoming edges from the component.
  CHECK(r.sink == ProcessSet::of({2, 3, 5}));
  CHECK(ProcessSet::of({2, 5}).subset_of(r.sink));
  CHECK_FALSE(r.sink.contains(1));

  // Complete graph: one SCC containing everything.
  QuorumSystem complete(ProcessSet::of({1, 2, 3}),
                        {{1, {ProcessSet::of({1, 2, 3})}},
                         {2, {ProcessSet::of({1, 2, 3})}},
                         {3, {ProcessSet::of({1, 2, 3})}}});
  SinkResult cr = sink_component(build_graph(complete));
  CHECK(cr.unique);
  CHECK(cr.sink == ProcessSet::of({1, 2, 3}));

  // Two disconnected self-loops: two sinks, multiplicity flagged.
  QuorumSystem split(ProcessSet::of({1, 2}),
                     {{1, {ProcessSet::of({1})}}, {2, {ProcessSet::of({2})}}});
  SinkResult sr = sink_component(build_graph(split));
  CHECK_FALSE(sr.unique);
  CHECK(sr.all_sinks.size() == 2);
  CHECK(sr.sink == ProcessSet::of({1, 2}));
}

TEST_CASE("quorum sharing") {
  QuorumSystem fbqs = fixtures::fbqs_derived();
  PropertyReport r = has_quorum_sharing(fbqs, make_partition(fbqs, ProcessSet::of({4})));
  CHECK_FALSE(r.holds);
  REQUIRE(r.witness_quorums.size() == 1);
  CHECK(r.witness_quorums[0] == ProcessSet::of({1, 2, 4}));

  QuorumSystem run = fixtures::running_example();
  PropertyReport rr = has_quorum_sharing(run, fixtures::running_partition(run));
  CHECK_FALSE(rr.holds);
  CHECK(rr.witness_quorums[0] == ProcessSet::of({1, 2, 3}));  // first failing quorum

  // Everybody declares the full universe: sharing holds.
  QuorumSystem full(ProcessSet::of({1, 2, 3}),
                    {{1, {ProcessSet::of({1, 2, 3})}},
                     {2, {ProcessSet::of({1, 2, 3})}},
                     {3, {ProcessSet::of({1, 2, 3})}}});
  CHECK(has_quorum_sharing(full, make_partition(full, {})).holds);
}

TEST_CASE("minimal quorum lemma") {
  // Sharing-satisfying sub-instance of the slices example.
  QuorumSystem sub(ProcessSet::of({2, 5}),
                   {{2, {ProcessSet::of({2, 5})}}, {5, {ProcessSet::of({2, 5})}}});
  Partition part = make_partition(sub, {});
  CHECK(check_minimal_quorum_lemma(sub, part).holds);

  // Not applicable without sharing.
  QuorumSystem run = fixtures::running_example();
  PropertyReport na = check_minimal_quorum_lemma(run, fixtures::running_partition(run));
  CHECK_FALSE(na.holds);
  CHECK(na.note == "not-applicable");
}

TEST_CASE("graph lemmas on random sharing systems") {
  testrng::SplitMix64 rng(0x9A9A);
  int accepted = 0;
  for (int round = 0; round < 4000 && accepted < 120; round++) {
    int n = 2 + static_cast<int>(rng.below(5));  // up to 6
    QuorumSystem qs = testrng::random_system(rng, n);
    Partition part{testrng::random_byzantine(rng, n, 1), qs.universe()};
    if (!part.byzantine.empty()) {
      bool all_declared = true;
      for (ProcessId p : part.well_behaved().members()) all_declared &= qs.declares(p);
      if (!all_declared) continue;
    }
    if (!has_quorum_intersection(qs, part).holds) continue;
    // Sharing over every declared quorum, Byzantine declarers included;
    // the graph lemmas quantify over system-level minimal quorums. Each
    // declared quorum must also touch the well-behaved set, otherwise
    // all-Byzantine quorums can undercut minimality without any
    // well-behaved member noticing.
    bool sharing_all = true;
    for (ProcessId p : qs.declaring_processes())
      for (Quorum q : qs.quorums_of(p)) {
        sharing_all &= is_quorum_subsuming(qs, q).holds;
        sharing_all &= q.intersects(part.well_behaved());
      }
    if (!sharing_all) continue;
    accepted++;

    CHECK(check_minimal_quorum_lemma(qs, part).holds);

    QuorumGraph g = build_graph(qs);
    ProcessSet wb = part.well_behaved();
    auto mq = system_minimal_quorums(qs);

    // Well-behaved members of a minimal quorum form a clique.
    for (Quorum q : mq)
      for (ProcessId a : (q & wb).members())
        for (ProcessId b : (q & wb).members())
          CHECK(g.has_edge(a, b));

    // Every well-behaved declaring process is adjacent to all members of
    // some minimal quorum.
    for (ProcessId p : wb.members()) {
      if (!qs.declares(p)) continue;
      bool adjacent_to_some = false;
      for (Quorum q : mq) {
        bool all = true;
        for (ProcessId m : q.members()) all &= g.has_edge(p, m) || !g.vertices.contains(m);
        adjacent_to_some |= all && (q & g.vertices) == q;
      }
      CHECK(adjacent_to_some);
    }

    // Unique sink containing the well-behaved members of minimal quorums.
    SinkResult sr = sink_component(g);
    CHECK(sr.unique);
    CHECK(sr.sink == sink_oracle(g));
    for (Quorum q : mq) CHECK((q & wb).subset_of(sr.sink));
  }
  CHECK(accepted >= 100);  // generator actually produced conforming systems
}
