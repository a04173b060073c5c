#pragma once

#include <algorithm>
#include <optional>

#include "hqs/core.hpp"

// Quorum graph: vertices are the processes that declare quorums, and
// (p, p') is an edge when p' belongs to one of p's individual minimal
// quorums and itself declares quorums. Strongly connected components are
// computed by exhaustive reachability; at n <= 64 that is exact and cheap.

namespace hqs {

struct QuorumGraph {
  ProcessSet vertices;
  // adj[p] = targets of edges out of p; meaningful only for p in vertices.
  std::map<ProcessId, ProcessSet> adj;

  bool has_edge(ProcessId from, ProcessId to) const {
    auto it = adj.find(from);
    return it != adj.end() && it->second.contains(to);
  }
};

struct Condensation {
  std::vector<ProcessSet> components;
  // dag_edges[(i,j)] present when some edge goes from component i to j, i != j.
  std::vector<std::pair<int, int>> dag_edges;
  std::vector<int> sink_indices;  // components with no outgoing dag edge
};

inline QuorumGraph build_graph(const QuorumSystem& qs) {
  QuorumGraph g;
  for (ProcessId p : qs.declaring_processes()) g.vertices.add(p);
  for (ProcessId p : qs.declaring_processes()) {
    ProcessSet targets;
    for (Quorum q : qs.quorums_of(p)) targets = targets | q;
    g.adj[p] = targets & g.vertices;
  }
  return g;
}

// Quorums minimal among all declared quorums of all processes.
inline std::vector<Quorum> system_minimal_quorums(const QuorumSystem& qs) {
  std::vector<Quorum> all = qs.all_quorums();
  std::vector<Quorum> out;
  for (Quorum q : all) {
    bool minimal = true;
    for (Quorum o : all)
      if (o.strict_subset_of(q)) minimal = false;
    if (minimal) out.push_back(q);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

// reach[p] = vertices reachable from p by one or more edges, plus p itself.
inline std::map<ProcessId, ProcessSet> reachability(const QuorumGraph& g) {
  std::map<ProcessId, ProcessSet> reach;
  for (ProcessId p : g.vertices.members()) {
    ProcessSet r;
    r.add(p);
    bool grew = true;
    while (grew) {
      grew = false;
      for (ProcessId v : r.members()) {
        auto it = g.adj.find(v);
        if (it == g.adj.end()) continue;
        ProcessSet next = r | it->second;
        if (!(next == r)) {
          r = next;
          grew = true;
        }
      }
    }
    reach[p] = r;
  }
  return reach;
}

}  // namespace detail

inline Condensation condense(const QuorumGraph& g) {
  auto reach = detail::reachability(g);
  Condensation c;
  ProcessSet assigned;
  std::map<ProcessId, int> comp_of;
  for (ProcessId p : g.vertices.members()) {
    if (assigned.contains(p)) continue;
    ProcessSet comp;
    for (ProcessId q : reach[p].members())
      if (reach[q].contains(p)) comp.add(q);
    int idx = static_cast<int>(c.components.size());
    c.components.push_back(comp);
    for (ProcessId q : comp.members()) comp_of[q] = idx;
    assigned = assigned | comp;
  }
  for (ProcessId p : g.vertices.members()) {
    auto it = g.adj.find(p);
    if (it == g.adj.end()) continue;
    for (ProcessId t : it->second.members()) {
      int a = comp_of[p], b = comp_of[t];
      if (a == b) continue;
      bool seen = false;
      for (auto& e : c.dag_edges) seen |= e.first == a && e.second == b;
      if (!seen) c.dag_edges.emplace_back(a, b);
    }
  }
  for (int i = 0; i < static_cast<int>(c.components.size()); i++) {
    bool outgoing = false;
    for (auto& e : c.dag_edges) outgoing |= e.first == i;
    if (!outgoing) c.sink_indices.push_back(i);
  }
  return c;
}

struct SinkResult {
  ProcessSet sink;          // union of all sink components
  bool unique = true;       // false when the condensation has several sinks
  std::vector<ProcessSet> all_sinks;
};

inline SinkResult sink_component(const QuorumGraph& g) {
  Condensation c = condense(g);
  SinkResult r;
  for (int i : c.sink_indices) {
    r.all_sinks.push_back(c.components[i]);
    r.sink = r.sink | c.components[i];
  }
  r.unique = c.sink_indices.size() == 1;
  return r;
}

// Quorum sharing: every declared quorum of every well-behaved process is
// quorum subsuming.
inline PropertyReport has_quorum_sharing(const QuorumSystem& qs, const Partition& part) {
  for (ProcessId p : part.well_behaved().members()) {
    if (!qs.declares(p)) continue;
    for (Quorum q : qs.quorums_of(p)) {
      PropertyReport sub = is_quorum_subsuming(qs, q);
      if (!sub.holds)
        return PropertyReport{false, {q}, sub.witness_processes, "quorum not subsuming"};
    }
  }
  return PropertyReport{true, {}, {}, ""};
}

// A quorum is a minimal quorum iff it is an individual minimal quorum for
// all its well-behaved members. Checked in both directions; applicable
// only under quorum intersection + quorum sharing.
inline PropertyReport check_minimal_quorum_lemma(const QuorumSystem& qs, const Partition& part) {
  if (!has_quorum_intersection(qs, part).holds || !has_quorum_sharing(qs, part).holds)
    return PropertyReport{false, {}, {}, "not-applicable"};

  ProcessSet wb = part.well_behaved();
  auto listed = [&](ProcessId p, Quorum q) {
    if (!qs.declares(p)) return false;
    for (Quorum own : qs.quorums_of(p))
      if (own == q) return true;
    return false;
  };

  std::vector<Quorum> mq = system_minimal_quorums(qs);
  for (Quorum q : mq)
    for (ProcessId p : (q & wb).members())
      if (!listed(p, q))
        return PropertyReport{false, {q}, ProcessSet::of({p}), "minimal quorum not individual-minimal for member"};

  for (Quorum q : qs.all_quorums()) {
    bool listed_by_all = !(q & wb).empty();
    for (ProcessId p : (q & wb).members()) listed_by_all &= listed(p, q);
    if (!listed_by_all) continue;
    bool in_mq = false;
    for (Quorum m : mq) in_mq |= m == q;
    if (!in_mq)
      return PropertyReport{false, {q}, {}, "individual-minimal for all wb members but not system-minimal"};
  }
  return PropertyReport{true, {}, {}, ""};
}

inline std::string to_dot(const QuorumGraph& g) {
  std::string out = "digraph quorums {\n";
  for (ProcessId p : g.vertices.members())
    out += "  " + std::to_string(p) + ";\n";
  for (ProcessId p : g.vertices.members()) {
    auto it = g.adj.find(p);
    if (it == g.adj.end()) continue;
    for (ProcessId t : it->second.members())
      out += "  " + std::to_string(p) + " -> " + std::to_string(t) + ";\n";
  }
  return out + "}\n";
}

}  // namespace hqs
