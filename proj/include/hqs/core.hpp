#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Heterogeneous quorum systems: each process declares its own set of
// individual minimal quorums. Universe capped at 64 processes so process
// sets fit in one word and every property check is an exact enumeration.

namespace hqs {

using ProcessId = int;

constexpr int kMaxProcesses = 64;

// Set of process ids, one bit per id.
class ProcessSet {
 public:
  constexpr ProcessSet() = default;
  constexpr explicit ProcessSet(uint64_t bits) : bits_(bits) {}

  static ProcessSet of(std::initializer_list<ProcessId> ids) {
    ProcessSet s;
    for (ProcessId p : ids) s.add(p);
    return s;
  }

  void add(ProcessId p) {
    if (p < 0 || p >= kMaxProcesses)
      throw std::out_of_range("process id " + std::to_string(p) + " out of range");
    bits_ |= bit(p);
  }
  void remove(ProcessId p) { bits_ &= ~bit(p); }
  bool contains(ProcessId p) const {
    return p >= 0 && p < kMaxProcesses && (bits_ & bit(p)) != 0;
  }
  bool empty() const { return bits_ == 0; }
  int size() const { return __builtin_popcountll(bits_); }
  uint64_t bits() const { return bits_; }

  bool subset_of(ProcessSet o) const { return (bits_ & ~o.bits_) == 0; }
  bool strict_subset_of(ProcessSet o) const {
    return subset_of(o) && bits_ != o.bits_;
  }
  bool intersects(ProcessSet o) const { return (bits_ & o.bits_) != 0; }

  ProcessSet operator|(ProcessSet o) const { return ProcessSet(bits_ | o.bits_); }
  ProcessSet operator&(ProcessSet o) const { return ProcessSet(bits_ & o.bits_); }
  ProcessSet operator-(ProcessSet o) const { return ProcessSet(bits_ & ~o.bits_); }
  bool operator==(const ProcessSet&) const = default;
  bool operator<(const ProcessSet& o) const { return bits_ < o.bits_; }

  std::vector<ProcessId> members() const {
    std::vector<ProcessId> out;
    for (uint64_t b = bits_; b;) {
      int p = __builtin_ctzll(b);
      out.push_back(p);
      b &= b - 1;
    }
    return out;
  }

  std::string str() const {
    std::string s = "{";
    bool first = true;
    for (ProcessId p : members()) {
      if (!first) s += ",";
      s += std::to_string(p);
      first = false;
    }
    return s + "}";
  }

 private:
  static constexpr uint64_t bit(ProcessId p) { return uint64_t{1} << p; }
  uint64_t bits_ = 0;
};

// A quorum is a non-empty process set; kept as a thin alias so call sites
// read like the definitions.
using Quorum = ProcessSet;

// Mapping from process id to its declared individual minimal quorums.
// Quorums of Byzantine processes may be declared or omitted; property
// checks quantify only over well-behaved processes' quorums, but declared
// entries are kept for quorum-graph construction.
class QuorumSystem {
 public:
  QuorumSystem() = default;
  QuorumSystem(ProcessSet universe, std::map<ProcessId, std::vector<Quorum>> quorums)
      : universe_(universe), quorums_(std::move(quorums)) {
    validate();
  }

  ProcessSet universe() const { return universe_; }
  bool declares(ProcessId p) const { return quorums_.count(p) != 0; }

  const std::vector<Quorum>& quorums_of(ProcessId p) const {
    auto it = quorums_.find(p);
    if (it == quorums_.end())
      throw std::out_of_range("no quorums declared for process " + std::to_string(p));
    return it->second;
  }

  // Domain of the quorum mapping.
  std::vector<ProcessId> declaring_processes() const {
    std::vector<ProcessId> out;
    for (auto& [p, _] : quorums_) out.push_back(p);
    return out;
  }

  // All declared quorums of all processes, deduplicated.
  std::vector<Quorum> all_quorums() const {
    std::vector<Quorum> out;
    for (auto& [p, qs] : quorums_)
      for (Quorum q : qs) {
        bool seen = false;
        for (Quorum o : out) seen |= o == q;
        if (!seen) out.push_back(q);
      }
    return out;
  }

 private:
  void validate() const {
    for (auto& [p, qs] : quorums_) {
      if (!universe_.contains(p))
        throw std::invalid_argument("declaring process " + std::to_string(p) +
                                    " outside universe");
      if (qs.empty())
        throw std::invalid_argument("empty quorum set for process " + std::to_string(p));
      for (Quorum q : qs) {
        if (q.empty()) throw std::invalid_argument("empty quorum declared");
        if (!q.subset_of(universe_))
          throw std::invalid_argument("quorum " + q.str() + " outside universe");
      }
    }
  }

  ProcessSet universe_;
  std::map<ProcessId, std::vector<Quorum>> quorums_;
};

// Byzantine/well-behaved split of one execution.
struct Partition {
  ProcessSet byzantine;
  ProcessSet universe;

  ProcessSet well_behaved() const { return universe - byzantine; }
  bool is_byzantine(ProcessId p) const { return byzantine.contains(p); }
  bool is_well_behaved(ProcessId p) const {
    return universe.contains(p) && !byzantine.contains(p);
  }
};

inline Partition make_partition(const QuorumSystem& qs, ProcessSet byzantine) {
  if (!byzantine.subset_of(qs.universe()))
    throw std::invalid_argument("byzantine set outside universe");
  for (ProcessId p : (qs.universe() - byzantine).members())
    if (!qs.declares(p))
      throw std::invalid_argument("well-behaved process " + std::to_string(p) +
                                  " declares no quorums");
  return Partition{byzantine, qs.universe()};
}

// Outcome of a property check, with a re-checkable witness on failure
// (or, for some properties, on success).
struct PropertyReport {
  bool holds = false;
  std::vector<Quorum> witness_quorums;
  ProcessSet witness_processes;
  std::string note;
};

// Drop every quorum that strictly contains another quorum of the same
// process.
inline QuorumSystem minimize(const QuorumSystem& qs) {
  std::map<ProcessId, std::vector<Quorum>> out;
  for (ProcessId p : qs.declaring_processes()) {
    const auto& qlist = qs.quorums_of(p);
    std::vector<Quorum> kept;
    for (Quorum q : qlist) {
      bool minimal = true;
      for (Quorum o : qlist)
        if (o.strict_subset_of(q)) minimal = false;
      bool dup = false;
      for (Quorum k : kept) dup |= k == q;
      if (minimal && !dup) kept.push_back(q);
    }
    out[p] = kept;
  }
  return QuorumSystem(qs.universe(), std::move(out));
}

// f is a follower of p iff some quorum of f includes p.
inline ProcessSet followers(const QuorumSystem& qs, ProcessId p) {
  if (!qs.universe().contains(p))
    throw std::out_of_range("unknown process " + std::to_string(p));
  ProcessSet out;
  for (ProcessId f : qs.declaring_processes())
    for (Quorum q : qs.quorums_of(f))
      if (q.contains(p)) out.add(f);
  return out;
}

// P blocks p iff P intersects every quorum of p.
inline bool is_blocking(const QuorumSystem& qs, ProcessId p, ProcessSet set) {
  const auto& qlist = qs.quorums_of(p);  // throws if p declares nothing
  for (Quorum q : qlist)
    if (!q.intersects(set)) return false;
  return true;
}

// Every pair of well-behaved processes' quorums intersects at a
// well-behaved process.
inline PropertyReport has_quorum_intersection(const QuorumSystem& qs, const Partition& part) {
  ProcessSet wb = part.well_behaved();
  for (ProcessId p : wb.members()) {
    if (!qs.declares(p)) continue;
    for (ProcessId p2 : wb.members()) {
      if (!qs.declares(p2)) continue;
      for (Quorum q : qs.quorums_of(p))
        for (Quorum q2 : qs.quorums_of(p2))
          if ((q & q2 & wb).empty())
            return PropertyReport{false, {q, q2}, {}, "disjoint in well-behaved part"};
    }
  }
  return PropertyReport{true, {}, {}, ""};
}

// Maximal set of well-behaved processes owning a fully well-behaved quorum.
inline ProcessSet weakly_available_set(const QuorumSystem& qs, const Partition& part) {
  ProcessSet wb = part.well_behaved();
  ProcessSet out;
  for (ProcessId p : wb.members()) {
    if (!qs.declares(p)) continue;
    for (Quorum q : qs.quorums_of(p))
      if (q.subset_of(wb)) {
        out.add(p);
        break;
      }
  }
  return out;
}

// Every member of q has one of its own quorums inside q.
inline PropertyReport is_quorum_subsuming(const QuorumSystem& qs, Quorum q) {
  for (ProcessId p : q.members()) {
    if (!qs.declares(p)) {
      PropertyReport r{false, {q}, {}, "member declares no quorums"};
      r.witness_processes.add(p);
      return r;
    }
    bool found = false;
    for (Quorum own : qs.quorums_of(p))
      if (own.subset_of(q)) found = true;
    if (!found) {
      PropertyReport r{false, {q}, {}, "no quorum of member inside q"};
      r.witness_processes.add(p);
      return r;
    }
  }
  return PropertyReport{true, {q}, {}, ""};
}

inline bool is_complete_quorum(const QuorumSystem& qs, const Partition& part, Quorum q) {
  return q.subset_of(part.well_behaved()) && is_quorum_subsuming(qs, q).holds;
}

// Maximal set of well-behaved processes owning a complete quorum.
inline ProcessSet strongly_available_set(const QuorumSystem& qs, const Partition& part) {
  ProcessSet out;
  for (ProcessId p : part.well_behaved().members()) {
    if (!qs.declares(p)) continue;
    for (Quorum q : qs.quorums_of(p))
      if (is_complete_quorum(qs, part, q)) {
        out.add(p);
        break;
      }
  }
  return out;
}

}  // namespace hqs
