#pragma once

#include "hqs/core.hpp"

// Federated Byzantine quorum slices, with per-observer views: a Byzantine
// declarer may present different slice sets to different observers. A set
// is recognized as a quorum by an observer only if it contains a slice of
// the observer and, for every member, some slice of that member as
// presented to the observer.

namespace hqs {

class SliceViews {
 public:
  SliceViews() = default;
  explicit SliceViews(ProcessSet universe) : universe_(universe) {}

  ProcessSet universe() const { return universe_; }

  // Slices of `declarer` as presented to `observer`. Well-behaved
  // declarers must present the same set to everyone; the loader enforces
  // that, this container does not.
  void set_view(ProcessId declarer, ProcessId observer, std::vector<ProcessSet> slices) {
    for (ProcessSet s : slices)
      if (s.empty() || !s.subset_of(universe_))
        throw std::invalid_argument("bad slice for declarer " + std::to_string(declarer));
    views_[{declarer, observer}] = std::move(slices);
  }

  // Uniform declaration visible to every observer.
  void set_uniform(ProcessId declarer, std::vector<ProcessSet> slices) {
    for (ProcessId obs : universe_.members()) set_view(declarer, obs, slices);
  }

  bool has_view(ProcessId declarer, ProcessId observer) const {
    return views_.count({declarer, observer}) != 0;
  }

  const std::vector<ProcessSet>& view(ProcessId declarer, ProcessId observer) const {
    auto it = views_.find({declarer, observer});
    if (it == views_.end())
      throw std::out_of_range("no slices of " + std::to_string(declarer) +
                              " presented to " + std::to_string(observer));
    return it->second;
  }

 private:
  ProcessSet universe_;
  std::map<std::pair<ProcessId, ProcessId>, std::vector<ProcessSet>> views_;
};

// All inclusion-minimal sets q such that q contains one of the observer's
// own slices and, for every member m of q, some slice of m as presented to
// the observer. Exhaustive subset enumeration; intended for universes of
// at most 16 processes.
inline std::vector<Quorum> observed_quorums(const SliceViews& v, ProcessId observer) {
  if (!v.universe().contains(observer))
    throw std::out_of_range("observer outside universe");
  if (!v.has_view(observer, observer))
    throw std::invalid_argument("observer " + std::to_string(observer) + " has no slices");
  if (v.universe().size() > 16)
    throw std::invalid_argument("slice universe too large for exhaustive closure");

  auto contains_slice_of = [&](ProcessId m, ProcessSet q) {
    if (!v.has_view(m, observer)) return false;  // member with no presented slices
    for (ProcessSet s : v.view(m, observer))
      if (s.subset_of(q)) return true;
    return false;
  };

  std::vector<ProcessId> ids = v.universe().members();
  int n = static_cast<int>(ids.size());
  std::vector<Quorum> qualifying;
  for (uint64_t mask = 1; mask < (uint64_t{1} << n); mask++) {
    ProcessSet q;
    for (int i = 0; i < n; i++)
      if (mask & (uint64_t{1} << i)) q.add(ids[i]);
    if (!q.contains(observer)) continue;
    if (!contains_slice_of(observer, q)) continue;
    bool ok = true;
    for (ProcessId m : q.members()) ok &= contains_slice_of(m, q);
    if (ok) qualifying.push_back(q);
  }

  std::vector<Quorum> minimal;
  for (Quorum q : qualifying) {
    bool keep = true;
    for (Quorum o : qualifying)
      if (o.strict_subset_of(q)) keep = false;
    if (keep) minimal.push_back(q);
  }
  std::sort(minimal.begin(), minimal.end());
  return minimal;
}

// Aggregate observed quorums of all well-behaved processes into a quorum
// system; Byzantine entries are omitted.
inline QuorumSystem derive_system(const SliceViews& v, const Partition& part) {
  std::map<ProcessId, std::vector<Quorum>> quorums;
  for (ProcessId p : part.well_behaved().members())
    quorums[p] = observed_quorums(v, p);
  return QuorumSystem(v.universe(), std::move(quorums));
}

}  // namespace hqs
