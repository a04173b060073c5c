#pragma once

#include <optional>

#include "hqs/core.hpp"
#include "hqs/msg.hpp"
#include "hqs/sim.hpp"

// Sink discovery and eventual leader election. Discovery phase 1 finds
// the members of well-behaved minimal quorums (a quorum every one of its
// members lists is a minimal quorum); phase 2 extends membership across
// the sink component via Extend messages that must arrive from a full
// intersection with one of the receiver's own quorums and carry a
// verifiable proof bundle. Election propagates proven sink members,
// elects the smallest one once the sink set is stable, and pushes the
// choice to followers, who accept it from a validated quorum of senders.

namespace hqs {

// Proof that q is a minimal quorum: one Exchange record per member, each
// listing q. Origins are simulator-authenticated; contents are not.
inline bool validq(const std::vector<QuorumRecord>& bundle, Quorum q) {
  for (ProcessId m : q.members()) {
    bool ok = false;
    for (const QuorumRecord& rec : bundle) {
      if (rec.origin != m) continue;
      for (Quorum listed : rec.quorums) ok |= listed == q;
    }
    if (!ok) return false;
  }
  return true;
}

struct DiscoveryConfig {
  Time stability_window = 16;  // quiet period before a sink member elects
  bool elect = true;           // run the election layer on top of discovery
};

class DiscoveryMachine {
 public:
  DiscoveryMachine() = default;
  DiscoveryMachine(ProcessId self, std::vector<Quorum> own_quorums, DiscoveryConfig cfg)
      : self_(self), own_(std::move(own_quorums)), cfg_(cfg) {
    for (Quorum q : own_) reach_ = reach_ | q;
  }

  void on_request(const Request& rq, Effects& fx) {
    if (rq.op != "discover") return;
    Msg m;
    m.kind = "EXCHANGE";
    m.quorums = own_;
    fx.send_all(reach_, m);
  }

  void on_deliver(ProcessId from, const std::vector<Msg>& msgs, Effects& fx) {
    for (const Msg& m : msgs) {
      if (m.kind == "EXCHANGE") on_exchange(from, m, fx);
      else if (m.kind == "EXTEND") on_extend(from, m, fx);
      else if (m.kind == "PROPAGATE") on_propagate(from, m, fx);
      else if (m.kind == "PROPAGATEF") on_propagatef(from, m, fx);
    }
  }

  // Stability fire: the sink set sat still for a full window, so a sink
  // member elects the smallest verified member and pushes the choice to
  // its followers. Later sink growth re-arms the timer and may re-elect;
  // choices converge once propagation settles.
  void on_timer(int id, Effects& fx) {
    if (id != stability_epoch_ || !cfg_.elect) return;
    if (in_sink_ && !sink_.empty() && (!elected_ || *elected_ != minimum_of_sink())) {
      elect(minimum_of_sink(), fx);
      Msg m;
      m.kind = "PROPAGATEF";
      m.about = *elected_;
      m.quorums = own_;
      fx.send_all(followers_, m);
    }
  }

  bool in_sink() const { return in_sink_; }
  int in_sink_phase() const { return phase_; }
  ProcessSet follower_set() const { return followers_; }
  ProcessSet sink_set() const { return sink_; }
  std::optional<ProcessId> elected() const { return elected_; }
  const std::vector<QuorumRecord>& proof() const { return proof_; }

  std::string summary() const {
    std::string out = "in_sink=" + std::string(in_sink_ ? "y" : "n") +
                      " phase=" + std::to_string(phase_) + " sink=" + sink_.str() +
                      " elected=" + (elected_ ? std::to_string(*elected_) : "-");
    return out;
  }

 private:
  void on_exchange(ProcessId from, const Msg& m, Effects& fx) {
    followers_.add(from);
    qmap_[from] = m.quorums;
    maybe_enter_sink_phase1(fx);
    flush_propagates(fx);
  }

  void maybe_enter_sink_phase1(Effects& fx) {
    if (in_sink_) return;
    for (Quorum q : own_) {
      bool listed_by_all = true;
      for (ProcessId p : q.members()) {
        auto it = qmap_.find(p);
        bool listed = false;
        if (it != qmap_.end())
          for (Quorum theirs : it->second) listed |= theirs == q;
        listed_by_all &= listed;
      }
      if (!listed_by_all) continue;
      in_sink_ = true;
      phase_ = 1;
      proof_.clear();
      for (ProcessId p : q.members()) proof_.push_back(QuorumRecord{p, qmap_[p]});
      proof_quorum_ = q;
      Msg ext;
      ext.kind = "EXTEND";
      ext.quorum = q;
      ext.records = proof_;
      fx.send_all(reach_, ext);
      on_entered_sink(fx);
      return;
    }
  }

  void on_extend(ProcessId from, const Msg& m, Effects& fx) {
    extend_senders_[m.quorum.bits()].add(from);
    extend_bundles_[m.quorum.bits()] = m.records;
    if (in_sink_) return;
    for (Quorum own : own_) {
      ProcessSet need = m.quorum & own;
      if (need.empty()) continue;
      if (!need.subset_of(extend_senders_[m.quorum.bits()])) continue;
      if (!validq(extend_bundles_[m.quorum.bits()], m.quorum)) continue;
      in_sink_ = true;
      phase_ = 2;
      proof_ = extend_bundles_[m.quorum.bits()];
      proof_quorum_ = m.quorum;
      on_entered_sink(fx);
      return;
    }
  }

  void on_entered_sink(Effects& fx) {
    if (!cfg_.elect) return;
    // Phase-1 membership is self-provable; phase-2 membership is not, so
    // only phase-1 processes insert themselves into the verified sink set.
    if (phase_ == 1) {
      sink_.add(self_);
      propagate(self_, proof_, proof_quorum_, fx);
    }
    restart_stability_timer(fx);
  }

  void on_propagate(ProcessId, const Msg& m, Effects& fx) {
    if (m.about < 0) return;
    if (!m.quorum.contains(m.about)) return;
    if (!validq(m.records, m.quorum)) return;  // invalid proofs dropped
    if (sink_.contains(m.about)) return;
    sink_.add(m.about);
    propagate(m.about, m.records, m.quorum, fx);  // epidemic re-forward
    if (in_sink_ && cfg_.elect) restart_stability_timer(fx);
    flush_propagates(fx);
  }

  // Deduplicated epidemic forwarding, re-sent to followers learned later.
  void propagate(ProcessId about, const std::vector<QuorumRecord>& records, Quorum q,
                 Effects& fx) {
    pending_propagate_[about] = std::make_pair(q, records);
    flush_propagates(fx);
  }

  void flush_propagates(Effects& fx) {
    if (!cfg_.elect) return;
    for (auto& [about, payload] : pending_propagate_) {
      for (ProcessId f : followers_.members()) {
        auto key = std::make_pair(about, f);
        if (propagated_.count(key)) continue;
        propagated_.insert(key);
        Msg m;
        m.kind = "PROPAGATE";
        m.about = about;
        m.quorum = payload.first;
        m.records = payload.second;
        fx.send(f, m);
      }
    }
  }

  void on_propagatef(ProcessId from, const Msg& m, Effects& fx) {
    if (m.about < 0 || elected_ == m.about) return;
    if (in_sink_ && !sink_.empty()) return;  // sink members elect by order
    pf_claims_[m.about][from] = m.quorums;
    // Accept once every member of some quorum listed by all its members
    // vouches for the same leader.
    const auto& claims = pf_claims_[m.about];
    ProcessSet senders;
    for (auto& [s, _] : claims) senders.add(s);
    for (auto& [s, listed] : claims) {
      for (Quorum q : listed) {
        if (!q.subset_of(senders)) continue;
        bool in_all = true;
        for (ProcessId member : q.members()) {
          auto it = claims.find(member);
          bool found = false;
          if (it != claims.end())
            for (Quorum theirs : it->second) found |= theirs == q;
          in_all &= found;
        }
        if (in_all) {
          elect(m.about, fx);
          return;
        }
      }
    }
  }

  void elect(ProcessId p, Effects& fx) {
    if (elected_ == p) return;
    elected_ = p;
    fx.respond(Response{"elect", "", std::to_string(p)});
  }

  ProcessId minimum_of_sink() const {
    // Pre-defined order: smallest process identity.
    return sink_.members().front();
  }

  void restart_stability_timer(Effects& fx) {
    stability_epoch_ += 1;
    fx.set_timer(cfg_.stability_window, stability_epoch_);
  }

  ProcessId self_ = -1;
  std::vector<Quorum> own_;
  ProcessSet reach_;  // union of own quorums
  DiscoveryConfig cfg_;

  std::map<ProcessId, std::vector<Quorum>> qmap_;
  ProcessSet followers_;
  bool in_sink_ = false;
  int phase_ = 0;
  std::vector<QuorumRecord> proof_;
  Quorum proof_quorum_;
  std::map<uint64_t, ProcessSet> extend_senders_;
  std::map<uint64_t, std::vector<QuorumRecord>> extend_bundles_;

  ProcessSet sink_;
  bool announced_ = false;
  int stability_epoch_ = 0;
  std::optional<ProcessId> elected_;
  std::map<ProcessId, std::pair<Quorum, std::vector<QuorumRecord>>> pending_propagate_;
  std::set<std::pair<ProcessId, ProcessId>> propagated_;
  std::map<ProcessId, std::map<ProcessId, std::vector<Quorum>>> pf_claims_;
};

}  // namespace hqs
