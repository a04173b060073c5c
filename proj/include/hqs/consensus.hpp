#pragma once

#include <functional>
#include <optional>

#include "hqs/brb.hpp"

// Ballot-based consensus over per-ballot federated-voting instances.
// Leaders prepare a candidate ballot by broadcasting abort votes for every
// ballot below and incompatible with it, commit once their prepared ballot
// reaches the candidate, and everyone decides on a committed ballot that
// they prepared and that originates from the current leader. Timeouts
// double per round; a new leader waits Delta before acting so it first
// observes the highest prepared ballot in the system.

namespace hqs {

// Round-value pair; value 0 stands for the bottom value, which only
// appears in the round-0 ballot.
struct Ballot {
  int round = 0;
  int value = 0;

  bool operator==(const Ballot&) const = default;
  bool operator<(const Ballot& o) const {
    return round != o.round ? round < o.round : value < o.value;
  }
  bool compatible(const Ballot& o) const { return value == o.value; }
  // below and incompatible
  bool lt_incompat(const Ballot& o) const { return *this < o && !compatible(o); }

  std::string key() const { return std::to_string(round) + ":" + std::to_string(value); }
  std::string str() const {
    return "<" + std::to_string(round) + "," + (value == 0 ? "_" : std::to_string(value)) + ">";
  }

  static std::optional<Ballot> parse(const std::string& key) {
    auto colon = key.find(':');
    if (colon == std::string::npos) return std::nullopt;
    try {
      return Ballot{std::stoi(key.substr(0, colon)), std::stoi(key.substr(colon + 1))};
    } catch (...) {
      return std::nullopt;
    }
  }
};

// All ballots <r',v'> with <r',v'> below and incompatible with b, over the
// finite value domain, ascending.
inline std::vector<Ballot> below_incompatible(Ballot b, const std::vector<int>& domain) {
  std::vector<Ballot> out;
  for (int r = 0; r <= b.round; r++) {
    if (r == 0) {
      Ballot bottom{0, 0};
      if (bottom.lt_incompat(b)) out.push_back(bottom);
      continue;
    }
    for (int v : domain) {
      Ballot probe{r, v};
      if (probe.lt_incompat(b)) out.push_back(probe);
    }
  }
  return out;
}

using LeaderSchedule = std::function<ProcessId(int round)>;

inline LeaderSchedule round_robin(ProcessSet universe) {
  std::vector<ProcessId> ids = universe.members();
  return [ids](int round) {
    return ids[static_cast<size_t>((round - 1) % static_cast<int>(ids.size()))];
  };
}

struct ConsensusConfig {
  std::vector<int> value_domain;  // ascending, values >= 1
  Time timeout_base = 8;          // round r waits timeout_base * 2^r
  Time delta = 3;                 // leader-local delay, > post-GST bound
  LeaderSchedule schedule;
};

class ConsensusMachine {
 public:
  ConsensusMachine() = default;
  ConsensusMachine(BrbContext ctx, ConsensusConfig cfg) : ctx_(ctx), cfg_(std::move(cfg)) {
    history_.push_back(prepared_);
  }

  void on_request(const Request& rq, Effects& fx) {
    if (rq.op != "propose" || proposed_) return;
    int v = std::stoi(rq.val);
    proposed_ = true;
    round_ = 1;
    candidate_ = Ballot{1, v};
    fx.set_timer(timeout(round_), round_timer_id(round_));
    if (self_is_leader()) abort_below(candidate_, fx);
    after_event(fx);
  }

  void on_deliver(ProcessId from, const std::vector<Msg>& msgs, Effects& fx) {
    for (const Msg& m : msgs) {
      if (m.kind != "BCAST" && m.kind != "ECHO" && m.kind != "READY") continue;
      auto ballot = Ballot::parse(m.inst);
      if (!ballot) continue;
      fv::on_msg(ctx_, m.inst, fv_[m.inst], from, m, fx);
    }
    after_event(fx);
  }

  void on_timer(int id, Effects& fx) {
    if (decided_ || !proposed_) return;
    if (id == round_timer_id(round_)) {
      // Complain; with round-robin rotation the new leader is known locally.
      round_ += 1;
      if (self_is_leader() && cfg_.delta > 0) {
        fx.set_timer(cfg_.delta, delta_timer_id(round_));
      } else {
        enter_round(fx);
      }
    } else if (id == delta_timer_id(round_)) {
      enter_round(fx);
    }
    after_event(fx);
  }

  // State inspection for scenario expectations and tests.
  Ballot prepared() const { return prepared_; }
  Ballot candidate() const { return candidate_; }
  int round() const { return round_; }
  ProcessId current_leader() const { return cfg_.schedule(std::max(round_, 1)); }
  std::optional<int> decided_value() const { return decided_; }
  std::optional<Ballot> decided_ballot() const { return decided_ballot_; }
  const std::vector<Ballot>& prepared_history() const { return history_; }
  const FvInstance* instance(const std::string& key) const {
    auto it = fv_.find(key);
    return it == fv_.end() ? nullptr : &it->second;
  }

  std::string summary() const {
    std::string out = "round=" + std::to_string(round_) + " candidate=" + candidate_.key() +
                      " prepared=" + prepared_.key() + " decided=";
    out += decided_ ? std::to_string(*decided_) + "@" + decided_ballot_->key() : "-";
    for (auto& [key, st] : fv_)
      if (st.delivered) out += " " + key + ":" + st.delivered_val;
    return out;
  }

 private:
  static int round_timer_id(int r) { return 2 * r; }
  static int delta_timer_id(int r) { return 2 * r + 1; }
  Time timeout(int r) const { return cfg_.timeout_base << r; }
  bool self_is_leader() const { return current_leader() == ctx_.self; }

  void abort_below(Ballot b, Effects& fx) {
    // One event issues the whole abort batch, so receivers process the
    // votes together; splitting them would let prepared land on ballots no
    // leader ever carried.
    for (Ballot lower : below_incompatible(b, cfg_.value_domain))
      fv::request_broadcast(ctx_, lower.key(), fv_[lower.key()], "A", true, fx);
  }

  void enter_round(Effects& fx) {
    fx.set_timer(timeout(round_), round_timer_id(round_));
    candidate_ = Ballot{round_, prepared_ == Ballot{0, 0} ? candidate_.value : prepared_.value};
    if (self_is_leader()) abort_below(candidate_, fx);
  }

  bool delivered_abort(Ballot b) const {
    auto it = fv_.find(b.key());
    return it != fv_.end() && it->second.delivered && it->second.delivered_val == "A";
  }

  void recompute_prepared() {
    int max_round = 0;
    for (auto& [key, inst] : fv_)
      if (inst.delivered && inst.delivered_val == "A")
        if (auto b = Ballot::parse(key)) max_round = std::max(max_round, b->round);

    Ballot best = prepared_;
    for (int r = 0; r <= max_round + 1; r++) {
      for (int v : cfg_.value_domain) {
        Ballot probe{r, v};
        if (!(best < probe)) continue;
        bool all = true;
        for (Ballot lower : below_incompatible(probe, cfg_.value_domain))
          all &= delivered_abort(lower);
        if (all) best = probe;
      }
    }
    if (!(prepared_ == best)) {
      prepared_ = best;
      history_.push_back(best);
    }
  }

  void after_event(Effects& fx) {
    recompute_prepared();

    // Leader with a fully prepared candidate commits it.
    if (!decided_ && self_is_leader() && proposed_ && prepared_ == candidate_ &&
        candidate_.value != 0)
      fv::request_broadcast(ctx_, candidate_.key(), fv_[candidate_.key()], "C", true, fx);

    // Decide on a committed ballot equal to prepared whose commit vote
    // originates from the current leader. Commits from stale leaders stay
    // in the voting state but do not decide.
    if (!decided_ && prepared_.value != 0) {
      auto it = fv_.find(prepared_.key());
      if (it != fv_.end() && it->second.delivered && it->second.delivered_val == "C" &&
          it->second.origins["C"].contains(current_leader())) {
        decided_ = prepared_.value;
        decided_ballot_ = prepared_;
        fx.respond(Response{"decide", prepared_.key(), std::to_string(prepared_.value)});
      }
    }

    // Committing may complete a quorum locally in the same event chain;
    // the next delivery re-runs these checks.
  }

  BrbContext ctx_;
  ConsensusConfig cfg_;
  bool proposed_ = false;
  int round_ = 0;
  Ballot candidate_{0, 0};
  Ballot prepared_{0, 0};
  std::optional<int> decided_;
  std::optional<Ballot> decided_ballot_;
  std::vector<Ballot> history_;
  std::map<std::string, FvInstance> fv_;
};

}  // namespace hqs
