#pragma once

#include <memory>

#include "hqs/consensus.hpp"
#include "hqs/discovery.hpp"

// Discovery, election and consensus composed in one per-process state:
// the consensus leader schedule reads the election output, falling back
// to round-robin over the universe until a leader is known.

namespace hqs {

class StackMachine {
 public:
  StackMachine() = default;
  StackMachine(BrbContext ctx, ConsensusConfig cons_cfg, DiscoveryConfig disc_cfg,
               std::vector<Quorum> own_quorums)
      : disc_(std::make_shared<DiscoveryMachine>(ctx.self, std::move(own_quorums), disc_cfg)) {
    std::shared_ptr<DiscoveryMachine> disc = disc_;
    LeaderSchedule fallback = cons_cfg.schedule;
    cons_cfg.schedule = [disc, fallback](int round) {
      if (auto leader = disc->elected()) return *leader;
      return fallback(round);
    };
    cons_ = ConsensusMachine(ctx, cons_cfg);
  }

  void on_request(const Request& rq, Effects& fx) {
    if (rq.op == "discover") with_offset_timers(fx, [&](Effects& inner) {
      disc_->on_request(rq, inner);
    });
    else cons_.on_request(rq, fx);
  }

  void on_deliver(ProcessId from, const std::vector<Msg>& msgs, Effects& fx) {
    std::vector<Msg> voting, discovery;
    for (const Msg& m : msgs) {
      if (m.kind == "BCAST" || m.kind == "ECHO" || m.kind == "READY") voting.push_back(m);
      else discovery.push_back(m);
    }
    if (!discovery.empty()) with_offset_timers(fx, [&](Effects& inner) {
      disc_->on_deliver(from, discovery, inner);
    });
    if (!voting.empty()) cons_.on_deliver(from, voting, fx);
  }

  void on_timer(int id, Effects& fx) {
    if (id >= kDiscoveryTimerBase) {
      with_offset_timers(fx, [&](Effects& inner) {
        disc_->on_timer(id - kDiscoveryTimerBase, inner);
      });
    } else {
      cons_.on_timer(id, fx);
    }
  }

  const DiscoveryMachine& discovery() const { return *disc_; }
  const ConsensusMachine& consensus() const { return cons_; }

  std::string summary() const { return disc_->summary() + " | " + cons_.summary(); }

 private:
  static constexpr int kDiscoveryTimerBase = 1 << 20;

  // Discovery timer ids ride above the consensus id space.
  template <class F>
  static void with_offset_timers(Effects& fx, F&& call) {
    Effects inner;
    call(inner);
    for (auto& [to, m] : inner.sends) fx.send(to, std::move(m));
    for (auto& [delay, tid] : inner.timers) fx.set_timer(delay, tid + kDiscoveryTimerBase);
    for (auto& r : inner.responses) fx.respond(std::move(r));
  }

  std::shared_ptr<DiscoveryMachine> disc_;
  ConsensusMachine cons_;
};

}  // namespace hqs
