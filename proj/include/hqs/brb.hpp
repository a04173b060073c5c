#pragma once

#include <map>
#include <optional>

#include "hqs/core.hpp"
#include "hqs/msg.hpp"
#include "hqs/sim.hpp"

// Byzantine reliable broadcast over heterogeneous quorums, and its
// federated-voting variant (any process may originate; instances are
// multiplexed by an instance id). Echo and Ready travel to followers;
// BCast goes to the whole universe. A process gets ready on a quorum of
// echoes or on a blocking set of readies, and delivers on a quorum of
// readies, all scoped per value.

namespace hqs {

// Per-process static wiring: own minimal quorums, followers, universe.
struct BrbContext {
  ProcessId self = -1;
  ProcessSet universe;
  std::vector<Quorum> own_quorums;
  ProcessSet followers;  // precomputed follower set of self

  bool blocking(ProcessSet set) const {
    for (Quorum q : own_quorums)
      if (!q.intersects(set)) return false;
    return true;
  }
  bool quorum_inside(ProcessSet set) const {
    for (Quorum q : own_quorums)
      if (q.subset_of(set)) return true;
    return false;
  }
};

inline BrbContext make_brb_context(const QuorumSystem& qs, ProcessId self) {
  BrbContext ctx;
  ctx.self = self;
  ctx.universe = qs.universe();
  ctx.own_quorums = qs.quorums_of(self);
  ctx.followers = followers(qs, self);
  return ctx;
}

// One reliable-broadcast / voting instance.
struct FvInstance {
  bool echoed = false;
  bool readied = false;
  bool delivered = false;
  bool broadcast_sent = false;
  std::string echo_val;
  std::string ready_val;
  std::string delivered_val;
  std::map<std::string, ProcessSet> echoes;   // value -> echoers
  std::map<std::string, ProcessSet> readies;  // value -> ready senders
  // value -> processes whose BCast carried it; authenticated batch senders.
  std::map<std::string, ProcessSet> origins;

  ProcessSet echoers(const std::string& v) const {
    auto it = echoes.find(v);
    return it == echoes.end() ? ProcessSet{} : it->second;
  }
  ProcessSet ready_set(const std::string& v) const {
    auto it = readies.find(v);
    return it == readies.end() ? ProcessSet{} : it->second;
  }
};

struct FvDelivery {
  std::string inst;
  std::string val;
};

// Instance transition logic shared by the standalone BRB/FV protocol and
// the consensus machine (which nests one instance per ballot).
namespace fv {

inline void emit_to_followers(const BrbContext& ctx, const std::string& inst,
                              const char* kind, const std::string& val, Effects& fx) {
  Msg m = make_msg(kind, inst, val);
  fx.send_all(ctx.followers, m);
}

// broadcast(v): BCast to every process. In the voting variant the first
// broadcast a process emits also fixes its own echo, so a racing BCast
// from elsewhere cannot flip it.
inline void request_broadcast(const BrbContext& ctx, const std::string& inst,
                              FvInstance& st, const std::string& val, bool fix_own_echo,
                              Effects& fx) {
  if (st.broadcast_sent) return;  // double broadcast in one instance is forbidden
  st.broadcast_sent = true;
  fx.send_all(ctx.universe, make_msg("BCAST", inst, val));
  if (fix_own_echo && !st.echoed) {
    st.echoed = true;
    st.echo_val = val;
    emit_to_followers(ctx, inst, "ECHO", val, fx);
  }
}

// Handle one message of this instance; returns a delivery when the
// delivered flag flips.
inline std::optional<FvDelivery> on_msg(const BrbContext& ctx, const std::string& inst,
                                        FvInstance& st, ProcessId from, const Msg& m,
                                        Effects& fx) {
  if (m.kind == "BCAST") {
    st.origins[m.val].add(from);
    if (!st.echoed) {
      st.echoed = true;
      st.echo_val = m.val;
      emit_to_followers(ctx, inst, "ECHO", m.val, fx);
    }
  } else if (m.kind == "ECHO") {
    st.echoes[m.val].add(from);
    if (!st.readied && ctx.quorum_inside(st.echoes[m.val])) {
      st.readied = true;
      st.ready_val = m.val;
      emit_to_followers(ctx, inst, "READY", m.val, fx);
    }
  } else if (m.kind == "READY") {
    st.readies[m.val].add(from);
    if (!st.readied && ctx.blocking(st.readies[m.val])) {
      st.readied = true;
      st.ready_val = m.val;
      emit_to_followers(ctx, inst, "READY", m.val, fx);
    }
    if (!st.delivered && ctx.quorum_inside(st.readies[m.val])) {
      st.delivered = true;
      st.delivered_val = m.val;
      return FvDelivery{inst, m.val};
    }
  }
  return std::nullopt;
}

}  // namespace fv

// Standalone protocol machine for the simulator. In plain BRB mode a
// designated sender is enforced: BCast from anyone else is ignored.
class BrbMachine {
 public:
  BrbMachine() = default;
  BrbMachine(BrbContext ctx, bool federated, ProcessId designated_sender = -1)
      : ctx_(ctx), federated_(federated), sender_(designated_sender) {}

  void on_request(const Request& rq, Effects& fx) {
    if (rq.op != "broadcast") return;
    std::string inst = rq.inst.empty() ? "0" : rq.inst;
    if (!federated_ && ctx_.self != sender_) return;
    fv::request_broadcast(ctx_, inst, inst_[inst], rq.val, federated_, fx);
  }

  void on_deliver(ProcessId from, const std::vector<Msg>& msgs, Effects& fx) {
    for (const Msg& m : msgs) {
      if (m.kind != "BCAST" && m.kind != "ECHO" && m.kind != "READY") continue;
      if (!federated_ && m.kind == "BCAST" && from != sender_) continue;
      std::string inst = m.inst.empty() ? "0" : m.inst;
      auto delivered = fv::on_msg(ctx_, inst, inst_[inst], from, m, fx);
      if (delivered)
        fx.respond(Response{"deliver", delivered->inst, delivered->val});
    }
  }

  void on_timer(int, Effects&) {}

  const FvInstance& instance(const std::string& inst) const {
    static const FvInstance empty;
    auto it = inst_.find(inst);
    return it == inst_.end() ? empty : it->second;
  }
  const BrbContext& context() const { return ctx_; }

  std::string summary() const {
    std::string out;
    for (auto& [key, st] : inst_) {
      out += key + "{e:" + (st.echoed ? st.echo_val : "-") +
             ",r:" + (st.readied ? st.ready_val : "-") +
             ",d:" + (st.delivered ? st.delivered_val : "-") + "} ";
    }
    return out;
  }

 private:
  BrbContext ctx_;
  bool federated_ = false;
  ProcessId sender_ = -1;
  std::map<std::string, FvInstance> inst_;
};

}  // namespace hqs
