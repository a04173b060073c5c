#pragma once

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "hqs/core.hpp"
#include "hqs/msg.hpp"

// Deterministic discrete-event network with partial synchrony and a
// scripted adversary. Logical integer time; together-sent messages travel
// and get handled as one batch; ties break by (time, receiver, sender,
// sequence), so identical inputs replay to bit-identical traces.

namespace hqs {

using Time = long long;

struct NetConfig {
  Time gst = 0;
  Time post_gst_bound = 2;  // known delay bound after GST
  Time pre_gst_slack = 0;   // extra horizon the adversary may use pre-GST
  uint64_t seed = 0;
  Time max_steps = 100000;

  Time horizon() const { return gst + post_gst_bound + pre_gst_slack; }
};

struct Batch {
  ProcessId sender = -1;
  ProcessId receiver = -1;
  std::vector<Msg> msgs;
  Time sent_at = 0;
};

enum class EntryKind { Send, Deliver, Timer, Request, Response };

inline const char* kind_name(EntryKind k) {
  switch (k) {
    case EntryKind::Send: return "send";
    case EntryKind::Deliver: return "deliver";
    case EntryKind::Timer: return "timer";
    case EntryKind::Request: return "request";
    case EntryKind::Response: return "response";
  }
  return "?";
}

struct TraceEntry {
  Time t = 0;
  EntryKind kind = EntryKind::Send;
  ProcessId from = -1;
  ProcessId to = -1;
  std::vector<Msg> msgs;
  std::string note;  // request/response op and value, adversary annotations
};

struct Trace {
  std::vector<TraceEntry> entries;
  bool truncated = false;

  std::vector<TraceEntry> deliveries_to(ProcessId p, Time up_to) const {
    std::vector<TraceEntry> out;
    for (const TraceEntry& e : entries)
      if (e.kind == EntryKind::Deliver && e.to == p && e.t <= up_to) out.push_back(e);
    return out;
  }
};

// Local order of delivered batches at p, global timestamps stripped.
struct ViewEntry {
  ProcessId from;
  std::vector<Msg> msgs;
  bool operator==(const ViewEntry&) const = default;
};

inline std::vector<ViewEntry> view_of(const Trace& trace, ProcessId p, Time up_to) {
  std::vector<ViewEntry> out;
  for (const TraceEntry& e : trace.deliveries_to(p, up_to))
    out.push_back(ViewEntry{e.from, e.msgs});
  return out;
}

// ---- adversary script ----------------------------------------------------

// Matches batches by endpoints (-1 = wildcard) and send-time window.
struct DelayRule {
  ProcessId from = -1;
  ProcessId to = -1;
  Time sent_from = 0;
  Time sent_to = -1;  // inclusive; -1 = open
  Time until = 0;     // earliest delivery time

  bool matches(const Batch& b) const {
    if (from != -1 && b.sender != from) return false;
    if (to != -1 && b.receiver != to) return false;
    if (b.sent_at < sent_from) return false;
    if (sent_to != -1 && b.sent_at > sent_to) return false;
    return true;
  }
};

// Byzantine-sender message, scheduled by the script. `at` is the send
// time; the batch travels like any other (subject to delay rules).
struct Inject {
  ProcessId sender = -1;
  ProcessId to = -1;
  std::vector<Msg> msgs;
  Time at = 0;
};

struct Silence {
  ProcessId byz = -1;
  Time from = 0;
};

struct AdversaryScript {
  std::vector<DelayRule> delays;
  std::vector<Inject> injects;
  std::vector<Silence> silences;

  bool silenced(ProcessId p, Time t) const {
    for (const Silence& s : silences)
      if (s.byz == p && t >= s.from) return true;
    return false;
  }
};

// Script that re-sends `source`'s recorded outgoing batches, preserving
// order, contents and timing. `to` = -1 replays toward every receiver.
inline std::vector<Inject> replay_from(const Trace& trace, ProcessId source, ProcessId to = -1) {
  std::vector<Inject> out;
  bool found = false;
  for (const TraceEntry& e : trace.entries) {
    if (e.kind != EntryKind::Send || e.from != source) continue;
    found = true;
    if (to != -1 && e.to != to) continue;
    out.push_back(Inject{source, e.to, e.msgs, e.t});
  }
  if (!found) throw std::invalid_argument("trace has no sends from process " +
                                          std::to_string(source));
  return out;
}

// ---- protocol interface ----------------------------------------------------

// Handlers write their outputs here; the simulator groups sends issued in
// one event into per-receiver batches.
struct Effects {
  std::vector<std::pair<ProcessId, Msg>> sends;
  std::vector<std::pair<Time, int>> timers;  // (delay, timer id)
  std::vector<Response> responses;

  void send(ProcessId to, Msg m) { sends.emplace_back(to, std::move(m)); }
  void send_all(ProcessSet tos, const Msg& m) {
    for (ProcessId p : tos.members()) sends.emplace_back(p, m);
  }
  void set_timer(Time delay, int id) { timers.emplace_back(delay, id); }
  void respond(Response r) { responses.push_back(std::move(r)); }
};

template <class M>
concept ProtocolMachine = requires(M m, const Request& rq, ProcessId p,
                                   const std::vector<Msg>& ms, int id, Effects& fx) {
  m.on_request(rq, fx);
  m.on_deliver(p, ms, fx);
  m.on_timer(id, fx);
};

// ---- simulation ------------------------------------------------------------

template <ProtocolMachine M>
class Simulation {
 public:
  using Factory = std::function<M(ProcessId)>;

  Simulation(NetConfig cfg, const QuorumSystem& qs, const Partition& part, Factory factory)
      : cfg_(cfg), universe_(qs.universe()), part_(part) {
    for (ProcessId p : part.well_behaved().members())
      machines_.emplace(p, factory(p));
  }

  void load_script(AdversaryScript script) {
    validate_script(script);
    script_ = std::move(script);
    for (const Inject& inj : script_.injects) {
      if (!part_.is_byzantine(inj.sender))
        throw std::invalid_argument("inject requires a Byzantine sender");
      if (script_.silenced(inj.sender, inj.at)) continue;
      enqueue_send(inj.sender, inj.to, inj.msgs, inj.at, "inject");
    }
  }

  // Scenario-level request handed to one process at a given time.
  void request_at(ProcessId p, Request rq, Time t) {
    EventBody body;
    body.which = 0;
    body.request = std::move(rq);
    events_.insert(Event{t, p, kRequestRank, next_seq_++, body});
  }

  bool step() {
    if (events_.empty()) return false;
    Event ev = *events_.begin();
    if (ev.time > cfg_.max_steps) {
      trace_.truncated = true;
      events_.clear();
      return false;
    }
    events_.erase(events_.begin());
    now_ = ev.time;

    Effects fx;
    auto it = machines_.find(ev.receiver);
    switch (ev.body.tag()) {
      case EventBody::Tag::Request: {
        Msg m;
        m.kind = "REQUEST";
        m.inst = ev.body.request.inst;
        m.val = ev.body.request.val;
        trace_.entries.push_back(TraceEntry{now_, EntryKind::Request, ev.receiver,
                                            ev.receiver, {m}, ev.body.request.op});
        if (it != machines_.end()) it->second.on_request(ev.body.request, fx);
        break;
      }
      case EventBody::Tag::Batch: {
        trace_.entries.push_back(TraceEntry{now_, EntryKind::Deliver, ev.sender_rank,
                                            ev.receiver, ev.body.msgs, ""});
        if (it != machines_.end()) it->second.on_deliver(ev.sender_rank, ev.body.msgs, fx);
        break;
      }
      case EventBody::Tag::Timer: {
        trace_.entries.push_back(TraceEntry{now_, EntryKind::Timer, ev.receiver,
                                            ev.receiver, {}, "timer " + std::to_string(ev.body.timer_id)});
        if (it != machines_.end()) it->second.on_timer(ev.body.timer_id, fx);
        break;
      }
    }
    apply_effects(ev.receiver, fx);
    return true;
  }

  Trace& run_until_quiescent() {
    while (step()) {
    }
    return trace_;
  }

  Time now() const { return now_; }
  const Trace& trace() const { return trace_; }
  const M& machine(ProcessId p) const { return machines_.at(p); }
  M& machine(ProcessId p) { return machines_.at(p); }
  bool has_machine(ProcessId p) const { return machines_.count(p) != 0; }

 private:
  static constexpr int kRequestRank = -2;  // requests before timers before batches
  static constexpr int kTimerRank = -1;

  struct EventBody {
    Request request;
    std::vector<Msg> msgs;
    int timer_id = 0;
    int which = -1;  // 0 request, 1 batch, 2 timer

    enum class Tag { Request, Batch, Timer };
    Tag tag() const { return which == 0 ? Tag::Request : which == 1 ? Tag::Batch : Tag::Timer; }
  };

  struct Event {
    Time time;
    ProcessId receiver;
    int sender_rank;  // sender id for batches; -1 timers; -2 requests
    uint64_t seq;
    EventBody body;

    bool operator<(const Event& o) const {
      if (time != o.time) return time < o.time;
      if (receiver != o.receiver) return receiver < o.receiver;
      if (sender_rank != o.sender_rank) return sender_rank < o.sender_rank;
      return seq < o.seq;
    }
  };

  void validate_script(const AdversaryScript& script) const {
    for (const DelayRule& r : script.delays) {
      // A rule that can hit a well-behaved pair must respect the horizon.
      bool wb_pair = (r.from == -1 || part_.is_well_behaved(r.from)) &&
                     (r.to == -1 || part_.is_well_behaved(r.to));
      if (wb_pair && r.until > cfg_.horizon())
        throw std::invalid_argument(
            "delay rule holds a well-behaved batch past the delivery horizon");
    }
  }

  void enqueue_send(ProcessId from, ProcessId to, const std::vector<Msg>& msgs, Time t,
                    const std::string& note) {
    trace_.entries.push_back(TraceEntry{t, EntryKind::Send, from, to, msgs, note});
    if (part_.is_byzantine(to)) return;  // adversary absorbs traffic to Byzantine
    Time deliver_at = t + 1;
    for (const DelayRule& r : script_.delays) {
      Batch probe{from, to, msgs, t};
      if (r.matches(probe)) deliver_at = std::max(deliver_at, r.until);
    }
    // Partial synchrony: well-behaved pairs meet the bound after GST and
    // the declared horizon before it.
    if (part_.is_well_behaved(from) && part_.is_well_behaved(to)) {
      Time cap = t >= cfg_.gst ? t + cfg_.post_gst_bound : cfg_.horizon();
      deliver_at = std::min(deliver_at, std::max(cap, t + 1));
    }
    EventBody body;
    body.which = 1;
    body.msgs = msgs;
    events_.insert(Event{deliver_at, to, from, next_seq_++, body});
  }

  void apply_effects(ProcessId self, const Effects& fx) {
    for (const Response& r : fx.responses) {
      Msg m;
      m.kind = "RESPONSE";
      m.inst = r.inst;
      m.val = r.val;
      trace_.entries.push_back(TraceEntry{now_, EntryKind::Response, self, self, {m}, r.op});
    }
    // Batched network semantics: everything sent in this event to the same
    // receiver goes out as one batch.
    std::map<ProcessId, std::vector<Msg>> grouped;
    for (auto& [to, m] : fx.sends) grouped[to].push_back(m);
    for (auto& [to, msgs] : grouped) enqueue_send(self, to, msgs, now_, "");
    for (auto& [delay, id] : fx.timers) {
      EventBody body;
      body.which = 2;
      body.timer_id = id;
      events_.insert(Event{now_ + delay, self, kTimerRank, next_seq_++, body});
    }
  }

  NetConfig cfg_;
  ProcessSet universe_;
  Partition part_;
  std::map<ProcessId, M> machines_;
  AdversaryScript script_;
  std::set<Event> events_;
  Trace trace_;
  Time now_ = 0;
  uint64_t next_seq_ = 0;
};

}  // namespace hqs
