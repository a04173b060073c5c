#pragma once

#include <functional>

#include "hqs/brb.hpp"
#include "hqs/consensus.hpp"
#include "hqs/discovery.hpp"
#include "hqs/graph.hpp"
#include "hqs/json_io.hpp"
#include "hqs/sim.hpp"
#include "hqs/stack.hpp"

// Scripted executions: a declarative scenario format (loadable from JSON)
// plus the canned runs that reproduce the worked examples, each with its
// machine-checked expectation set.

namespace hqs {

enum class Protocol { Brb, Fv, Consensus, Discovery, Election, Stack };

inline Protocol protocol_from_string(const std::string& s) {
  if (s == "brb") return Protocol::Brb;
  if (s == "fv") return Protocol::Fv;
  if (s == "consensus") return Protocol::Consensus;
  if (s == "discovery") return Protocol::Discovery;
  if (s == "election") return Protocol::Election;
  if (s == "stack") return Protocol::Stack;
  throw std::invalid_argument("unknown protocol: " + s);
}

struct TimedRequest {
  Time t = 0;
  ProcessId to = -1;
  Request rq;
};

// Declarative expectations, all optional.
struct Expectation {
  std::map<ProcessId, std::string> delivered;             // brb/fv: value per process
  std::vector<ProcessId> not_delivered;                   // must not deliver
  std::map<ProcessId, std::pair<int, std::string>> decided;  // value, ballot key
  std::vector<ProcessId> undecided;
  std::map<ProcessId, std::vector<std::string>> prepared_trajectory;  // ballot keys
  std::vector<ProcessId> in_sink;                         // exactly these set in_sink
  std::map<ProcessId, ProcessId> elected;
};

struct Scenario {
  std::string name;
  QuorumSystem system{ProcessSet::of({0}), {{0, {ProcessSet::of({0})}}}};
  Partition partition;
  Protocol protocol = Protocol::Brb;
  ProcessId designated_sender = -1;  // brb only
  std::vector<int> value_domain;
  NetConfig net;
  Time delta = 3;
  Time timeout_base = 8;
  Time stability_window = 16;
  std::vector<TimedRequest> requests;
  AdversaryScript script;
  Expectation expect;
};

struct ScenarioReport {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::pair<std::string, Trace>> traces;

  void fail(std::string msg) {
    passed = false;
    failures.push_back(std::move(msg));
  }
};

namespace detail {

template <class M>
Simulation<M> make_sim(const Scenario& sc, std::function<M(ProcessId)> factory) {
  Simulation<M> sim(sc.net, sc.system, sc.partition, factory);
  sim.load_script(sc.script);
  for (const TimedRequest& r : sc.requests) sim.request_at(r.to, r.rq, r.t);
  return sim;
}

inline void check_deliveries(const Scenario& sc, ScenarioReport& rep,
                             const std::function<std::string(ProcessId)>& delivered_of) {
  for (auto& [p, want] : sc.expect.delivered)
    if (delivered_of(p) != want)
      rep.fail("process " + std::to_string(p) + ": expected delivery of '" + want +
               "', got '" + delivered_of(p) + "'");
  for (ProcessId p : sc.expect.not_delivered)
    if (!delivered_of(p).empty())
      rep.fail("process " + std::to_string(p) + " unexpectedly delivered '" +
               delivered_of(p) + "'");
}

}  // namespace detail

// Runs a declarative scenario and checks its expectations.
inline ScenarioReport run_scenario(const Scenario& sc) {
  ScenarioReport rep;
  rep.name = sc.name;

  switch (sc.protocol) {
    case Protocol::Brb:
    case Protocol::Fv: {
      bool fv = sc.protocol == Protocol::Fv;
      auto sim = detail::make_sim<BrbMachine>(sc, [&](ProcessId p) {
        return BrbMachine(make_brb_context(sc.system, p), fv, sc.designated_sender);
      });
      sim.run_until_quiescent();
      rep.traces.emplace_back("run", sim.trace());
      auto delivered = [&](ProcessId p) -> std::string {
        if (!sim.has_machine(p)) return "";
        return sim.machine(p).instance("0").delivered_val;
      };
      detail::check_deliveries(sc, rep, delivered);
      break;
    }
    case Protocol::Consensus: {
      ConsensusConfig cfg{sc.value_domain, sc.timeout_base, sc.delta,
                          round_robin(sc.system.universe())};
      auto sim = detail::make_sim<ConsensusMachine>(sc, [&](ProcessId p) {
        return ConsensusMachine(make_brb_context(sc.system, p), cfg);
      });
      sim.run_until_quiescent();
      rep.traces.emplace_back("run", sim.trace());
      for (auto& [p, want] : sc.expect.decided) {
        auto& m = sim.machine(p);
        if (!m.decided_value())
          rep.fail("process " + std::to_string(p) + " did not decide");
        else if (*m.decided_value() != want.first ||
                 m.decided_ballot()->key() != want.second)
          rep.fail("process " + std::to_string(p) + " decided " +
                   std::to_string(*m.decided_value()) + " at " +
                   m.decided_ballot()->key() + ", expected " +
                   std::to_string(want.first) + " at " + want.second);
      }
      for (ProcessId p : sc.expect.undecided)
        if (sim.machine(p).decided_value())
          rep.fail("process " + std::to_string(p) + " unexpectedly decided");
      for (auto& [p, want] : sc.expect.prepared_trajectory) {
        std::vector<std::string> got;
        for (Ballot b : sim.machine(p).prepared_history()) got.push_back(b.key());
        if (got != want) {
          std::string g, w;
          for (auto& s : got) g += s + " ";
          for (auto& s : want) w += s + " ";
          rep.fail("process " + std::to_string(p) + " prepared trajectory [" + g +
                   "] != expected [" + w + "]");
        }
      }
      break;
    }
    case Protocol::Stack: {
      ConsensusConfig ccfg{sc.value_domain, sc.timeout_base, sc.delta,
                           round_robin(sc.system.universe())};
      DiscoveryConfig dcfg{sc.stability_window, true};
      auto sim = detail::make_sim<StackMachine>(sc, [&](ProcessId p) {
        return StackMachine(make_brb_context(sc.system, p), ccfg, dcfg,
                            sc.system.quorums_of(p));
      });
      sim.run_until_quiescent();
      rep.traces.emplace_back("run", sim.trace());
      for (auto& [p, want] : sc.expect.decided) {
        auto& m = sim.machine(p).consensus();
        if (!m.decided_value() || *m.decided_value() != want.first)
          rep.fail("process " + std::to_string(p) + " did not decide " +
                   std::to_string(want.first));
      }
      for (ProcessId p : sc.expect.undecided)
        if (sim.machine(p).consensus().decided_value())
          rep.fail("process " + std::to_string(p) + " unexpectedly decided");
      for (auto& [p, want] : sc.expect.elected) {
        auto got = sim.machine(p).discovery().elected();
        if (!got || *got != want)
          rep.fail("process " + std::to_string(p) + " elected " +
                   (got ? std::to_string(*got) : "nobody") + ", expected " +
                   std::to_string(want));
      }
      break;
    }
    case Protocol::Discovery:
    case Protocol::Election: {
      DiscoveryConfig cfg{sc.stability_window, sc.protocol == Protocol::Election};
      auto sim = detail::make_sim<DiscoveryMachine>(sc, [&](ProcessId p) {
        return DiscoveryMachine(p, sc.system.quorums_of(p), cfg);
      });
      sim.run_until_quiescent();
      rep.traces.emplace_back("run", sim.trace());
      if (!sc.expect.in_sink.empty()) {
        ProcessSet want;
        for (ProcessId p : sc.expect.in_sink) want.add(p);
        ProcessSet got;
        for (ProcessId p : sc.partition.well_behaved().members())
          if (sim.has_machine(p) && sim.machine(p).in_sink()) got.add(p);
        if (!(got == want))
          rep.fail("in_sink set " + got.str() + " != expected " + want.str());
      }
      for (auto& [p, want] : sc.expect.elected) {
        auto got = sim.machine(p).elected();
        if (!got || *got != want)
          rep.fail("process " + std::to_string(p) + " elected " +
                   (got ? std::to_string(*got) : "nobody") + ", expected " +
                   std::to_string(want));
      }
      break;
    }
  }
  return rep;
}

// ---- canned scenarios -------------------------------------------------------

// Non-termination of blocking-set broadcast: Byzantine sender 0 starts m1
// toward {1,3,4}; Byzantine 2 injects Ready(m2) into 3 and 4, which are
// blocked by {2}. Process 4 delivers m2; process 1 stays ready for m1 and
// blocked forever.
inline Scenario bracha_blocking_scenario() {
  Scenario sc;
  sc.name = "bracha-blocking";
  sc.system = QuorumSystem(ProcessSet::of({0, 1, 2, 3, 4}),
                           {{1, {ProcessSet::of({1, 3, 4})}},
                            {3, {ProcessSet::of({1, 2, 3})}},
                            {4, {ProcessSet::of({2, 3, 4})}}});
  sc.partition = make_partition(sc.system, ProcessSet::of({0, 2}));
  sc.protocol = Protocol::Brb;
  sc.designated_sender = 0;
  sc.net.gst = 0;
  sc.net.max_steps = 10000;
  for (ProcessId p : {1, 3, 4})
    sc.script.injects.push_back({0, p, {make_msg("BCAST", "0", "m1")}, 0});
  // Lands together with the echoes, before any well-behaved Ready reaches
  // 3 or 4; {2} blocks both.
  for (ProcessId p : {3, 4})
    sc.script.injects.push_back({2, p, {make_msg("READY", "0", "m2")}, 1});
  sc.expect.delivered[4] = "m2";
  sc.expect.not_delivered = {1, 3};
  return sc;
}

inline ScenarioReport run_bracha_blocking() {
  Scenario sc = bracha_blocking_scenario();
  ScenarioReport rep = run_scenario(sc);

  auto sim = detail::make_sim<BrbMachine>(sc, [&](ProcessId p) {
    return BrbMachine(make_brb_context(sc.system, p), false, 0);
  });
  sim.run_until_quiescent();
  auto& m1 = sim.machine(1);
  if (m1.instance("0").ready_val != "m1") rep.fail("process 1 did not get ready for m1");
  if (m1.instance("0").delivered) rep.fail("process 1 delivered despite the block");
  auto& m3 = sim.machine(3);
  if (m3.instance("0").ready_val != "m2") rep.fail("process 3 did not relay Ready(m2)");
  if (sim.now() >= 10000) rep.fail("run did not quiesce early");

  // Step-exact event sequence of the whole scripted run: the sender's
  // BCast wave, the echo wave, the injected Ready(m2)s blocking 3 and 4,
  // 1's lone Ready(m1), and the single delivery at 4.
  const char* expected[] = {
      "0 s 0>1 BCAST:m1", "0 s 0>3 BCAST:m1", "0 s 0>4 BCAST:m1",
      "1 s 2>3 READY:m2", "1 s 2>4 READY:m2", "1 d 0>1 BCAST:m1",
      "1 s 1>1 ECHO:m1",  "1 s 1>3 ECHO:m1",  "1 d 0>3 BCAST:m1",
      "1 s 3>1 ECHO:m1",  "1 s 3>3 ECHO:m1",  "1 s 3>4 ECHO:m1",
      "1 d 0>4 BCAST:m1", "1 s 4>1 ECHO:m1",  "1 s 4>4 ECHO:m1",
      "2 d 1>1 ECHO:m1",  "2 d 3>1 ECHO:m1",  "2 d 4>1 ECHO:m1",
      "2 s 1>1 READY:m1", "2 s 1>3 READY:m1", "2 d 1>3 ECHO:m1",
      "2 d 2>3 READY:m2", "2 s 3>1 READY:m2", "2 s 3>3 READY:m2",
      "2 s 3>4 READY:m2", "2 d 3>3 ECHO:m1",  "2 d 2>4 READY:m2",
      "2 s 4>1 READY:m2", "2 s 4>4 READY:m2", "2 d 3>4 ECHO:m1",
      "2 d 4>4 ECHO:m1",  "3 d 1>1 READY:m1", "3 d 3>1 READY:m2",
      "3 d 4>1 READY:m2", "3 d 1>3 READY:m1", "3 d 3>3 READY:m2",
      "3 d 3>4 READY:m2", "3 d 4>4 READY:m2", "3 r 4>4 deliver:m2",
  };
  const Trace& trace = sim.trace();
  size_t n = sizeof(expected) / sizeof(expected[0]);
  if (trace.entries.size() != n) {
    rep.fail("event count " + std::to_string(trace.entries.size()) + " != " +
             std::to_string(n));
  } else {
    for (size_t i = 0; i < n; i++) {
      const TraceEntry& e = trace.entries[i];
      const char* k = e.kind == EntryKind::Send      ? "s"
                      : e.kind == EntryKind::Deliver ? "d"
                      : e.kind == EntryKind::Response ? "r"
                                                       : "?";
      std::string line = std::to_string(e.t) + " " + k + " " + std::to_string(e.from) +
                         ">" + std::to_string(e.to) + " " +
                         (e.kind == EntryKind::Response
                              ? e.note + ":" + e.msgs[0].val
                              : e.msgs[0].kind + ":" + e.msgs[0].val);
      if (line != expected[i]) {
        rep.fail("event " + std::to_string(i) + " is '" + line + "', expected '" +
                 expected[i] + "'");
        break;
      }
    }
  }
  return rep;
}

// Leader-switch consensus run: leaders 1 (well-behaved), 2 (Byzantine), 3
// (well-behaved); Byzantine 2 echoes only the first two abort instances at
// 1, tries a bogus commit, then goes silent. Processes 3 and 4 decide 2 at
// <3,2>; process 1 stays undecided with prepared <1,2>.
inline Scenario consensus_changeleader_scenario() {
  Scenario sc;
  sc.name = "consensus-changeleader";
  sc.system = QuorumSystem(ProcessSet::of({1, 2, 3, 4}),
                           {{1, {ProcessSet::of({1, 2, 3})}},
                            {3, {ProcessSet::of({3, 4}), ProcessSet::of({1, 3})}},
                            {4, {ProcessSet::of({3, 4})}}});
  sc.partition = make_partition(sc.system, ProcessSet::of({2}));
  sc.protocol = Protocol::Consensus;
  sc.value_domain = {1, 2, 3, 4, 5};
  sc.delta = 3;
  sc.net.gst = 1000;  // scripted run: the adversary owns the schedule throughout
  sc.net.post_gst_bound = 2;
  sc.net.max_steps = 150;

  sc.requests.push_back({0, 1, Request{"propose", "", "3"}});
  sc.requests.push_back({0, 3, Request{"propose", "", "5"}});
  sc.requests.push_back({0, 4, Request{"propose", "", "2"}});

  // Process 4 partitioned until the leader-2 round; process 3's own echo
  // batch crawls, so its readies for the first two instances arrive via
  // the {1,4} blocking set and never cover <1,2>.
  sc.script.delays.push_back({-1, 4, 0, 19, 20});
  sc.script.delays.push_back({3, 3, 0, 5, 80});

  // Byzantine 2 supports only the <0,_> and <1,1> aborts at process 1.
  sc.script.injects.push_back(
      {2, 1, {make_msg("ECHO", "0:0", "A"), make_msg("ECHO", "1:1", "A")}, 1});
  sc.script.injects.push_back(
      {2, 1, {make_msg("READY", "0:0", "A"), make_msg("READY", "1:1", "A")}, 2});
  // Bogus commit by the Byzantine round-2 leader; no one accepts it.
  sc.script.injects.push_back({2, 1, {make_msg("BCAST", "2:4", "C")}, 17});

  sc.expect.decided[3] = {2, "3:2"};
  sc.expect.decided[4] = {2, "3:2"};
  sc.expect.undecided = {1};
  sc.expect.prepared_trajectory[1] = {"0:0", "1:2"};
  sc.expect.prepared_trajectory[3] = {"0:0", "1:2", "3:2"};
  sc.expect.prepared_trajectory[4] = {"0:0", "1:2", "3:2"};
  return sc;
}

inline ScenarioReport run_consensus_changeleader() {
  return run_scenario(consensus_changeleader_scenario());
}

// Last-minute attack. Byzantine round-1 leader prepares <1,4> at 3 and 4
// but only <1,3> at 2, then plants a commit echo for <1,4> at process 3.
// Without the leader delay the next leaders chase incompatible candidates
// against the locked instance and the decision needs two extra rounds;
// with the delay the round-2 leader adopts value 4 and everyone decides.
inline Scenario last_minute_attack_scenario(Time delta) {
  Scenario sc;
  sc.name = "last-minute-attack";
  std::map<ProcessId, std::vector<Quorum>> q;
  for (ProcessId p : {1, 2, 3, 4}) {
    std::vector<Quorum> qs;
    for (ProcessSet s : {ProcessSet::of({1, 2, 3}), ProcessSet::of({1, 2, 4}),
                         ProcessSet::of({1, 3, 4}), ProcessSet::of({2, 3, 4})})
      if (s.contains(p)) qs.push_back(s);
    q[p] = qs;
  }
  sc.system = QuorumSystem(ProcessSet::of({1, 2, 3, 4}), std::move(q));
  sc.partition = make_partition(sc.system, ProcessSet::of({1}));
  sc.protocol = Protocol::Consensus;
  sc.value_domain = {1, 2, 3, 4, 5};
  sc.delta = delta;
  sc.net.gst = 100;
  sc.net.post_gst_bound = 2;
  sc.net.pre_gst_slack = 20;
  sc.net.max_steps = 200;

  sc.requests.push_back({0, 2, Request{"propose", "", "3"}});
  sc.requests.push_back({0, 3, Request{"propose", "", "4"}});
  sc.requests.push_back({0, 4, Request{"propose", "", "5"}});

  // Byzantine leader 1: abort everything below <1,3> at 2 and below <1,4>
  // at 3 and 4.
  std::vector<Msg> aborts_13 = {make_msg("BCAST", "0:0", "A"), make_msg("BCAST", "1:1", "A"),
                                make_msg("BCAST", "1:2", "A")};
  std::vector<Msg> aborts_14 = aborts_13;
  aborts_14.push_back(make_msg("BCAST", "1:3", "A"));
  sc.script.injects.push_back({1, 2, aborts_13, 0});
  sc.script.injects.push_back({1, 3, aborts_14, 0});
  sc.script.injects.push_back({1, 4, aborts_14, 0});
  // Help 3 and 4 complete the <1,3> instance.
  sc.script.injects.push_back({1, 3, {make_msg("ECHO", "1:3", "A")}, 2});
  sc.script.injects.push_back({1, 4, {make_msg("ECHO", "1:3", "A")}, 2});
  sc.script.injects.push_back({1, 4, {make_msg("READY", "1:3", "A")}, 3});
  // The last-minute commit: only process 3 sees it and echoes it.
  sc.script.injects.push_back({1, 3, {make_msg("BCAST", "1:4", "C")}, 4});

  // <1,3> ready relays toward 2 (and 4's toward 3) held back until just
  // after the round-1 timeout, so 2 enters round 2 prepared at <1,3> and
  // only observes <1,4> during the leader delay window.
  sc.script.delays.push_back({3, 2, 3, 10, 17});
  sc.script.delays.push_back({4, 2, 3, 10, 17});
  sc.script.delays.push_back({4, 3, 3, 10, 17});
  // Without the delay, round 3's leader never reaches its followers in
  // round 3 (the adversary owns the pre-GST schedule).
  sc.script.delays.push_back({3, -1, 48, 48, 113});
  return sc;
}

inline ScenarioReport run_last_minute_attack() {
  ScenarioReport rep;
  rep.name = "last-minute-attack";

  auto run_one = [&](Time delta) {
    Scenario sc = last_minute_attack_scenario(delta);
    ConsensusConfig cfg{sc.value_domain, sc.timeout_base, sc.delta,
                        round_robin(sc.system.universe())};
    auto sim = detail::make_sim<ConsensusMachine>(sc, [&](ProcessId p) {
      return ConsensusMachine(make_brb_context(sc.system, p), cfg);
    });
    sim.run_until_quiescent();
    return sim;
  };

  auto with_delta = run_one(3);
  auto without_delta = run_one(0);
  rep.traces.emplace_back("delta-3", with_delta.trace());
  rep.traces.emplace_back("delta-0", without_delta.trace());

  // With the delay, every strongly available process decides in round 2.
  int round_with = -1;
  for (ProcessId p : {2, 3, 4}) {
    auto& m = with_delta.machine(p);
    if (!m.decided_value() || *m.decided_value() != 4)
      rep.fail("delta run: process " + std::to_string(p) + " failed to decide 4");
    else
      round_with = m.decided_ballot()->round;
  }
  // Without it, the decision arrives two leader rounds later.
  int round_without = -1;
  for (ProcessId p : {2, 3, 4}) {
    auto& m = without_delta.machine(p);
    if (!m.decided_value() || *m.decided_value() != 4)
      rep.fail("delta-0 run: process " + std::to_string(p) + " failed to decide 4");
    else
      round_without = m.decided_ballot()->round;
  }
  if (round_with > 0 && round_without > 0 && round_without - round_with < 2)
    rep.fail("delta-0 decision round " + std::to_string(round_without) +
             " not at least 2 rounds after delta run round " + std::to_string(round_with));
  return rep;
}

// Soft lock: the Byzantine round-1 leader prepares <1,4> at 3 and 4 with a
// commit echo planted at 3, while leader 2 comes up prepared at <1,3>.
// Leader 2's abort of <1,4> stalls on the missing echo while the Byzantine
// sulks: round 2 burns and the next leader adopts the locked value 4. With
// Byzantine cooperation the same abort completes and leader 2 carries its
// own candidate instead; both runs decide, with different values.
inline ScenarioReport run_softlock() {
  ScenarioReport rep;
  rep.name = "softlock";

  auto run_one = [&](bool cooperate) {
    Scenario sc = last_minute_attack_scenario(0);
    sc.name = "softlock";
    // Drop the round-3 interference; keep the round-1 setup and the lock.
    sc.script.delays.pop_back();
    if (cooperate) {
      sc.script.injects.push_back({1, 2, {make_msg("ECHO", "1:4", "A")}, 19});
      sc.script.injects.push_back({1, 4, {make_msg("ECHO", "1:4", "A")}, 19});
      sc.script.injects.push_back({1, 2, {make_msg("READY", "1:4", "A")}, 21});
      sc.script.injects.push_back({1, 4, {make_msg("READY", "1:4", "A")}, 21});
    }
    ConsensusConfig cfg{sc.value_domain, sc.timeout_base, sc.delta,
                        round_robin(sc.system.universe())};
    auto sim = detail::make_sim<ConsensusMachine>(sc, [&](ProcessId p) {
      return ConsensusMachine(make_brb_context(sc.system, p), cfg);
    });
    sim.run_until_quiescent();
    return sim;
  };

  auto locked = run_one(false);
  auto cooperating = run_one(true);
  rep.traces.emplace_back("locked", locked.trace());
  rep.traces.emplace_back("cooperating", cooperating.trace());

  const FvInstance* lock = locked.machine(3).instance("1:4");
  if (!lock || lock->echo_val != "C") rep.fail("process 3 did not echo the commit");

  // Without cooperation the abort never completes; the next well-behaved
  // leader adopts the locked value and everyone decides 4 in round 3.
  for (ProcessId p : {2, 3, 4}) {
    auto& m = locked.machine(p);
    const FvInstance* i = m.instance("1:4");
    if (i && i->delivered && i->delivered_val == "A")
      rep.fail("locked run: <1,4> aborted at " + std::to_string(p) +
               " without Byzantine help");
    if (!m.decided_value() || *m.decided_value() != 4)
      rep.fail("locked run: process " + std::to_string(p) + " failed to decide 4");
    else if (m.decided_ballot()->round != 3)
      rep.fail("locked run: decision in round " +
               std::to_string(m.decided_ballot()->round) + ", expected 3");
  }

  // With cooperation the abort lands and leader 2 commits its own <2,3>.
  bool aborted_somewhere = false;
  for (ProcessId p : {2, 3, 4}) {
    auto& m = cooperating.machine(p);
    const FvInstance* i = m.instance("1:4");
    aborted_somewhere |= i && i->delivered && i->delivered_val == "A";
    if (!m.decided_value() || *m.decided_value() != 3 ||
        m.decided_ballot()->key() != "2:3")
      rep.fail("cooperating run: process " + std::to_string(p) +
               " did not decide 3 at <2,3>");
  }
  if (!aborted_somewhere)
    rep.fail("cooperating run: <1,4> still not abortable, lock is not soft");
  return rep;
}

// Hard lock: the Byzantine leader drives a full commit of <1,4> through
// two well-behaved echoes plus its own. Every well-behaved process decides
// the locked value, and no coalition can ever abort it afterwards.
inline ScenarioReport run_hardlock() {
  ScenarioReport rep;
  rep.name = "hardlock";

  Scenario sc = last_minute_attack_scenario(3);
  sc.name = "hardlock";
  sc.script.delays.clear();
  sc.script.injects.clear();
  std::vector<Msg> aborts = {make_msg("BCAST", "0:0", "A"), make_msg("BCAST", "1:1", "A"),
                             make_msg("BCAST", "1:2", "A"), make_msg("BCAST", "1:3", "A")};
  for (ProcessId p : {2, 3, 4}) sc.script.injects.push_back({1, p, aborts, 0});
  for (ProcessId p : {3, 4})
    sc.script.injects.push_back({1, p, {make_msg("BCAST", "1:4", "C")}, 3});
  for (ProcessId p : {3, 4})
    sc.script.injects.push_back({1, p, {make_msg("ECHO", "1:4", "C")}, 4});
  for (ProcessId p : {3, 4})
    sc.script.injects.push_back({1, p, {make_msg("READY", "1:4", "C")}, 5});

  ConsensusConfig cfg{sc.value_domain, sc.timeout_base, sc.delta,
                      round_robin(sc.system.universe())};
  auto sim = detail::make_sim<ConsensusMachine>(sc, [&](ProcessId p) {
    return ConsensusMachine(make_brb_context(sc.system, p), cfg);
  });
  sim.run_until_quiescent();
  rep.traces.emplace_back("run", sim.trace());

  // 3 and 4 decide straight off the committed instance; 2 never saw the
  // commit's broadcast but the locked value is the only value the system
  // can carry, so round 2 decides it again at <2,4>.
  for (ProcessId p : {3, 4}) {
    auto& m = sim.machine(p);
    if (!m.decided_value() || *m.decided_value() != 4 ||
        !(m.decided_ballot() && m.decided_ballot()->key() == "1:4"))
      rep.fail("process " + std::to_string(p) + " did not decide 4 at <1,4>");
  }
  {
    auto& m = sim.machine(2);
    if (!m.decided_value() || *m.decided_value() != 4)
      rep.fail("process 2 did not decide the locked value 4");
  }
  // Hard: the processes still able to echo an abort for <1,4> (those that
  // never echoed on it) plus the Byzantine are fewer than any quorum.
  ProcessSet could_echo_abort = ProcessSet::of({1});  // the Byzantine itself
  for (ProcessId p : {2, 3, 4}) {
    const FvInstance* i = sim.machine(p).instance("1:4");
    if (!i || !i->echoed) could_echo_abort.add(p);
  }
  int min_quorum = 99;
  for (ProcessId p : sc.system.declaring_processes())
    for (Quorum q : sc.system.quorums_of(p)) min_quorum = std::min(min_quorum, q.size());
  if (could_echo_abort.size() >= min_quorum)
    rep.fail("echo pool " + could_echo_abort.str() + " could still abort; lock is not hard");
  return rep;
}

// Indistinguishability replay. Triangle system; E1 runs configuration
// <2,2,2> with a cut off; E2 has Byzantine c replaying E1 toward b (and E0
// toward a); E3 has Byzantine a silent until the switch point and then
// speaking as in E2. Up to the switch, b's views in E2 and E3 are
// byte-identical.
inline ScenarioReport run_indistinguishability() {
  ScenarioReport rep;
  rep.name = "indist-e0..e3";

  constexpr ProcessId a = 1, b = 2, c = 3;
  constexpr Time switch_point = 60;

  QuorumSystem tri(ProcessSet::of({a, b, c}),
                   {{a, {ProcessSet::of({a, c})}},
                    {b, {ProcessSet::of({a, b})}},
                    {c, {ProcessSet::of({b, c})}}});
  std::vector<int> domain = {1, 2};

  auto run = [&](ProcessSet byz, std::map<ProcessId, int> proposals,
                 AdversaryScript script) {
    Scenario sc;
    sc.system = tri;
    sc.partition = Partition{byz, tri.universe()};
    sc.protocol = Protocol::Consensus;
    sc.value_domain = domain;
    sc.net.gst = 200;
    sc.net.max_steps = 90;
    sc.script = script;
    ConsensusConfig cfg{domain, 8, 3, round_robin(tri.universe())};
    Simulation<ConsensusMachine> sim(sc.net, sc.system, sc.partition, [&](ProcessId p) {
      return ConsensusMachine(make_brb_context(tri, p), cfg);
    });
    sim.load_script(sc.script);
    for (auto& [p, v] : proposals)
      sim.request_at(p, Request{"propose", "", std::to_string(v)}, 0);
    sim.run_until_quiescent();
    return sim.trace();
  };

  AdversaryScript only_ac;  // delay everything touching b
  only_ac.delays.push_back({b, -1, 0, -1, 199});
  only_ac.delays.push_back({-1, b, 0, -1, 199});
  Trace e0 = run({}, {{a, 1}, {b, 1}, {c, 1}}, only_ac);

  AdversaryScript only_bc;  // delay everything touching a
  only_bc.delays.push_back({a, -1, 0, -1, 199});
  only_bc.delays.push_back({-1, a, 0, -1, 199});
  Trace e1 = run({}, {{a, 2}, {b, 2}, {c, 2}}, only_bc);

  // E2: c Byzantine; a<->b delayed until the switch point; c replays its E1
  // sends toward b and its E0 sends toward a.
  AdversaryScript e2_script;
  e2_script.delays.push_back({a, b, 0, switch_point - 1, switch_point});
  e2_script.delays.push_back({b, a, 0, switch_point - 1, switch_point});
  for (Inject i : replay_from(e1, c, b)) e2_script.injects.push_back(i);
  for (Inject i : replay_from(e0, c, a)) e2_script.injects.push_back(i);
  Trace e2 = run(ProcessSet::of({c}), {{a, 1}, {b, 2}}, e2_script);

  // E3: a Byzantine and silent before the switch point, then speaking as at
  // the end of E2; b and c run for real.
  AdversaryScript e3_script;
  for (Inject i : replay_from(e2, a, b)) {
    i.at = std::max(i.at, switch_point);
    e3_script.injects.push_back(i);
  }
  Trace e3 = run(ProcessSet::of({a}), {{b, 2}, {c, 2}}, e3_script);

  rep.traces.emplace_back("e0", e0);
  rep.traces.emplace_back("e1", e1);
  rep.traces.emplace_back("e2", e2);
  rep.traces.emplace_back("e3", e3);

  std::string view2 = view_to_jsonl(view_of(e2, b, switch_point - 1));
  std::string view3 = view_to_jsonl(view_of(e3, b, switch_point - 1));
  if (view2 != view3)
    rep.fail("process b's views in E2 and E3 differ before the switch point");
  if (view2.empty()) rep.fail("process b saw nothing before the switch point");

  // The E1 prefix at b matches as well: the Byzantine replay is faithful.
  std::string view1 = view_to_jsonl(view_of(e1, b, switch_point - 1));
  if (view1 != view2) rep.fail("replayed E1 prefix at b diverges from the real E1");
  return rep;
}

// FBQS discovery run: everyone discovers, Byzantine 4 stays silent. 2 and
// 5 prove themselves in phase 1 via {2,5}; 3 joins in phase 2 through the
// Extend from 2; process 1 stays out. Electors converge on 2.
inline Scenario fbqs_discovery_scenario() {
  QuorumSystem fbqs(ProcessSet::of({1, 2, 3, 4, 5}),
                    {{1, {ProcessSet::of({1, 2, 4}), ProcessSet::of({1, 2, 5})}},
                     {2, {ProcessSet::of({2, 3, 4}), ProcessSet::of({2, 5})}},
                     {3, {ProcessSet::of({2, 3, 4})}},
                     {5, {ProcessSet::of({2, 5})}}});
  Scenario sc;
  sc.name = "fbqs-discovery";
  sc.system = fbqs;
  sc.partition = make_partition(fbqs, ProcessSet::of({4}));
  sc.protocol = Protocol::Election;
  sc.net.max_steps = 400;
  for (ProcessId p : {1, 2, 3, 5})
    sc.requests.push_back({0, p, Request{"discover", "", ""}});
  sc.expect.in_sink = {2, 3, 5};
  sc.expect.elected[1] = 2;
  sc.expect.elected[2] = 2;
  sc.expect.elected[3] = 2;
  sc.expect.elected[5] = 2;
  return sc;
}

inline ScenarioReport run_fbqs_discovery() {
  Scenario sc = fbqs_discovery_scenario();
  ScenarioReport run = run_scenario(sc);

  // The expectation matches the graph oracle: the discovered set is the
  // well-behaved part of the unique sink component.
  SinkResult oracle = sink_component(build_graph(sc.system));
  ProcessSet wb_sink = oracle.sink & sc.partition.well_behaved();
  ProcessSet expected;
  for (ProcessId p : sc.expect.in_sink) expected.add(p);
  if (!(wb_sink == expected))
    run.fail("graph oracle sink " + wb_sink.str() + " disagrees with expectation " +
             expected.str());
  return run;
}

// ---- trace replay -----------------------------------------------------------

// Drives fresh machines through a recorded trace as a pure script: every
// request, delivery and timer event is fed back in order, outputs are
// dropped. Returns the per-process state summaries.
template <ProtocolMachine M>
std::map<ProcessId, std::string> replay_trace(const Trace& trace, const Partition& part,
                                              std::function<M(ProcessId)> factory) {
  std::map<ProcessId, M> machines;
  for (ProcessId p : part.well_behaved().members()) machines.emplace(p, factory(p));
  for (const TraceEntry& e : trace.entries) {
    auto it = machines.find(e.to);
    if (it == machines.end()) continue;
    Effects fx;
    switch (e.kind) {
      case EntryKind::Request: {
        Request rq{e.note, e.msgs.empty() ? "" : e.msgs[0].inst,
                   e.msgs.empty() ? "" : e.msgs[0].val};
        it->second.on_request(rq, fx);
        break;
      }
      case EntryKind::Deliver:
        it->second.on_deliver(e.from, e.msgs, fx);
        break;
      case EntryKind::Timer:
        if (e.note.rfind("timer ", 0) == 0)
          it->second.on_timer(std::stoi(e.note.substr(6)), fx);
        break;
      default:
        break;
    }
  }
  std::map<ProcessId, std::string> out;
  for (auto& [p, m] : machines) out[p] = m.summary();
  return out;
}

// Runs the scenario live, re-drives fresh machines from the recorded
// trace, and reports any process whose final state differs.
inline std::vector<std::string> replay_check(const Scenario& sc) {
  std::vector<std::string> diffs;
  auto compare = [&](auto live_sim, auto factory) {
    auto& trace = live_sim.run_until_quiescent();
    auto replayed = replay_trace<std::decay_t<decltype(live_sim.machine(0))>>(
        trace, sc.partition, factory);
    for (auto& [p, summary] : replayed)
      if (live_sim.machine(p).summary() != summary)
        diffs.push_back("process " + std::to_string(p) + ": live '" +
                        live_sim.machine(p).summary() + "' vs replay '" + summary + "'");
  };
  switch (sc.protocol) {
    case Protocol::Brb:
    case Protocol::Fv: {
      bool fv = sc.protocol == Protocol::Fv;
      std::function<BrbMachine(ProcessId)> f = [&](ProcessId p) {
        return BrbMachine(make_brb_context(sc.system, p), fv, sc.designated_sender);
      };
      compare(detail::make_sim<BrbMachine>(sc, f), f);
      break;
    }
    case Protocol::Consensus: {
      ConsensusConfig cfg{sc.value_domain, sc.timeout_base, sc.delta,
                          round_robin(sc.system.universe())};
      std::function<ConsensusMachine(ProcessId)> f = [&](ProcessId p) {
        return ConsensusMachine(make_brb_context(sc.system, p), cfg);
      };
      compare(detail::make_sim<ConsensusMachine>(sc, f), f);
      break;
    }
    case Protocol::Discovery:
    case Protocol::Election: {
      DiscoveryConfig cfg{sc.stability_window, sc.protocol == Protocol::Election};
      std::function<DiscoveryMachine(ProcessId)> f = [&](ProcessId p) {
        return DiscoveryMachine(p, sc.system.quorums_of(p), cfg);
      };
      compare(detail::make_sim<DiscoveryMachine>(sc, f), f);
      break;
    }
    case Protocol::Stack: {
      ConsensusConfig ccfg{sc.value_domain, sc.timeout_base, sc.delta,
                           round_robin(sc.system.universe())};
      DiscoveryConfig dcfg{sc.stability_window, true};
      std::function<StackMachine(ProcessId)> f = [&](ProcessId p) {
        return StackMachine(make_brb_context(sc.system, p), ccfg, dcfg,
                            sc.system.quorums_of(p));
      };
      compare(detail::make_sim<StackMachine>(sc, f), f);
      break;
    }
  }
  return diffs;
}

// ---- scenario files ---------------------------------------------------------

inline Scenario scenario_from_json(const json& j) {
  if (j.value("format", 0) != 1) throw std::invalid_argument("unsupported format");
  Scenario sc;
  sc.name = j.value("name", "scenario");
  SystemFile sys = system_from_json(j.at("system"));
  sc.system = sys.system;
  sc.partition = sys.partition;
  sc.value_domain = sys.value_domain.empty() ? std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8}
                                             : sys.value_domain;
  sc.protocol = protocol_from_string(j.value("protocol", "brb"));
  sc.designated_sender = j.value("sender", -1);
  if (j.contains("net")) {
    const json& n = j["net"];
    sc.net.gst = n.value("gst", sc.net.gst);
    sc.net.post_gst_bound = n.value("post_gst_bound", sc.net.post_gst_bound);
    sc.net.pre_gst_slack = n.value("pre_gst_slack", sc.net.pre_gst_slack);
    sc.net.max_steps = n.value("max_steps", sc.net.max_steps);
    sc.net.seed = n.value("seed", sc.net.seed);
    sc.delta = n.value("delta", sc.delta);
    sc.timeout_base = n.value("timeout_base", sc.timeout_base);
    sc.stability_window = n.value("stability_window", sc.stability_window);
  }
  for (const auto& r : j.value("requests", json::array()))
    sc.requests.push_back({r.value("t", 0LL), r.at("to").get<int>(),
                           Request{r.at("op").get<std::string>(), r.value("inst", ""),
                                   r.value("val", "")}});
  if (j.contains("script")) {
    const json& s = j["script"];
    for (const auto& d : s.value("delays", json::array()))
      sc.script.delays.push_back({d.value("from", -1), d.value("to", -1),
                                  d.value("sent_from", 0LL), d.value("sent_to", -1LL),
                                  d.at("until").get<long long>()});
    for (const auto& i : s.value("injects", json::array())) {
      Inject inj;
      inj.sender = i.at("sender").get<int>();
      inj.to = i.at("to").get<int>();
      inj.at = i.value("at", 0LL);
      for (const auto& m : i.at("msgs")) inj.msgs.push_back(msg_from_json(m));
      sc.script.injects.push_back(inj);
    }
    for (const auto& q : s.value("silences", json::array()))
      sc.script.silences.push_back({q.at("byz").get<int>(), q.value("from", 0LL)});
  }
  if (j.contains("expect")) {
    const json& e = j["expect"];
    const json delivered = e.value("delivered", json::object());
    for (auto& [pid, v] : delivered.items())
      sc.expect.delivered[std::stoi(pid)] = v.get<std::string>();
    for (const auto& p : e.value("not_delivered", json::array()))
      sc.expect.not_delivered.push_back(p.get<int>());
    const json decided = e.value("decided", json::object());
    for (auto& [pid, d] : decided.items())
      sc.expect.decided[std::stoi(pid)] = {d.at("val").get<int>(),
                                           d.at("ballot").get<std::string>()};
    for (const auto& p : e.value("undecided", json::array()))
      sc.expect.undecided.push_back(p.get<int>());
    const json traj = e.value("prepared_trajectory", json::object());
    for (auto& [pid, seq] : traj.items())
      sc.expect.prepared_trajectory[std::stoi(pid)] = seq.get<std::vector<std::string>>();
    for (const auto& p : e.value("in_sink", json::array()))
      sc.expect.in_sink.push_back(p.get<int>());
    const json elected = e.value("elected", json::object());
    for (auto& [pid, l] : elected.items())
      sc.expect.elected[std::stoi(pid)] = l.get<int>();
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline std::vector<std::string> canned_names() {
  return {"bracha-blocking", "consensus-changeleader", "last-minute-attack",
          "softlock",        "hardlock",               "indist-e0..e3",
          "fbqs-discovery"};
}

inline ScenarioReport run_canned(const std::string& name) {
  if (name == "bracha-blocking") return run_bracha_blocking();
  if (name == "consensus-changeleader") return run_consensus_changeleader();
  if (name == "last-minute-attack") return run_last_minute_attack();
  if (name == "softlock") return run_softlock();
  if (name == "hardlock") return run_hardlock();
  if (name == "indist-e0..e3") return run_indistinguishability();
  if (name == "fbqs-discovery") return run_fbqs_discovery();
  throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace hqs
