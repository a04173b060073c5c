#pragma once

#include "hqs/brb.hpp"
#include "hqs/consensus.hpp"
#include "hqs/discovery.hpp"
#include "hqs/graph.hpp"
#include "hqs/scenario.hpp"

// Randomized property suites: seeded generation of small systems and
// adversary schedules, protocol runs, and the property checks. On a
// failure the counterexample's seed and trace are kept for the report.

namespace hqs {

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ULL) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  int below(int bound) { return static_cast<int>(next() % static_cast<uint64_t>(bound)); }
  bool chance(int num, int den) { return below(den) < num; }
  ProcessId pick(ProcessSet s) {
    auto m = s.members();
    return m[static_cast<size_t>(below(static_cast<int>(m.size())))];
  }
  ProcessSet subset(ProcessSet s, int permille) {
    ProcessSet out;
    for (ProcessId p : s.members())
      if (below(1000) < permille) out.add(p);
    return out;
  }
};

struct GeneratedInstance {
  QuorumSystem system{ProcessSet::of({0}), {{0, {ProcessSet::of({0})}}}};
  Partition partition;
};

// Random system over 1..n, every quorum containing its owner.
inline QuorumSystem random_system(Rng& rng, int n) {
  ProcessSet universe;
  for (int p = 1; p <= n; p++) universe.add(p);
  std::map<ProcessId, std::vector<Quorum>> quorums;
  for (int p = 1; p <= n; p++) {
    int count = 1 + rng.below(3);
    std::vector<Quorum> qs;
    for (int i = 0; i < count; i++) {
      ProcessSet q;
      q.add(p);
      for (int o = 1; o <= n; o++)
        if (o != p && rng.chance(1, 2)) q.add(o);
      qs.push_back(q);
    }
    quorums[p] = qs;
  }
  return minimize(QuorumSystem(universe, std::move(quorums)));
}

// Instance with quorum intersection and a non-empty strongly available
// set; Byzantine count 0..2.
inline std::optional<GeneratedInstance> gen_strong_instance(Rng& rng, int max_n = 6) {
  int n = 3 + rng.below(max_n - 2);
  QuorumSystem qs = random_system(rng, n);
  ProcessSet byz;
  int target = rng.below(3);
  while (byz.size() < target) byz.add(1 + rng.below(n));
  Partition part{byz, qs.universe()};
  if (!has_quorum_intersection(qs, part).holds) return std::nullopt;
  if (strongly_available_set(qs, part).empty()) return std::nullopt;
  return GeneratedInstance{qs, part};
}

// Instance with intersection plus sharing across every declared quorum,
// each quorum touching the well-behaved set; used by the graph/discovery
// suites. When `byz_outside_minimal` is set, Byzantine processes must not
// sit in any system-minimal quorum.
inline std::optional<GeneratedInstance> gen_sharing_instance(Rng& rng, int max_byz,
                                                             bool byz_outside_minimal) {
  int n = 3 + rng.below(4);  // 3..6
  QuorumSystem qs = random_system(rng, n);
  ProcessSet byz;
  int target = max_byz == 0 ? 0 : rng.below(max_byz + 1);
  while (byz.size() < target) byz.add(1 + rng.below(n));
  Partition part{byz, qs.universe()};

  if (!has_quorum_intersection(qs, part).holds) return std::nullopt;
  for (ProcessId p : qs.declaring_processes())
    for (Quorum q : qs.quorums_of(p)) {
      if (!is_quorum_subsuming(qs, q).holds) return std::nullopt;
      if (!q.intersects(part.well_behaved())) return std::nullopt;
    }
  if (byz_outside_minimal)
    for (Quorum q : system_minimal_quorums(qs))
      if (q.intersects(byz)) return std::nullopt;
  return GeneratedInstance{qs, part};
}

// Random conforming schedule: pre-GST delays within the horizon plus
// Byzantine silence windows.
inline AdversaryScript random_delays(Rng& rng, const GeneratedInstance& inst,
                                     const NetConfig& net) {
  AdversaryScript script;
  int rules = rng.below(5);
  for (int i = 0; i < rules; i++) {
    DelayRule r;
    ProcessSet u = inst.system.universe();
    r.from = rng.chance(1, 3) ? -1 : rng.pick(u);
    r.to = rng.chance(1, 3) ? -1 : rng.pick(u);
    r.sent_from = rng.below(static_cast<int>(net.gst) + 1);
    r.sent_to = r.sent_from + rng.below(8);
    r.until = r.sent_from + 1 + rng.below(static_cast<int>(net.horizon() - r.sent_from));
    if (r.until > net.horizon()) r.until = net.horizon();
    script.delays.push_back(r);
  }
  return script;
}

// ---- BRB / FV suite ---------------------------------------------------------

struct SuiteResult {
  int runs = 0;
  int violations = 0;
  std::vector<std::string> failures;
  std::optional<std::pair<uint64_t, Trace>> counterexample;
  Time elapsed_ms = 0;

  void fail(const std::string& what, uint64_t seed) {
    violations++;
    if (failures.size() < 16)
      failures.push_back(what + " [seed " + std::to_string(seed) + "]");
  }
  void keep_counterexample(uint64_t seed, const Trace& trace) {
    if (!counterexample) counterexample = {seed, trace};
  }
};

namespace suite_detail {

inline int count_responses(const Trace& trace, ProcessId p, const std::string& op_prefix) {
  int n = 0;
  for (const TraceEntry& e : trace.entries)
    if (e.kind == EntryKind::Response && e.from == p && e.note.rfind(op_prefix, 0) == 0)
      n++;
  return n;
}

}  // namespace suite_detail

// One seeded broadcast run; checks consistency, no-duplication, integrity,
// validity for the strongly available set and totality for the weakly
// available set.
inline void brb_property_run(uint64_t seed, bool federated, SuiteResult& out) {
  Rng rng(seed);
  auto inst = gen_strong_instance(rng);
  if (!inst) return;
  out.runs++;
  int before = out.violations;

  NetConfig net;
  net.gst = rng.below(16);
  net.post_gst_bound = 2;
  net.max_steps = 3000;
  AdversaryScript script = random_delays(rng, *inst, net);

  ProcessSet wb = inst->partition.well_behaved();
  ProcessSet byz = inst->partition.byzantine;

  // Sender: well-behaved, or Byzantine when available (plain BRB mode).
  bool byz_sender = !federated && !byz.empty() && rng.chance(1, 2);
  ProcessId sender = byz_sender ? rng.pick(byz) : rng.pick(wb);

  if (byz_sender) {
    // Equivocate between m1 and m2 across random subsets.
    for (ProcessId p : wb.members())
      script.injects.push_back(
          {sender, p, {make_msg("BCAST", "0", rng.chance(1, 2) ? "m1" : "m2")}, rng.below(4)});
  }
  // Byzantine noise: echoes and readies with either value at random times.
  for (ProcessId z : byz.members()) {
    if (z == sender) continue;
    int shots = rng.below(4);
    for (int i = 0; i < shots; i++) {
      const char* kind = rng.chance(1, 2) ? "ECHO" : "READY";
      script.injects.push_back(
          {z, rng.pick(wb), {make_msg(kind, "0", rng.chance(1, 2) ? "m1" : "m2")}, rng.below(20)});
    }
  }

  Simulation<BrbMachine> sim(net, inst->system, inst->partition, [&](ProcessId p) {
    return BrbMachine(make_brb_context(inst->system, p), federated, sender);
  });
  sim.load_script(script);
  if (!byz_sender) {
    if (federated && rng.chance(1, 2)) {
      // Everyone broadcasts the same message.
      for (ProcessId p : wb.members())
        sim.request_at(p, Request{"broadcast", "0", "m1"}, rng.below(3));
    } else {
      sim.request_at(sender, Request{"broadcast", "0", "m1"}, 0);
    }
  }
  auto& trace = sim.run_until_quiescent();
  if (trace.truncated) {
    out.fail("broadcast run failed to quiesce", seed);
    return;
  }

  std::map<ProcessId, std::string> delivered;
  for (ProcessId p : wb.members()) {
    const FvInstance& st = sim.machine(p).instance("0");
    if (st.delivered) {
      delivered[p] = st.delivered_val;
      // A delivery always rests on a full quorum of readies.
      if (!sim.machine(p).context().quorum_inside(st.ready_set(st.delivered_val)))
        out.fail("delivery without a ready quorum at " + std::to_string(p), seed);
    }
    // No duplication, straight from the trace.
    if (suite_detail::count_responses(trace, p, "deliver") > 1)
      out.fail("duplicate delivery at " + std::to_string(p), seed);
  }

  // A well-behaved process only ever carries one value in its echoes and
  // one in its readies.
  for (const TraceEntry& e : trace.entries) {
    if (e.kind != EntryKind::Send || !wb.contains(e.from)) continue;
    for (const Msg& m : e.msgs) {
      if (m.kind == "ECHO" || m.kind == "READY") {
        const FvInstance& st = sim.machine(e.from).instance(m.inst);
        const std::string& own = m.kind == "ECHO" ? st.echo_val : st.ready_val;
        if (m.val != own)
          out.fail("two " + m.kind + " values from " + std::to_string(e.from), seed);
      }
    }
  }

  // Consistency.
  std::string first;
  for (auto& [p, v] : delivered) {
    if (first.empty()) first = v;
    if (v != first) {
      out.fail("consistency violation: " + first + " vs " + v, seed);
      out.keep_counterexample(seed, trace);
      return;
    }
  }

  if (!byz_sender) {
    // Integrity: posted value only.
    for (auto& [p, v] : delivered)
      if (v != "m1") out.fail("integrity violation at " + std::to_string(p), seed);
    // Validity for the strongly available set.
    for (ProcessId p : strongly_available_set(inst->system, inst->partition).members())
      if (!delivered.count(p))
        out.fail("validity violation: " + std::to_string(p) + " missed delivery", seed);
  }
  // Totality for the weakly available set.
  if (!delivered.empty())
    for (ProcessId p : weakly_available_set(inst->system, inst->partition).members())
      if (!delivered.count(p))
        out.fail("totality violation: " + std::to_string(p) + " missed delivery", seed);

  if (out.violations > before) out.keep_counterexample(seed, trace);
}

inline SuiteResult run_brb_suite(uint64_t seed, int count) {
  SuiteResult out;
  for (int i = 0; out.runs < count; i++) {
    uint64_t run_seed = seed + static_cast<uint64_t>(i);
    brb_property_run(run_seed, (i % 2) == 1, out);
    if (i > count * 40) break;  // generator starved; should not happen
  }
  return out;
}

// ---- consensus suite --------------------------------------------------------

inline void consensus_property_run(uint64_t seed, SuiteResult& out) {
  Rng rng(seed);
  auto inst = gen_strong_instance(rng);
  if (!inst) return;
  out.runs++;
  int before = out.violations;

  NetConfig net;
  net.gst = rng.below(32);
  net.post_gst_bound = 2;
  net.max_steps = 6000;

  AdversaryScript script = random_delays(rng, *inst, net);
  ProcessSet wb = inst->partition.well_behaved();
  ProcessSet byz = inst->partition.byzantine;

  std::vector<int> domain = {1, 2, 3, 4};
  // Byzantine noise: echo/ready votes on round-1/2 ballots; no broadcast
  // forgery (a fabricated vote instance is outside the conforming family).
  for (ProcessId z : byz.members()) {
    int shots = rng.below(5);
    for (int i = 0; i < shots; i++) {
      Ballot b{1 + rng.below(2), domain[static_cast<size_t>(rng.below(4))]};
      const char* kind = rng.chance(1, 2) ? "ECHO" : "READY";
      const char* verdict = rng.chance(2, 3) ? "A" : "C";
      script.injects.push_back({z, rng.pick(wb), {make_msg(kind, b.key(), verdict)}, rng.below(30)});
    }
  }

  ConsensusConfig cfg{domain, 8, 3, round_robin(inst->system.universe())};
  Simulation<ConsensusMachine> sim(net, inst->system, inst->partition, [&](ProcessId p) {
    return ConsensusMachine(make_brb_context(inst->system, p), cfg);
  });
  sim.load_script(script);
  std::map<ProcessId, int> proposals;
  for (ProcessId p : wb.members()) {
    proposals[p] = domain[static_cast<size_t>(rng.below(4))];
    sim.request_at(p, Request{"propose", "", std::to_string(proposals[p])}, rng.below(3));
  }
  auto& trace = sim.run_until_quiescent();

  // Agreement on every schedule; at most one decide response each; the
  // prepared variable never steps backwards in ballot order.
  std::optional<int> agreed;
  for (ProcessId p : wb.members()) {
    if (suite_detail::count_responses(trace, p, "decide") > 1)
      out.fail("duplicate decision at " + std::to_string(p), seed);
    const auto& hist = sim.machine(p).prepared_history();
    for (size_t i = 1; i < hist.size(); i++)
      if (!(hist[i - 1] < hist[i]))
        out.fail("prepared regressed at " + std::to_string(p), seed);
    auto v = sim.machine(p).decided_value();
    if (!v) continue;
    if (!agreed) agreed = *v;
    if (*v != *agreed) {
      out.fail("agreement violation", seed);
      out.keep_counterexample(seed, trace);
      return;
    }
  }

  // Validity trace-back on all-well-behaved runs: the decided value leads
  // back to a propose request in the trace.
  if (byz.empty() && agreed) {
    bool proposed = false;
    for (const TraceEntry& e : trace.entries)
      if (e.kind == EntryKind::Request && e.note == "propose" && !e.msgs.empty() &&
          e.msgs[0].val == std::to_string(*agreed))
        proposed = true;
    if (!proposed) out.fail("validity violation: unproposed value decided", seed);
  }

  // Termination for the strongly available set: the run quiesced and
  // rotation passes well-behaved leaders, so they must all have decided.
  if (!trace.truncated) {
    for (ProcessId p : strongly_available_set(inst->system, inst->partition).members())
      if (!sim.machine(p).decided_value())
        out.fail("termination violation at " + std::to_string(p), seed);
  }
  if (out.violations > before) out.keep_counterexample(seed, trace);
}

inline SuiteResult run_consensus_suite(uint64_t seed, int count) {
  SuiteResult out;
  for (int i = 0; out.runs < count; i++) {
    consensus_property_run(seed + static_cast<uint64_t>(i), out);
    if (i > count * 40) break;
  }
  return out;
}

// ---- discovery / election suite ---------------------------------------------

inline void discovery_property_run(uint64_t seed, bool lying, SuiteResult& out) {
  Rng rng(seed);
  auto inst = gen_sharing_instance(rng, lying ? 2 : 0, /*byz_outside_minimal=*/lying);
  if (!inst) return;
  out.runs++;

  int before = out.violations;
  QuorumGraph graph = build_graph(inst->system);
  SinkResult oracle = sink_component(graph);
  ProcessSet wb = inst->partition.well_behaved();

  // The minimal-quorum lemma, brute-forced both directions.
  auto lemma = check_minimal_quorum_lemma(inst->system, inst->partition);
  if (!lemma.holds) {
    out.fail("minimal-quorum lemma failed: " + lemma.note, seed);
    return;
  }

  NetConfig net;
  net.gst = lying ? 8 : 0;
  net.max_steps = 4000;
  AdversaryScript script;
  if (lying) {
    script = random_delays(rng, *inst, net);
    for (ProcessId z : inst->partition.byzantine.members()) {
      // Lying exchanges: a different fabricated quorum list per receiver.
      for (ProcessId p : wb.members()) {
        if (rng.chance(1, 3)) continue;
        Msg m;
        m.kind = "EXCHANGE";
        int k = 1 + rng.below(2);
        for (int i = 0; i < k; i++) {
          ProcessSet fake = rng.subset(inst->system.universe(), 500);
          fake.add(z);
          m.quorums.push_back(fake);
        }
        script.injects.push_back({z, p, {m}, rng.below(4)});
      }
      // Forged extends built from the Byzantine's own fabrications. The
      // fake quorum names at least one well-behaved member: a set of
      // Byzantine processes vouching only for each other is
      // indistinguishable from a real quorum under declaration-only
      // semantics, so it sits outside the lying family.
      if (rng.chance(1, 2)) {
        Msg forged;
        forged.kind = "EXTEND";
        ProcessSet fake = rng.subset(wb, 400);
        fake.add(rng.pick(wb));
        fake.add(z);
        forged.quorum = fake;
        forged.records.push_back(QuorumRecord{z, {fake}});
        script.injects.push_back({z, rng.pick(wb), {forged}, 4 + rng.below(6)});
      }
    }
  }

  DiscoveryConfig dcfg{16, true};
  Simulation<DiscoveryMachine> sim(net, inst->system, inst->partition, [&](ProcessId p) {
    return DiscoveryMachine(p, inst->system.quorums_of(p), dcfg);
  });
  sim.load_script(script);
  for (ProcessId p : wb.members())
    sim.request_at(p, Request{"discover", "", ""}, 0);
  auto& trace = sim.run_until_quiescent();
  if (trace.truncated) {
    out.fail("discovery run failed to quiesce", seed);
    out.keep_counterexample(seed, trace);
    return;
  }

  ProcessSet proto_sink;
  for (ProcessId p : wb.members())
    if (sim.machine(p).in_sink()) proto_sink.add(p);

  // Accuracy on every schedule.
  if (!proto_sink.subset_of(oracle.sink))
    out.fail("accuracy violation: in_sink outside the sink component", seed);

  if (!lying) {
    // Completeness: equality with the well-behaved sink membership.
    if (!(proto_sink == (oracle.sink & wb)))
      out.fail("completeness violation: " + proto_sink.str() + " != " +
                   (oracle.sink & wb).str(),
               seed);
    // Follower sets converge to the static relation.
    for (ProcessId p : wb.members()) {
      ProcessSet expected = followers(inst->system, p) & wb;
      if (!expected.subset_of(sim.machine(p).follower_set()))
        out.fail("follower completeness violation at " + std::to_string(p), seed);
    }
  }

  // Electors agree on the minimum well-behaved sink member.
  ProcessSet wb_sink = oracle.sink & wb;
  if (!wb_sink.empty()) {
    ProcessId expected_leader = wb_sink.members().front();
    for (ProcessId p : wb.members()) {
      auto e = sim.machine(p).elected();
      if (!e) continue;
      if (lying) {
        if (!wb_sink.contains(*e))
          out.fail("lying run elected " + std::to_string(*e) + " outside the sink", seed);
      } else if (*e != expected_leader) {
        out.fail("elected " + std::to_string(*e) + ", expected " +
                     std::to_string(expected_leader),
                 seed);
      }
    }
    if (!lying) {
      // On honest runs every sink member must actually elect.
      for (ProcessId p : wb_sink.members())
        if (!sim.machine(p).elected())
          out.fail("sink member " + std::to_string(p) + " never elected", seed);
    }
  }
  if (out.violations > before) out.keep_counterexample(seed, trace);
}

inline SuiteResult run_discovery_suite(uint64_t seed, int count) {
  SuiteResult out;
  for (int i = 0; out.runs < count; i++) {
    discovery_property_run(seed + static_cast<uint64_t>(i), (i % 2) == 1, out);
    if (i > count * 60) break;
  }
  return out;
}

}  // namespace hqs
