// Command-line laboratory for heterogeneous quorum systems: static
// property checks, quorum-graph rendering, scripted protocol scenarios,
// randomized property suites, and trace replay.

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "hqs/gen.hpp"
#include "hqs/graph.hpp"
#include "hqs/json_io.hpp"
#include "hqs/scenario.hpp"

using namespace hqs;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitExpectation = 1;
constexpr int kExitInput = 2;

std::string quorum_list(const std::vector<Quorum>& qs) {
  std::string out;
  for (Quorum q : qs) out += q.str() + " ";
  return out;
}

int cmd_check(const std::string& path) {
  SystemFile sf = load_system(path);
  const QuorumSystem& qs = sf.system;
  const Partition& part = sf.partition;

  std::cout << "universe:            " << qs.universe().str() << "\n";
  std::cout << "byzantine:           " << part.byzantine.str() << "\n";

  PropertyReport inter = has_quorum_intersection(qs, part);
  std::cout << "quorum intersection: " << (inter.holds ? "yes" : "NO");
  if (!inter.holds)
    std::cout << "  witness " << inter.witness_quorums[0].str() << " vs "
              << inter.witness_quorums[1].str();
  std::cout << "\n";

  std::cout << "weakly available:    " << weakly_available_set(qs, part).str() << "\n";
  std::cout << "strongly available:  " << strongly_available_set(qs, part).str() << "\n";

  PropertyReport sharing = has_quorum_sharing(qs, part);
  std::cout << "quorum sharing:      " << (sharing.holds ? "yes" : "NO");
  if (!sharing.holds)
    std::cout << "  witness " << sharing.witness_quorums[0].str() << " (member "
              << sharing.witness_processes.str() << " has no quorum inside)";
  std::cout << "\n";

  std::cout << "per-quorum subsumption:\n";
  for (ProcessId p : qs.declaring_processes())
    for (Quorum q : qs.quorums_of(p)) {
      PropertyReport sub = is_quorum_subsuming(qs, q);
      std::cout << "  " << p << " " << q.str() << ": " << (sub.holds ? "subsuming" : "not subsuming");
      if (!sub.holds) std::cout << " (witness " << sub.witness_processes.str() << ")";
      std::cout << "\n";
    }

  std::cout << "minimal quorums:     " << quorum_list(system_minimal_quorums(qs)) << "\n";

  SinkResult sink = sink_component(build_graph(qs));
  if (sink.unique) {
    std::cout << "sink component:      " << sink.sink.str() << "\n";
  } else {
    std::cout << "sink components (multiple!):";
    for (ProcessSet s : sink.all_sinks) std::cout << " " << s.str();
    std::cout << "\n";
  }
  return kExitPass;
}

int cmd_graph(const std::string& path, const std::string& out_path) {
  SystemFile sf = load_system(path);
  std::string dot = to_dot(build_graph(sf.system));
  if (out_path.empty()) {
    std::cout << dot;
  } else {
    std::ofstream out(out_path);
    out << dot;
  }
  return kExitPass;
}

void write_traces(const ScenarioReport& rep, const std::string& trace_out) {
  if (trace_out.empty()) return;
  for (auto& [label, trace] : rep.traces) {
    std::string path = trace_out;
    if (rep.traces.size() > 1) {
      auto dot = path.rfind(".jsonl");
      std::string stem = dot == std::string::npos ? path : path.substr(0, dot);
      path = stem + "." + label + ".jsonl";
    }
    std::ofstream out(path);
    out << trace_to_jsonl(trace);
    std::cerr << "trace written to " << path << "\n";
  }
}

int report_outcome(const ScenarioReport& rep, bool expect_fail) {
  for (const std::string& f : rep.failures) std::cout << "  FAIL " << f << "\n";
  bool pass = rep.passed != expect_fail;
  std::cout << (rep.passed ? "scenario passed" : "scenario failed")
            << (expect_fail ? " (failure expected)" : "") << "\n";
  return pass ? kExitPass : kExitExpectation;
}

ScenarioReport run_by_name_or_path(const std::string& what, Time max_steps_override) {
  for (const std::string& name : canned_names())
    if (what == name) return run_canned(name);
  Scenario sc = load_scenario(what);
  if (max_steps_override > 0) sc.net.max_steps = max_steps_override;
  return run_scenario(sc);
}

int cmd_run(const std::string& what, const std::string& trace_out, Time max_steps,
            bool expect_fail) {
  ScenarioReport rep = run_by_name_or_path(what, max_steps);
  write_traces(rep, trace_out);
  return report_outcome(rep, expect_fail);
}

int cmd_replay(const std::string& what, Time max_steps) {
  // Canned multi-run scenarios replay through their declarative cores.
  Scenario sc;
  if (what == "bracha-blocking") {
    sc = bracha_blocking_scenario();
  } else if (what == "consensus-changeleader") {
    sc = consensus_changeleader_scenario();
  } else if (what == "last-minute-attack" || what == "softlock" || what == "hardlock") {
    sc = last_minute_attack_scenario(3);
  } else if (what == "fbqs-discovery") {
    sc = fbqs_discovery_scenario();
  } else if (what == "indist-e0..e3") {
    std::cout << "indist-e0..e3 is a multi-run scenario; replay one of its runs via a "
                 "scenario file instead\n";
    return kExitInput;
  } else {
    sc = load_scenario(what);
    if (max_steps > 0) sc.net.max_steps = max_steps;
  }
  auto diffs = replay_check(sc);
  for (auto& d : diffs) std::cout << "  MISMATCH " << d << "\n";
  std::cout << (diffs.empty() ? "replay matches live run" : "replay diverged") << "\n";
  return diffs.empty() ? kExitPass : kExitExpectation;
}

int cmd_suite(uint64_t seed, int count, const std::string& kind) {
  auto stamp = [] { return std::chrono::steady_clock::now(); };
  auto ms = [](auto a, auto b) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(b - a).count();
  };
  bool ok = true;
  auto report = [&](const char* name, const SuiteResult& r, long long elapsed) {
    std::cout << name << ": " << r.runs << " runs, " << r.violations << " violations, "
              << elapsed << " ms\n";
    for (auto& f : r.failures) std::cout << "  FAIL " << f << "\n";
    if (r.counterexample) {
      std::cout << "  counterexample trace (seed " << r.counterexample->first << "):\n"
                << trace_to_jsonl(r.counterexample->second);
    }
    ok &= r.violations == 0;
  };

  if (kind == "brb" || kind == "all") {
    auto t0 = stamp();
    SuiteResult r = run_brb_suite(seed, count);
    report("brb/fv", r, ms(t0, stamp()));
  }
  if (kind == "consensus" || kind == "all") {
    auto t0 = stamp();
    SuiteResult r = run_consensus_suite(seed, count);
    report("consensus", r, ms(t0, stamp()));
  }
  if (kind == "discovery" || kind == "all") {
    auto t0 = stamp();
    SuiteResult r = run_discovery_suite(seed, std::max(count / 2, 1));
    report("discovery/election", r, ms(t0, stamp()));
  }
  return ok ? kExitPass : kExitExpectation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous quorum system laboratory"};
  app.require_subcommand(1);

  std::string path, trace_out, kind = "all";
  Time max_steps = 0;
  bool expect_fail = false;
  uint64_t seed = 1;
  int count = 500;

  auto* check = app.add_subcommand("check", "analyze a quorum system file");
  check->add_option("system", path, "system JSON file")->required();

  auto* graph = app.add_subcommand("graph", "emit the quorum graph as DOT");
  graph->add_option("system", path, "system JSON file")->required();
  graph->add_option("--out", trace_out, "output file (default stdout)");

  auto* run = app.add_subcommand("run", "run a canned or file scenario");
  run->add_option("scenario", path, "canned name or scenario JSON file")->required();
  run->add_option("--trace-out", trace_out, "write trace JSON-lines here");
  run->add_option("--max-steps", max_steps, "override the step budget");
  run->add_flag("--expect-fail", expect_fail, "invert the exit status");

  auto* replay = app.add_subcommand("replay", "re-drive machines from the recorded trace");
  replay->add_option("scenario", path, "canned name or scenario JSON file")->required();
  replay->add_option("--max-steps", max_steps, "override the step budget");

  auto* suite = app.add_subcommand("suite", "randomized property suites");
  suite->add_option("--seed", seed, "base seed");
  suite->add_option("--count", count, "instances per suite");
  suite->add_option("--kind", kind, "brb | consensus | discovery | all");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return cmd_check(path);
    if (*graph) return cmd_graph(path, trace_out);
    if (*run) return cmd_run(path, trace_out, max_steps, expect_fail);
    if (*replay) return cmd_replay(path, max_steps);
    if (*suite) return cmd_suite(seed, count, kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
