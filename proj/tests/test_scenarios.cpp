#include "doctest.h"

#include "hqs/json_io.hpp"
#include "hqs/scenario.hpp"

#include "fixtures.hpp"

using namespace hqs;

TEST_CASE("canned scenarios pass their expectation sets") {
  for (const std::string& name : canned_names()) {
    CAPTURE(name);
    ScenarioReport rep = run_canned(name);
    for (const std::string& f : rep.failures) {
      CAPTURE(f);
      CHECK(false);
    }
    CHECK(rep.passed);
  }
}

TEST_CASE("canned scenarios are deterministic") {
  for (const std::string& name : canned_names()) {
    CAPTURE(name);
    ScenarioReport a = run_canned(name);
    ScenarioReport b = run_canned(name);
    REQUIRE(a.traces.size() == b.traces.size());
    for (size_t i = 0; i < a.traces.size(); i++)
      CHECK(trace_to_jsonl(a.traces[i].second) == trace_to_jsonl(b.traces[i].second));
  }
}

TEST_CASE("trace jsonl round-trips message content") {
  ScenarioReport rep = run_canned("bracha-blocking");
  REQUIRE(!rep.traces.empty());
  const Trace& t = rep.traces[0].second;
  for (const TraceEntry& e : t.entries)
    for (const Msg& m : e.msgs) {
      Msg back = msg_from_json(msg_to_json(m));
      CHECK(back == m);
    }
}

TEST_CASE("replay round-trip reproduces final states for every protocol") {
  CHECK(replay_check(bracha_blocking_scenario()).empty());
  CHECK(replay_check(consensus_changeleader_scenario()).empty());
  CHECK(replay_check(last_minute_attack_scenario(3)).empty());
  CHECK(replay_check(last_minute_attack_scenario(0)).empty());
}

TEST_CASE("system file loading") {
  SystemFile run = load_system(std::string(HQS_SOURCE_DIR) + "/scenarios/running-example.json");
  QuorumSystem want = hqs::fixtures::running_example();
  for (ProcessId p : want.declaring_processes())
    CHECK(run.system.quorums_of(p) == want.quorums_of(p));
  CHECK(run.partition.byzantine == ProcessSet::of({2}));

  // Slice file expands through the closure into the discussion system.
  SystemFile fb = load_system(std::string(HQS_SOURCE_DIR) + "/scenarios/fbqs-discussion.json");
  QuorumSystem expect = hqs::fixtures::fbqs_derived();
  for (ProcessId p : {1, 2, 3, 5}) {
    auto got = fb.system.quorums_of(p);
    auto want2 = expect.quorums_of(p);
    std::sort(got.begin(), got.end());
    std::sort(want2.begin(), want2.end());
    CHECK(got == want2);
  }

  // A well-behaved process with an empty quorum list is rejected.
  json bad = {{"format", 1},
              {"processes", {1, 2}},
              {"byzantine", json::array()},
              {"quorums", {{"1", {{1, 2}}}, {"2", json::array()}}}};
  CHECK_THROWS_AS(system_from_json(bad), std::invalid_argument);

  // And so is one that declares no quorums at all.
  json bad2 = {{"format", 1},
               {"processes", {1, 2}},
               {"byzantine", json::array()},
               {"quorums", {{"1", {{1, 2}}}}}};
  CHECK_THROWS_AS(system_from_json(bad2), std::invalid_argument);
}
