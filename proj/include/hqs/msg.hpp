#pragma once

#include <string>
#include <vector>

#include "hqs/core.hpp"

// Wire messages. One struct covers every protocol; unused fields stay at
// their defaults and are omitted from the JSON trace form.

namespace hqs {

// (origin, declared quorums) as captured from an Exchange; the simulator
// vouches for the origin, nothing else.
struct QuorumRecord {
  ProcessId origin = -1;
  std::vector<Quorum> quorums;
  bool operator==(const QuorumRecord&) const = default;
};

struct Msg {
  std::string kind;  // BCAST ECHO READY EXCHANGE EXTEND PROPAGATE PROPAGATEF
  std::string inst;  // instance id; ballot key "r:v" for consensus voting
  std::string val;   // payload value ("A"/"C" verdicts, scenario values)

  // discovery / election payloads
  ProcessId about = -1;               // subject of PROPAGATE/PROPAGATEF
  Quorum quorum;                      // EXTEND: the quorum being extended
  std::vector<Quorum> quorums;        // EXCHANGE / PROPAGATEF: declared quorums
  std::vector<QuorumRecord> records;  // proof bundle riding EXTEND/PROPAGATE

  bool operator==(const Msg&) const = default;
};

inline Msg make_msg(std::string kind, std::string inst, std::string val) {
  Msg m;
  m.kind = std::move(kind);
  m.inst = std::move(inst);
  m.val = std::move(val);
  return m;
}

// Scenario-level request delivered to one process (propose, broadcast,
// discover...).
struct Request {
  std::string op;
  std::string inst;
  std::string val;
  bool operator==(const Request&) const = default;
};

// Protocol response surfaced through the trace (deliver, decide, elect...).
struct Response {
  std::string op;
  std::string inst;
  std::string val;
  bool operator==(const Response&) const = default;
};

}  // namespace hqs
