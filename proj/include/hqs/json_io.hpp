#pragma once

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hqs/core.hpp"
#include "hqs/msg.hpp"
#include "hqs/sim.hpp"
#include "hqs/slices.hpp"

// JSON formats: one system/scenario file format ("format": 1, ids are
// integers, quorums are arrays of arrays) and the JSON-lines trace export
// with stable field order {t, kind, from, to, msgs, note}.

namespace hqs {

using json = nlohmann::ordered_json;

inline json set_to_json(ProcessSet s) {
  json arr = json::array();
  for (ProcessId p : s.members()) arr.push_back(p);
  return arr;
}

inline ProcessSet set_from_json(const json& arr) {
  ProcessSet s;
  for (const auto& v : arr) {
    int p = v.get<int>();
    if (p < 0 || p >= kMaxProcesses) throw std::invalid_argument("process id out of range");
    s.add(p);
  }
  return s;
}

inline json msg_to_json(const Msg& m) {
  json j;
  j["kind"] = m.kind;
  if (!m.inst.empty()) j["inst"] = m.inst;
  if (!m.val.empty()) j["val"] = m.val;
  if (m.about >= 0) j["about"] = m.about;
  if (!m.quorum.empty()) j["quorum"] = set_to_json(m.quorum);
  if (!m.quorums.empty()) {
    json qs = json::array();
    for (Quorum q : m.quorums) qs.push_back(set_to_json(q));
    j["quorums"] = qs;
  }
  if (!m.records.empty()) {
    json recs = json::array();
    for (const QuorumRecord& r : m.records) {
      json rec;
      rec["origin"] = r.origin;
      json qs = json::array();
      for (Quorum q : r.quorums) qs.push_back(set_to_json(q));
      rec["quorums"] = qs;
      recs.push_back(rec);
    }
    j["records"] = recs;
  }
  return j;
}

inline Msg msg_from_json(const json& j) {
  Msg m;
  m.kind = j.value("kind", "");
  m.inst = j.value("inst", "");
  m.val = j.value("val", "");
  m.about = j.value("about", -1);
  if (j.contains("quorum")) m.quorum = set_from_json(j["quorum"]);
  if (j.contains("quorums"))
    for (const auto& q : j["quorums"]) m.quorums.push_back(set_from_json(q));
  if (j.contains("records"))
    for (const auto& r : j["records"]) {
      QuorumRecord rec;
      rec.origin = r.value("origin", -1);
      for (const auto& q : r["quorums"]) rec.quorums.push_back(set_from_json(q));
      m.records.push_back(rec);
    }
  return m;
}

inline json entry_to_json(const TraceEntry& e) {
  json j;
  j["t"] = e.t;
  j["kind"] = kind_name(e.kind);
  j["from"] = e.from;
  j["to"] = e.to;
  json msgs = json::array();
  for (const Msg& m : e.msgs) msgs.push_back(msg_to_json(m));
  j["msgs"] = msgs;
  j["note"] = e.note;
  return j;
}

inline std::string trace_to_jsonl(const Trace& trace) {
  std::string out;
  for (const TraceEntry& e : trace.entries) out += entry_to_json(e).dump() + "\n";
  if (trace.truncated) out += "{\"truncated\":true}\n";
  return out;
}

// Normal form for view comparison: delivery order and contents only.
inline std::string view_to_jsonl(const std::vector<ViewEntry>& view) {
  std::string out;
  for (const ViewEntry& v : view) {
    json j;
    j["from"] = v.from;
    json msgs = json::array();
    for (const Msg& m : v.msgs) msgs.push_back(msg_to_json(m));
    j["msgs"] = msgs;
    out += j.dump() + "\n";
  }
  return out;
}

// ---- system files ----------------------------------------------------------

struct SystemFile {
  QuorumSystem system;
  Partition partition;
  std::optional<SliceViews> slices;
  std::vector<int> value_domain;
};

inline SystemFile system_from_json(const json& j) {
  if (j.value("format", 0) != 1) throw std::invalid_argument("unsupported format");
  ProcessSet universe = set_from_json(j.at("processes"));
  ProcessSet byz = j.contains("byzantine") ? set_from_json(j["byzantine"]) : ProcessSet{};

  std::optional<SliceViews> slices;
  std::map<ProcessId, std::vector<Quorum>> quorums;

  if (j.contains("slices")) {
    SliceViews v(universe);
    for (auto& [declarer_str, decl] : j["slices"].items()) {
      ProcessId declarer = std::stoi(declarer_str);
      if (decl.is_array()) {
        std::vector<ProcessSet> ss;
        for (const auto& s : decl) ss.push_back(set_from_json(s));
        v.set_uniform(declarer, ss);
      } else {
        // per-observer presentations; only meaningful for Byzantine declarers
        if (!byz.contains(declarer))
          throw std::invalid_argument("well-behaved declarer " + declarer_str +
                                      " must present one slice set");
        for (auto& [observer_str, s_arr] : decl.items()) {
          std::vector<ProcessSet> ss;
          for (const auto& s : s_arr) ss.push_back(set_from_json(s));
          v.set_view(declarer, std::stoi(observer_str), ss);
        }
      }
    }
    slices = v;
    Partition part{byz, universe};
    QuorumSystem derived = derive_system(v, part);
    Partition checked = make_partition(derived, byz);
    return SystemFile{std::move(derived), checked, slices,
                      j.contains("values") ? j["values"].get<std::vector<int>>()
                                           : std::vector<int>{}};
  }

  for (auto& [pid_str, qlist] : j.at("quorums").items()) {
    ProcessId p = std::stoi(pid_str);
    std::vector<Quorum> qs;
    for (const auto& q : qlist) qs.push_back(set_from_json(q));
    quorums[p] = qs;
  }
  QuorumSystem qs = minimize(QuorumSystem(universe, std::move(quorums)));
  Partition part = make_partition(qs, byz);
  return SystemFile{std::move(qs), part, slices,
                    j.contains("values") ? j["values"].get<std::vector<int>>()
                                         : std::vector<int>{}};
}

inline SystemFile load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  try {
    return system_from_json(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline json system_to_json(const QuorumSystem& qs, const Partition& part) {
  json j;
  j["format"] = 1;
  j["processes"] = set_to_json(qs.universe());
  j["byzantine"] = set_to_json(part.byzantine);
  json quorums;
  for (ProcessId p : qs.declaring_processes()) {
    json qlist = json::array();
    for (Quorum q : qs.quorums_of(p)) qlist.push_back(set_to_json(q));
    quorums[std::to_string(p)] = qlist;
  }
  j["quorums"] = quorums;
  return j;
}

}  // namespace hqs
