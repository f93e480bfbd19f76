#include "sbnn/serialization.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace sbnn {

namespace {

Json schedule_entry_to_json(const ScheduleEntry& e) {
  if (!e.is_group()) return e.node.index;
  Json members = Json::array();
  for (const ScheduleEntry& m : e.members) members.push_back(schedule_entry_to_json(m));
  return Json{{"group", std::move(members)}};
}

ScheduleEntry schedule_entry_from_json(const Json& j, const NetworkTopology& net) {
  ScheduleEntry e;
  if (j.is_number_integer()) {
    const int idx = j.get<int>();
    if (idx < 0 || idx >= net.node_count())
      throw std::invalid_argument("schedule entry references unknown node");
    e.node = net.node(idx);
    return e;
  }
  if (j.is_object() && j.contains("group")) {
    for (const Json& m : j.at("group"))
      e.members.push_back(schedule_entry_from_json(m, net));
    if (e.members.empty())
      throw std::invalid_argument("schedule group must not be empty");
    return e;
  }
  throw std::invalid_argument("schedule entry must be a node index or a group");
}

}  // namespace

Json network_to_json(const NetworkTopology& net, const ActivationSchedule* schedule) {
  Json doc;
  doc["kind"] = net.kind == NetworkKind::Sbnn ? "sbnn" : "ffnn";
  doc["I"] = net.inputs;
  doc["H"] = net.hidden;
  doc["O"] = net.outputs;
  Json conns = Json::array();
  for (const Connection& c : net.connections) {
    Json jc;
    jc["src"] = c.src.index;
    jc["dst"] = c.dst.index;
    jc["weight"] = c.weight;
    jc["abcd"] = c.abcd;
    jc["active"] = c.active;
    conns.push_back(std::move(jc));
  }
  doc["connections"] = std::move(conns);
  if (schedule) {
    Json entries = Json::array();
    for (const ScheduleEntry& e : *schedule) entries.push_back(schedule_entry_to_json(e));
    doc["schedule"] = std::move(entries);
  }
  return doc;
}

LoadedNetwork network_from_json(const Json& doc) {
  const std::string kind = doc.at("kind").get<std::string>();
  const int inputs = doc.at("I").get<int>();
  const int hidden = doc.at("H").get<int>();
  const int outputs = doc.at("O").get<int>();

  NetworkTopology net;
  if (kind == "sbnn")
    net = build_sbnn_topology(inputs, hidden, outputs);
  else if (kind == "ffnn")
    net = build_ffnn_topology(inputs, hidden, outputs);
  else
    throw std::invalid_argument("unknown network kind: " + kind);

  const Json& conns = doc.at("connections");
  if (conns.size() != net.connections.size())
    throw std::invalid_argument("connection count does not match network shape");
  for (std::size_t i = 0; i < net.connections.size(); ++i) {
    const Json& jc = conns.at(i);
    Connection& c = net.connections[i];
    const int src = jc.at("src").get<int>();
    const int dst = jc.at("dst").get<int>();
    if (src != c.src.index || dst != c.dst.index)
      throw std::invalid_argument("connections are not in canonical order");
    c.weight = jc.at("weight").get<double>();
    if (jc.contains("abcd")) {
      const Json& abcd = jc.at("abcd");
      if (abcd.size() != 4) throw std::invalid_argument("abcd must have 4 entries");
      for (std::size_t k = 0; k < 4; ++k) c.abcd[k] = abcd.at(k).get<double>();
    }
    c.active = jc.at("active").get<bool>();
  }

  LoadedNetwork out{std::move(net), {}, false};
  if (doc.contains("schedule")) {
    for (const Json& e : doc.at("schedule"))
      out.schedule.push_back(schedule_entry_from_json(e, out.net));
    out.has_schedule = true;
  }
  return out;
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f.good()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_json(const std::filesystem::path& path, const Json& doc) {
  atomic_write_text(path, doc.dump(2) + "\n");
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  Json doc;
  f >> doc;
  return doc;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace sbnn
