#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rtlmend/error.hpp"
#include "rtlmend/sim.hpp"

namespace rtlmend {

void Trace::index() {
  by_path_.clear();
  for (const auto& s : signals) by_path_.emplace(s.path, s.slot);
}

int Trace::slot(const std::string& path) const {
  auto it = by_path_.find(path);
  return it == by_path_.end() ? -1 : it->second;
}

Value Trace::query(const std::string& path, std::size_t time) const {
  int s = slot(path);
  if (s < 0) throw UnknownSignal("signal '" + path + "' is not traced");
  if (cycles == 0 || time > horizon())
    throw TimeBeyondHorizon("time " + std::to_string(time) + " is beyond horizon " +
                            std::to_string(horizon()));
  return at(s, time);
}

std::vector<std::pair<std::size_t, Value>> Trace::changes(int slot) const {
  std::vector<std::pair<std::size_t, Value>> out;
  for (std::size_t t = 0; t < cycles; ++t) {
    const Value& v = at(slot, t);
    if (out.empty() || !(out.back().second == v)) out.emplace_back(t, v);
  }
  return out;
}

nlohmann::json Trace::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& s : signals) {
    auto arr = nlohmann::json::array();
    for (const auto& [t, v] : changes(s.slot)) arr.push_back({t, v.to_binstring()});
    j[s.path] = std::move(arr);
  }
  return j;
}

Trace Trace::from_json(const nlohmann::json& j) {
  Trace t;
  std::size_t horizon = 0;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      throw MalformedLog("trace entry '" + it.key() + "' has no changes");
    for (const auto& e : it.value()) horizon = std::max(horizon, e.at(0).get<std::size_t>());
  }
  t.stride = j.size();
  t.cycles = j.empty() ? 0 : horizon + 1;
  t.post.assign(t.stride * t.cycles, Value{});
  int slot = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++slot) {
    const auto& arr = it.value();
    std::vector<std::pair<std::size_t, Value>> ch;
    for (const auto& e : arr) {
      auto v = Value::from_binstring(e.at(1).get<std::string>());
      if (!v) throw MalformedLog("bad value in trace entry '" + it.key() + "'");
      ch.emplace_back(e.at(0).get<std::size_t>(), *v);
    }
    if (ch.front().first != 0) throw MalformedLog("trace entry '" + it.key() + "' lacks time 0");
    t.signals.push_back({it.key(), ch.front().second.width, slot});
    std::size_t k = 0;
    for (std::size_t c = 0; c < t.cycles; ++c) {
      while (k + 1 < ch.size() && ch[k + 1].first <= c) ++k;
      t.post[c * t.stride + static_cast<std::size_t>(slot)] = ch[k].second;
    }
  }
  t.index();
  return t;
}

namespace {

std::string vcd_id(std::size_t n) {
  std::string id;
  do {
    id += static_cast<char>('!' + n % 94);
    n /= 94;
  } while (n);
  return id;
}

std::string vcd_value(const Value& v, const std::string& id) {
  if (v.width == 1) return std::string(1, v.xmask ? 'x' : (v.bits ? '1' : '0')) + id;
  return "b" + v.to_binstring() + " " + id;
}

struct ScopeNode {
  std::map<std::string, ScopeNode> children;
  std::vector<std::size_t> vars;  // indices into signals
};

void emit_scope(std::ostream& os, const ScopeNode& node, const std::vector<TraceSignal>& sigs,
                const std::vector<std::string>& leaf) {
  for (std::size_t i : node.vars)
    os << "$var wire " << sigs[i].width << ' ' << vcd_id(i) << ' ' << leaf[i] << " $end\n";
  for (const auto& [name, child] : node.children) {
    os << "$scope module " << name << " $end\n";
    emit_scope(os, child, sigs, leaf);
    os << "$upscope $end\n";
  }
}

}  // namespace

std::string Trace::to_vcd() const {
  std::ostringstream os;
  os << "$version rtlmend $end\n$timescale 1ns $end\n";
  ScopeNode root;
  std::vector<std::string> leaf(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const std::string& p = signals[i].path;
    ScopeNode* node = &root;
    std::size_t start = 0;
    std::size_t bracket = p.find('[');
    for (;;) {
      std::size_t dot = p.find('.', start);
      if (dot == std::string::npos || (bracket != std::string::npos && dot > bracket)) break;
      node = &node->children[p.substr(start, dot - start)];
      start = dot + 1;
    }
    leaf[i] = p.substr(start);
    node->vars.push_back(i);
  }
  os << "$scope module top $end\n";
  emit_scope(os, root, signals, leaf);
  os << "$upscope $end\n$enddefinitions $end\n";
  for (std::size_t t = 0; t < cycles; ++t) {
    std::ostringstream changes;
    for (std::size_t i = 0; i < signals.size(); ++i) {
      const Value& v = at(signals[i].slot, t);
      if (t == 0 || !(at(signals[i].slot, t - 1) == v)) changes << vcd_value(v, vcd_id(i)) << '\n';
    }
    std::string c = changes.str();
    if (t == 0) {
      os << "#0\n$dumpvars\n" << c << "$end\n";
    } else if (!c.empty()) {
      os << '#' << t << '\n' << c;
    }
  }
  return os.str();
}

void Trace::export_vcd(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_vcd();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace rtlmend
