#include "vcd_reader.hpp"

#include <sstream>
#include <stdexcept>

namespace testsupport {

VcdFile VcdFile::parse(const std::string& text) {
  VcdFile f;
  std::istringstream in(text);
  std::vector<std::string> scopes;
  std::map<std::string, std::string> by_code;
  std::uint64_t now = 0;
  std::string tok;
  auto skip_to_end = [&] {
    std::string t;
    while (in >> t && t != "$end") {
    }
  };
  auto record = [&](const std::string& code, std::string bits) {
    auto it = by_code.find(code);
    if (it == by_code.end()) throw std::runtime_error("unknown id code " + code);
    VcdVar& v = f.vars[it->second];
    if (static_cast<int>(bits.size()) < v.width) bits.insert(0, static_cast<std::size_t>(v.width) - bits.size(), bits[0] == '1' ? '0' : bits[0]);
    v.changes.emplace_back(now, bits);
  };
  while (in >> tok) {
    if (tok == "$scope") {
      std::string kind, name;
      in >> kind >> name;
      scopes.push_back(name);
      skip_to_end();
    } else if (tok == "$upscope") {
      if (scopes.empty()) throw std::runtime_error("unbalanced $upscope");
      scopes.pop_back();
      skip_to_end();
    } else if (tok == "$var") {
      std::string type, code, name, t;
      int width = 0;
      in >> type >> width >> code >> name;
      while (in >> t && t != "$end") {
        if (t[0] != '[') name += t;  // drop bit-range suffixes
      }
      std::string path;
      for (std::size_t i = 1; i < scopes.size(); ++i) path += scopes[i] + ".";
      path += name;
      f.vars[path] = VcdVar{path, width, {}};
      by_code[code] = path;
    } else if (tok == "$timescale") {
      std::string t;
      while (in >> t && t != "$end") f.timescale += t;
    } else if (tok == "$dumpvars" || tok == "$end") {
      continue;
    } else if (tok[0] == '$') {
      skip_to_end();
    } else if (tok[0] == '#') {
      now = std::stoull(tok.substr(1));
    } else if (tok[0] == 'b' || tok[0] == 'B') {
      std::string code;
      in >> code;
      record(code, tok.substr(1));
    } else if (tok[0] == '0' || tok[0] == '1' || tok[0] == 'x' || tok[0] == 'z' || tok[0] == 'X' || tok[0] == 'Z') {
      record(tok.substr(1), std::string(1, static_cast<char>(std::tolower(tok[0]))));
    } else {
      throw std::runtime_error("unexpected VCD token " + tok);
    }
  }
  return f;
}

std::string VcdFile::value_at(const std::string& path, std::uint64_t time) const {
  auto it = vars.find(path);
  if (it == vars.end()) throw std::runtime_error("no VCD variable " + path);
  const std::string* v = nullptr;
  for (const auto& [t, bits] : it->second.changes) {
    if (t > time) break;
    v = &bits;
  }
  if (!v) throw std::runtime_error("no value for " + path);
  return *v;
}

}  // namespace testsupport
