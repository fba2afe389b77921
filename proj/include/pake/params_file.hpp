#pragma once

// Parameter-set files: one key=value per line, keys p, q, g, h, name.
// Numeric values are lowercase hex; h may be omitted and is then derived from g.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "pake/group.hpp"

namespace pake {

struct ParsedParams {
  ParamsCandidate candidate;
  bool has_h = false;
};

inline ParsedParams parse_params_text(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::ParamFile, "line " + std::to_string(line_no) + ": missing '='");
    std::string key(line.substr(0, eq));
    std::string value(line.substr(eq + 1));
    if (key != "p" && key != "q" && key != "g" && key != "h" && key != "name")
      throw Error(Errc::ParamFile, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (key != "name" && !is_lower_hex(value))
      throw Error(Errc::ParamFile, "line " + std::to_string(line_no) + ": value for '" + key + "' is not lowercase hex");
    if (key == "name" && (value.empty() || value.find_first_of(" \t") != std::string::npos))
      throw Error(Errc::ParamFile, "line " + std::to_string(line_no) + ": bad name");
    if (!kv.emplace(key, std::move(value)).second)
      throw Error(Errc::ParamFile, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  for (const char* required : {"p", "q", "g", "name"})
    if (!kv.contains(required)) throw Error(Errc::ParamFile, std::string("missing key '") + required + "'");

  ParsedParams out;
  out.candidate.name = kv["name"];
  out.candidate.p = from_hex(kv["p"]);
  out.candidate.q = from_hex(kv["q"]);
  out.candidate.g = from_hex(kv["g"]);
  if (auto it = kv.find("h"); it != kv.end()) {
    out.candidate.h = from_hex(it->second);
    out.has_h = true;
  }
  return out;
}

/// Parses and validates; derives h when the file omits it.
inline Group load_params_text(std::string_view text) {
  ParsedParams parsed = parse_params_text(text);
  if (!parsed.has_h) parsed.candidate.h = derive_h(parsed.candidate.g, parsed.candidate.p, parsed.candidate.q);
  return validate_params(parsed.candidate);
}

inline std::string format_params(const GroupParams& params) {
  std::ostringstream os;
  os << "name=" << params.name << '\n'
     << "p=" << to_hex(params.p) << '\n'
     << "q=" << to_hex(params.q) << '\n'
     << "g=" << to_hex(params.g) << '\n'
     << "h=" << to_hex(params.h) << '\n';
  return os.str();
}

/// A built-in set name, or else a path to a parameter file.
inline Group load_params(const std::string& name_or_path) {
  if (name_or_path == "toy23" || name_or_path == "modp2048") return Group::builtin(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw Error(Errc::UnknownParamSet, "not a built-in set and cannot open '" + name_or_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_params_text(buf.str());
}

}  // namespace pake
