#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "topent/json_codec.hpp"

namespace topent {

// A loaded system: exactly one of the two tracks is populated.
struct SystemSource {
  std::string label;
  std::optional<FiniteSystem> finite;
  std::optional<SftSpec> sft;
  std::map<std::string, std::vector<int>> finite_subsets;               // name -> indices
  std::map<std::string, std::vector<std::vector<int>>> sft_subsets;     // name -> cylinder words

  bool symbolic() const { return sft.has_value(); }
};

namespace detail_io {

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline int symbol_index(const std::vector<std::string>& alphabet, const std::string& s) {
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    if (alphabet[i] == s) return static_cast<int>(i);
  throw config_error("unknown symbol: " + s);
}

// A word is either a JSON array of symbols or, when every symbol is a single
// character, a plain string.
inline std::vector<int> parse_word(const std::vector<std::string>& alphabet, const Json& w) {
  std::vector<int> out;
  if (w.is_string()) {
    bool single = true;
    for (const auto& s : alphabet) single = single && s.size() == 1;
    if (!single)
      throw config_error("string-form words need a single-character alphabet; use arrays");
    for (char c : w.get<std::string>()) out.push_back(symbol_index(alphabet, std::string(1, c)));
    return out;
  }
  for (const auto& s : w) out.push_back(symbol_index(alphabet, s.get<std::string>()));
  return out;
}

inline SystemSource parse_sft_document(const Json& j, const std::string& label) {
  SystemSource src;
  src.label = label;
  auto alphabet = j.at("alphabet").get<std::vector<std::string>>();
  if (j.contains("transitions")) {
    src.sft = SftSpec::from_matrix(alphabet, j.at("transitions").get<std::vector<std::vector<int>>>());
  } else if (j.contains("forbidden")) {
    std::vector<std::vector<int>> words;
    for (const auto& w : j.at("forbidden")) words.push_back(parse_word(alphabet, w));
    src.sft = SftSpec::from_forbidden(alphabet, std::move(words));
  } else {
    throw config_error("SFT document needs either 'transitions' or 'forbidden'");
  }
  if (j.contains("subsets"))
    for (const auto& [name, words] : j.at("subsets").items()) {
      std::vector<std::vector<int>> parsed;
      for (const auto& w : words) parsed.push_back(parse_word(alphabet, w));
      src.sft_subsets[name] = std::move(parsed);
    }
  return src;
}

inline SystemSource parse_finite_document(const Json& j, const std::string& label) {
  SystemSource src;
  src.label = label;
  src.finite = system_from_json(j);
  if (j.contains("subsets"))
    for (const auto& [name, pts] : j.at("subsets").items())
      src.finite_subsets[name] = subset_from_json(*src.finite, pts);
  return src;
}

inline bool parse_int_suffix(const std::string& name, const std::string& prefix, int& out) {
  if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return false;
  const std::string tail = name.substr(prefix.size());
  for (char c : tail)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  out = std::stoi(tail);
  return true;
}

}  // namespace detail_io

struct BuiltinOptions {
  int truncation_depth = 8;             // depth used when a shift must become finite
  int extension_cap_depth = 64;         // guard for example_extension fibers
};

// Built-in systems: full2, full3, goldenmean, identity_<k>, cycle_<k>, and
// example_extension(<shift>,<depth>) over a truncated built-in shift.
inline std::optional<SystemSource> builtin_system(const std::string& name,
                                                  const BuiltinOptions& opt = {}) {
  SystemSource src;
  src.label = name;
  if (name == "full2" || name == "full3") {
    src.sft = SftSpec::full_shift(name == "full2" ? 2 : 3);
    return src;
  }
  if (name == "goldenmean") {
    src.sft = SftSpec::from_forbidden({"0", "1"}, {{1, 1}});
    return src;
  }
  int k = 0;
  if (detail_io::parse_int_suffix(name, "identity_", k)) {
    if (k < 1) throw config_error("identity_<k> needs k >= 1");
    std::vector<std::string> names;
    std::vector<int> step;
    for (int i = 0; i < k; ++i) {
      names.push_back("p" + std::to_string(i));
      step.push_back(i);
    }
    std::vector<double> tri(static_cast<std::size_t>(k) * (k - 1) / 2, 1.0);
    src.finite = FiniteSystem::from_table(std::move(names), std::move(tri), std::move(step),
                                          /*validate_triangle=*/false);
    return src;
  }
  if (detail_io::parse_int_suffix(name, "cycle_", k)) {
    if (k < 1) throw config_error("cycle_<k> needs k >= 1");
    std::vector<std::string> names;
    std::vector<int> step;
    std::vector<double> tri;
    for (int i = 0; i < k; ++i) {
      names.push_back("p" + std::to_string(i));
      step.push_back((i + 1) % k);
    }
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        tri.push_back(static_cast<double>(std::min(j - i, k - (j - i))));
    src.finite = FiniteSystem::from_table(std::move(names), std::move(tri), std::move(step),
                                          /*validate_triangle=*/false);
    return src;
  }
  if (name.rfind("example_extension(", 0) == 0 && name.back() == ')') {
    const std::string inner = name.substr(18, name.size() - 19);
    const auto comma = inner.find(',');
    if (comma == std::string::npos)
      throw config_error("expected example_extension(<system>,<depth>)");
    const std::string base_name = inner.substr(0, comma);
    const int depth = std::stoi(inner.substr(comma + 1));
    if (depth < 1 || depth > opt.extension_cap_depth)
      throw config_error("extension depth out of range");
    auto base = builtin_system(base_name, opt);
    if (!base || !base->sft)
      throw config_error("example_extension needs a built-in shift as its base");
    const FiniteSystem x = truncate_shift(*base->sft, opt.truncation_depth);
    ExtensionResult ext = example_extension(x, depth);
    src.finite = ext.system;
    src.finite_subsets["embedded"] = ext.embedded.members();
    return src;
  }
  return std::nullopt;
}

// Resolve a --system argument: a built-in name or a path to a JSON document.
inline SystemSource load_system(const std::string& name_or_path, const BuiltinOptions& opt = {}) {
  if (auto b = builtin_system(name_or_path, opt)) return *b;
  const Json j = detail_io::read_json_file(name_or_path);
  if (j.contains("alphabet")) return detail_io::parse_sft_document(j, name_or_path);
  return detail_io::parse_finite_document(j, name_or_path);
}

// Subset lookup with "all" meaning the whole space on either track.
inline SubsetRef resolve_finite_subset(const SystemSource& src, const std::string& name) {
  if (!src.finite) throw config_error("system has no finite track");
  if (name == "all") return SubsetRef::whole(*src.finite);
  auto it = src.finite_subsets.find(name);
  if (it == src.finite_subsets.end())
    throw config_error("unknown subset '" + name + "' in system " + src.label);
  return SubsetRef(*src.finite, it->second);
}

inline SymbolicSubset resolve_symbolic_subset(const SystemSource& src, const std::string& name) {
  if (!src.sft) throw config_error("system has no symbolic track");
  if (name == "all") return SymbolicSubset::whole();
  auto it = src.sft_subsets.find(name);
  if (it == src.sft_subsets.end())
    throw config_error("unknown subset '" + name + "' in system " + src.label);
  return SymbolicSubset::cylinders(*src.sft, it->second);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write file: " + path);
  out << content;
}

inline void write_json_file(const std::string& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace topent
