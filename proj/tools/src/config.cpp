//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <CLI11.hpp>

#include "stgg/error.hpp"

namespace stgg::cli {

namespace {

bool given(std::span<const std::string> args, const std::string &flag) {
  for (const auto &a: args)
    if (a == flag || a.starts_with(flag + "="))
      return true;
  return false;
}

std::string scalar_text(const nlohmann::json &v) {
  if (v.is_string())
    return v.get<std::string>();
  if (v.is_number() || v.is_boolean())
    return v.dump();
  throw ArgumentError("config value " + v.dump() +
                      " must be a string, number or boolean");
}

nlohmann::json typed(const std::string &s) {
  if (s == "true")
    return true;
  if (s == "false")
    return false;
  long long i = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), i);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size())
    return i;
  double d = 0.0;
  r = std::from_chars(s.data(), s.data() + s.size(), d);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size())
    return d;
  return s;
}

}  // namespace

std::vector<std::string> merge_config_file(std::span<const std::string> args) {
  std::vector<std::string> out(args.begin(), args.end());
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      path = args[i + 1];
    else if (args[i].starts_with("--config="))
      path = args[i].substr(9);
  }
  if (path.empty())
    return out;
  const nlohmann::json j = read_json(path);
  if (!j.is_object())
    throw ArgumentError("config file " + path + " must hold a JSON object");
  for (const auto &[key, value]: j.items()) {
    if (key == "config")
      continue;
    const std::string flag = "--" + key;
    if (given(args, flag))
      continue;
    if (value.is_boolean()) {
      if (value.get<bool>())
        out.push_back(flag);
    } else if (value.is_array()) {
      if (value.empty())
        continue;
      out.push_back(flag);
      for (const auto &e: value)
        out.push_back(scalar_text(e));
    } else if (!value.is_null()) {
      out.push_back(flag);
      out.push_back(scalar_text(value));
    }
  }
  return out;
}

nlohmann::json resolved_options(const CLI::App &sub) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option *opt: sub.get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "help-all" ||
        name == "config")
      continue;
    if (opt->get_expected_min() == 0) {
      j[name] = opt->count() > 0;
      continue;
    }
    std::vector<std::string> vals = opt->results();
    const std::string def = opt->get_default_str();
    if (vals.empty() && !def.empty() && def != "{}" && def != "[]")
      vals = { def };
    if (opt->get_items_expected_max() > 1) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto &v: vals)
        arr.push_back(typed(v));
      j[name] = arr;
    } else if (vals.empty()) {
      j[name] = nullptr;
    } else {
      j[name] = typed(vals.back());
    }
  }
  return j;
}

std::vector<std::pair<std::string, double>>
split_targets(std::span<const std::string> targets) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto &t: targets) {
    const auto eq = t.find('=');
    double x = 0.0;
    const char *b = t.data() + eq + 1, *e = t.data() + t.size();
    if (eq == std::string::npos || eq == 0)
      throw ArgumentError("target '" + t + "' must look like name=value");
    const auto r = std::from_chars(b, e, x);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x))
      throw ArgumentError("target '" + t + "' has a non-numeric value");
    out.emplace_back(t.substr(0, eq), x);
  }
  return out;
}

PropertyVector parse_targets(std::span<const std::string> targets,
                             const PropertySpec &spec) {
  RawProperties raw(spec.size());
  for (const auto &[name, x]: split_targets(targets)) {
    const auto k = spec.find(name);
    if (!k)
      throw ArgumentError("model has no property '" + name + "'");
    raw[*k] = x;
  }
  return standardize(spec, raw);
}

void write_json(const std::filesystem::path &p, const nlohmann::json &j) {
  std::ofstream out(p);
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + p.string());
  out << j.dump(2) << '\n';
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "write failed: " + p.string());
}

nlohmann::json read_json(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed, p.string() + ": " + e.what());
  }
}

std::filesystem::path with_extension(const std::filesystem::path &p,
                                     const std::string &ext) {
  std::filesystem::path out = p;
  out.replace_extension(ext);
  return out;
}

std::string number_text(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

}  // namespace stgg::cli
