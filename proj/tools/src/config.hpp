//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_CLI_CONFIG_HPP_
#define STGG_CLI_CONFIG_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/properties.hpp"

namespace CLI {
class App;
}

namespace stgg::cli {

/// Appends the entries of the --config JSON file to args as flags. Keys are
/// long option names without dashes; options present in args win.
std::vector<std::string> merge_config_file(std::span<const std::string> args);

/// Every option of a parsed subcommand, with its final value.
nlohmann::json resolved_options(const CLI::App &sub);

/// "name=value" pairs to a standardized conditioning vector; properties not
/// named stay missing. Throws ArgumentError for unknown names or bad values.
PropertyVector parse_targets(std::span<const std::string> targets,
                             const PropertySpec &spec);

/// "name=value" pairs as (name, value).
std::vector<std::pair<std::string, double>>
split_targets(std::span<const std::string> targets);

/// Pretty JSON with a trailing newline. Throws FormatError on I/O failure.
void write_json(const std::filesystem::path &p, const nlohmann::json &j);
nlohmann::json read_json(const std::filesystem::path &p);

/// path with its extension replaced ("a/b.smi", ".csv" -> "a/b.csv").
std::filesystem::path with_extension(const std::filesystem::path &p,
                                     const std::string &ext);

/// Shortest text that parses back to x.
std::string number_text(double x);

}  // namespace stgg::cli

#endif  // STGG_CLI_CONFIG_HPP_
