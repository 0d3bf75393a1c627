//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stgg/codec.hpp"
#include "stgg/error.hpp"
#include "stgg/mask_engine.hpp"
#include "stgg/smiles.hpp"

namespace stgg {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos
                                          : comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

std::string format_number(double x) {
  // Shortest representation that round-trips.
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace

PropertyTable read_property_csv(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  PropertyTable t;
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ": missing header row");
  t.columns = split_csv(line);
  for (const auto &c: t.columns)
    if (c.empty())
      throw DataError(path.string() + ": empty column name in header");
  int row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty())
      continue;
    ++row;
    const auto cells = split_csv(line);
    if (cells.size() != t.columns.size())
      throw DataError(path.string() + ": row " + std::to_string(row) +
                      " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(t.columns.size()));
    std::vector<std::optional<double>> values;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string &c = cells[i];
      if (c.empty()) {
        values.emplace_back();
        continue;
      }
      double x = 0.0;
      const auto r = std::from_chars(c.data(), c.data() + c.size(), x);
      if (r.ec != std::errc() || r.ptr != c.data() + c.size() ||
          !std::isfinite(x))
        throw DataError(path.string() + ": row " + std::to_string(row) +
                        ", column '" + t.columns[i] + "': '" + c +
                        "' is not a number");
      values.emplace_back(x);
    }
    t.rows.push_back(std::move(values));
  }
  return t;
}

void write_property_csv(const std::filesystem::path &path,
                        const PropertyTable &table) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + path.string());
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto &row: table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out << ',';
      if (row[i])
        out << format_number(*row[i]);
    }
    out << '\n';
  }
}

LoadedCorpus load_corpus(const std::filesystem::path &smiles,
                         const PropertyTable *props,
                         std::span<const std::string> columns,
                         double max_failure_rate) {
  const std::vector<SmilesLine> lines = read_smiles_file(smiles);
  if (props && props->rows.size() != lines.size())
    throw DataError("property table has " + std::to_string(props->rows.size()) +
                    " rows but " + smiles.string() + " has " +
                    std::to_string(lines.size()) + " molecules");

  // Column index into the table, or -1 for a graph-computed surrogate.
  std::vector<int> col;
  for (const auto &name: columns) {
    int idx = -1;
    if (props) {
      const auto it =
          std::find(props->columns.begin(), props->columns.end(), name);
      if (it != props->columns.end())
        idx = static_cast<int>(it - props->columns.begin());
    }
    if (idx < 0 && !is_surrogate_property(name))
      throw DataError("no property column '" + name + "'");
    col.push_back(idx);
  }

  LoadedCorpus c;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Record r;
    r.line_number = lines[i].line_number;
    r.smiles = lines[i].smiles;
    try {
      r.graph = parse_smiles(r.smiles);
    } catch (const SmilesError &e) {
      c.failures.push_back({ r.line_number, e.what() });
      continue;
    }
    for (std::size_t k = 0; k < col.size(); ++k)
      r.raw.push_back(col[k] >= 0
                          ? props->rows[i][col[k]]
                          : std::optional<double>(
                                surrogate_property(columns[k], r.graph)));
    c.records.push_back(std::move(r));
  }
  if (!lines.empty() &&
      static_cast<double>(c.failures.size()) >
          max_failure_rate * static_cast<double>(lines.size())) {
    std::ostringstream msg;
    msg << c.failures.size() << " of " << lines.size() << " lines in "
        << smiles.string() << " failed to parse";
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures.size(), 5);
         ++i)
      msg << "\n  line " << c.failures[i].line_number << ": "
          << c.failures[i].message;
    throw DataError(msg.str());
  }
  return c;
}

Split split_of(const std::string &smiles) {
  const std::uint64_t h = fnv1a64(smiles) % 100;
  if (h < 90)
    return Split::kTrain;
  return h < 95 ? Split::kValid : Split::kTest;
}

std::vector<PropertyDef> declare_properties(
    std::span<const std::string> columns, std::span<const Record> records,
    std::span<const std::string> categorical) {
  std::vector<PropertyDef> defs;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    PropertyDef d;
    d.name = columns[k];
    if (std::find(categorical.begin(), categorical.end(), d.name) !=
        categorical.end()) {
      d.kind = PropertyKind::kCategorical;
      int top = -1;
      for (const auto &r: records) {
        if (!r.raw.at(k))
          continue;
        const double x = *r.raw[k];
        if (x < 0 || x != std::floor(x) || x > 1e6)
          throw DataError("line " + std::to_string(r.line_number) +
                          ": categorical '" + d.name +
                          "' needs a non-negative integer, got " +
                          format_number(x));
        top = std::max(top, static_cast<int>(x));
      }
      d.cardinality = std::max(1, top + 1);
    }
    defs.push_back(std::move(d));
  }
  for (const auto &name: categorical)
    if (std::find(columns.begin(), columns.end(), name) == columns.end())
      throw ArgumentError("categorical property '" + name +
                          "' is not a selected column");
  return defs;
}

PropertySpec fit_property_spec(std::span<const std::string> columns,
                               std::span<const Record> records,
                               std::span<const std::string> categorical,
                               bool standardize) {
  std::vector<RawProperties> train_rows;
  for (const auto &r: records)
    if (split_of(r.smiles) == Split::kTrain)
      train_rows.push_back(r.raw);
  return PropertySpec::fit(declare_properties(columns, records, categorical),
                           train_rows, standardize);
}

std::vector<MolGraph> generate_synthetic(const Vocab &seed_vocab, int n,
                                         int max_len, std::uint64_t seed) {
  if (n < 0)
    throw ArgumentError("n must be >= 0");
  std::vector<MolGraph> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    out.push_back(decode(rollout_uniform(seed_vocab, max_len, rng), seed_vocab));
  }
  return out;
}

int longest_encoding(std::span<const Record> records, const Vocab &v) {
  int best = 0;
  for (const auto &r: records)
    best = std::max(best, static_cast<int>(encode(r.graph, v).size()));
  return best;
}

}  // namespace stgg
