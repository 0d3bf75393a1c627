//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_DATASET_HPP_
#define STGG_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stgg/hash.hpp"
#include "stgg/molgraph.hpp"
#include "stgg/properties.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

/// One corpus molecule with its raw property values (spec order).
struct Record {
  int line_number = 0;
  std::string smiles;
  MolGraph graph;
  RawProperties raw;
};

/// Header names and rows of a property CSV. Empty cells are missing.
struct PropertyTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

/// Throws DataError naming the 1-based data row (header excluded) of any
/// non-numeric cell or ragged row.
PropertyTable read_property_csv(const std::filesystem::path &path);
void write_property_csv(const std::filesystem::path &path,
                        const PropertyTable &table);

struct ParseFailure {
  int line_number = 0;
  std::string message;
};

struct LoadedCorpus {
  std::vector<Record> records;
  std::vector<ParseFailure> failures;
};

/// Parses a SMILES file. Unparseable lines are collected in failures; throws
/// DataError when more than max_failure_rate of the lines fail. With a
/// property table, rows pair with SMILES lines in order (failed lines keep
/// their row) and the named columns are selected into Record::raw.
LoadedCorpus load_corpus(const std::filesystem::path &smiles,
                         const PropertyTable *props = nullptr,
                         std::span<const std::string> columns = {},
                         double max_failure_rate = 0.01);

enum class Split { kTrain, kValid, kTest };

/// Deterministic 90/5/5 split from a hash of the SMILES text.
Split split_of(const std::string &smiles);

/// Property declarations for the selected columns: continuous unless listed
/// in categorical, whose cardinality is one more than the largest id seen.
std::vector<PropertyDef> declare_properties(
    std::span<const std::string> columns, std::span<const Record> records,
    std::span<const std::string> categorical = {});

/// Fits mean/std on the train split of records.
PropertySpec fit_property_spec(std::span<const std::string> columns,
                               std::span<const Record> records,
                               std::span<const std::string> categorical,
                               bool standardize);

/// Synthetic corpus: uniform mask-engine rollouts decoded to graphs.
std::vector<MolGraph> generate_synthetic(const Vocab &seed_vocab, int n,
                                         int max_len, std::uint64_t seed);

/// Longest canonical encoding over the records.
int longest_encoding(std::span<const Record> records, const Vocab &v);

}  // namespace stgg

#endif  // STGG_DATASET_HPP_
