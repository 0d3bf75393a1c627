//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "stgg/codec.hpp"
#include "stgg/dataset.hpp"
#include "stgg/error.hpp"
#include "stgg/metrics.hpp"
#include "stgg/smiles.hpp"
#include "stgg/vocab.hpp"

namespace stgg::cli {

namespace {

std::ofstream open_out(const std::filesystem::path &p) {
  std::ofstream f(p, std::ios::binary);
  if (!f)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + p.string());
  return f;
}

std::vector<std::string> read_lines(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + p.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    out.push_back(line);
  }
  return out;
}

}  // namespace

int build_vocab(const BuildVocabOptions &o, const Context &c) {
  std::optional<PropertyTable> table;
  if (!o.props.empty())
    table = read_property_csv(o.props);
  const std::vector<std::string> columns =
      !o.columns.empty() ? o.columns
      : table            ? table->columns
                         : std::vector<std::string>{};
  const LoadedCorpus corpus = load_corpus(o.data, table ? &*table : nullptr,
                                          columns, o.max_failure_rate);
  for (const auto &f: corpus.failures)
    *c.err << "warning: line " << f.line_number << ": " << f.message << "\n";

  std::vector<MolGraph> graphs;
  for (const auto &r: corpus.records)
    graphs.push_back(r.graph);
  const Vocab v = induce_vocab(graphs, o.r_max);
  const PropertySpec spec = fit_property_spec(columns, corpus.records,
                                              o.categorical, !o.no_standardize);

  nlohmann::json vj = v.to_json();
  vj["run_config"] = c.run_config;
  write_json(o.out, vj);
  const std::filesystem::path spec_out =
      o.spec_out.empty() ? with_extension(o.out, ".props.json")
                         : std::filesystem::path(o.spec_out);
  nlohmann::json sj = spec.to_json();
  sj["run_config"] = c.run_config;
  write_json(spec_out, sj);

  *c.out << "molecules: " << corpus.records.size() << " ("
         << corpus.failures.size() << " failed)\n";
  *c.out << "atom tokens: " << v.atom_count() << "\n";
  for (int i = 0; i < v.atom_count(); ++i)
    *c.out << "  " << v.token_text(v.first_atom_id() + i) << " valency "
           << v.atom_token(v.first_atom_id() + i).max_valency << "\n";
  *c.out << "longest encoding: " << longest_encoding(corpus.records, v) << "\n";
  *c.out << "properties: " << spec.size() << "\n";
  *c.out << "wrote " << o.out << " and " << spec_out.string() << "\n";
  return 0;
}

int gen_synth(const GenSynthOptions &o, const Context &c) {
  const Vocab seed_vocab = load_vocab(o.vocab);
  const std::vector<MolGraph> graphs =
      generate_synthetic(seed_vocab, o.n, o.max_len, c.seed);

  std::ofstream smi = open_out(o.out);
  PropertyTable t;
  t.columns.assign(std::begin(kSurrogateProperties),
                   std::end(kSurrogateProperties));
  for (const auto &g: graphs) {
    smi << write_smiles(g) << '\n';
    std::vector<std::optional<double>> row;
    for (const auto &name: t.columns)
      row.emplace_back(surrogate_property(name, g));
    t.rows.push_back(std::move(row));
  }
  smi.close();
  if (!smi)
    throw FormatError(FormatErrorKind::kIo, "write failed: " + o.out);
  const std::filesystem::path props =
      o.props_out.empty() ? with_extension(o.out, ".csv")
                          : std::filesystem::path(o.props_out);
  write_property_csv(props, t);
  write_json(o.out + ".config.json", c.run_config);
  *c.out << "wrote " << graphs.size() << " molecules to " << o.out << " and "
         << props.string() << "\n";
  return 0;
}

int encode(const EncodeOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  std::vector<std::string> inputs = o.smiles;
  if (!o.data.empty())
    for (const auto &l: read_smiles_file(o.data))
      inputs.push_back(l.smiles);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Traversal t = o.random_order
                            ? Traversal::randomized(derive_seed(c.seed, i))
                            : Traversal::canonical();
    *c.out << to_text(encode(parse_smiles(inputs[i]), v, t), v) << '\n';
  }
  return 0;
}

int decode(const DecodeOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  std::vector<std::string> inputs = o.sequences;
  if (!o.data.empty())
    for (auto &l: read_lines(o.data))
      if (!l.empty())
        inputs.push_back(std::move(l));
  for (const auto &s: inputs)
    *c.out << write_smiles(decode(from_text(s, v), v)) << '\n';
  return 0;
}

int roundtrip_check(const RoundtripOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  const LoadedCorpus corpus = load_corpus(o.data, nullptr, {}, 1.0);
  long checks = 0, failures = 0, unencodable = 0;
  nlohmann::json examples = nlohmann::json::array();
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const Record &r = corpus.records[i];
    for (int s = -1; s < o.seeds; ++s) {
      const Traversal t =
          s < 0 ? Traversal::canonical()
                : Traversal::randomized(
                      derive_seed(derive_seed(c.seed, i), static_cast<std::uint64_t>(s)));
      TokenSeq seq;
      try {
        seq = encode(r.graph, v, t);
      } catch (const EncodeError &) {
        ++unencodable;
        break;
      }
      ++checks;
      bool ok = false;
      try {
        ok = is_isomorphic(decode(seq, v), r.graph);
      } catch (const DecodeError &) {
      }
      if (!ok) {
        ++failures;
        if (examples.size() < 10)
          examples.push_back({ { "line", r.line_number },
                               { "smiles", r.smiles },
                               { "tokens", to_text(seq, v) } });
      }
    }
  }
  const nlohmann::json report = { { "format", "stgg-roundtrip-report" },
                                  { "version", 1 },
                                  { "molecules", corpus.records.size() },
                                  { "parse_failures", corpus.failures.size() },
                                  { "unencodable", unencodable },
                                  { "checks", checks },
                                  { "failures", failures },
                                  { "failed_examples", examples },
                                  { "run_config", c.run_config } };
  *c.out << report.dump(2) << '\n';
  if (failures > 0) {
    *c.err << failures << " round-trip failures\n";
    return 3;
  }
  return 0;
}

int evaluate(const EvaluateOptions &o, const Context &c) {
  std::vector<Sample> samples;
  std::size_t line_no = 0;
  for (const auto &line: read_lines(o.samples)) {
    ++line_no;
    if (line.empty())
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw DataError(o.samples + ": line " + std::to_string(line_no) +
                      ": " + e.what());
    }
    if (j.contains("format"))
      continue;  // header record
    // Sampler records nest the chosen molecule under "best".
    const nlohmann::json &rec = j.contains("best") && j["best"].is_object()
                                    ? j["best"]
                                    : j;
    const auto it = rec.find("smiles");
    if (it == rec.end() || !it->is_string()) {
      samples.emplace_back();
      continue;
    }
    try {
      samples.emplace_back(parse_smiles(it->get<std::string>()));
    } catch (const SmilesError &) {
      samples.emplace_back();
    }
  }
  const LoadedCorpus train = load_corpus(o.train, nullptr, {}, 1.0);
  std::vector<MolGraph> graphs;
  for (const auto &r: train.records)
    graphs.push_back(r.graph);
  const EfficiencyReport eff =
      generative_efficiency(samples, ReferenceSet(graphs));

  nlohmann::json report = { { "format", "stgg-eval-report" },
                            { "version", 1 },
                            { "efficiency", eff.to_json() } };
  if (eff.valid >= 2)
    report["internal_diversity"] = internal_diversity(samples);
  else
    report["internal_diversity"] = nullptr;
  nlohmann::json mae = nlohmann::json::object();
  for (const auto &[name, x]: split_targets(o.targets)) {
    const double m = min_mae(samples, x, name);
    mae[name + "=" + number_text(x)] =
        std::isfinite(m) ? nlohmann::json(m) : nlohmann::json(nullptr);
  }
  report["min_mae"] = mae;
  report["reference_molecules"] = graphs.size();
  report["run_config"] = c.run_config;
  if (o.out.empty())
    *c.out << report.dump(2) << '\n';
  else
    write_json(o.out, report);
  return 0;
}

}  // namespace stgg::cli
