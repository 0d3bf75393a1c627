//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <fstream>

#include "commands.hpp"
#include "config.hpp"
#include "stgg/checkpoint.hpp"
#include "stgg/codec.hpp"
#include "stgg/dataset.hpp"
#include "stgg/error.hpp"
#include "stgg/sampler.hpp"
#include "stgg/smiles.hpp"
#include "stgg/trainer.hpp"

namespace stgg::cli {

namespace {

nlohmann::json header(const std::string &format, const nlohmann::json &cfg) {
  return { { "format", format }, { "version", 1 }, { "run_config", cfg } };
}

nlohmann::json raw_to_json(const PropertySpec &spec, const RawProperties &raw) {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < spec.size(); ++i)
    j[spec.defs()[i].name] = raw[i] ? nlohmann::json(*raw[i]) : nlohmann::json();
  return j;
}

}  // namespace

int train(const TrainOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  std::optional<PropertyTable> table;
  if (!o.props.empty())
    table = read_property_csv(o.props);

  std::optional<Checkpoint> resume;
  if (!o.resume.empty())
    resume = load_checkpoint(o.resume, &v);

  std::optional<PropertySpec> loaded;
  if (resume)
    loaded = resume->spec;
  else if (!o.spec.empty())
    loaded = load_property_spec(o.spec);
  std::vector<std::string> columns = o.columns;
  if (loaded) {
    std::vector<std::string> names;
    for (const auto &d: loaded->defs())
      names.push_back(d.name);
    if (!columns.empty() && columns != names)
      throw ArgumentError("--columns disagrees with the property spec");
    columns = names;
  }

  const LoadedCorpus corpus = load_corpus(o.data, table ? &*table : nullptr,
                                          columns, o.max_failure_rate);
  for (const auto &f: corpus.failures)
    *c.err << "warning: line " << f.line_number << ": " << f.message << "\n";
  std::vector<Record> train_set;
  for (const auto &r: corpus.records)
    if (split_of(r.smiles) == Split::kTrain)
      train_set.push_back(r);
  if (train_set.empty())
    throw DataError("no molecules in the train split of " + o.data);

  PropertySpec spec =
      loaded ? *loaded
             : fit_property_spec(columns, corpus.records, o.categorical,
                                 !o.no_standardize);
  if (o.no_standardize && spec.standardizes())
    spec = PropertySpec(std::vector<PropertyDef>(spec.defs().begin(),
                                                 spec.defs().end()),
                        false);

  ModelConfig mcfg;
  if (resume) {
    mcfg = resume->config;
  } else {
    const int longest = longest_encoding(train_set, v);
    const int max_len =
        o.max_len > 0 ? o.max_len : static_cast<int>(std::ceil(1.5 * longest));
    mcfg = ModelConfig::for_vocab(v, spec, max_len);
    mcfg.d_model = o.d_model;
    mcfg.n_layers = o.layers;
    mcfg.n_heads = o.heads;
    mcfg.legacy_arch = o.legacy_arch;
    mcfg.single_layer_prop_encoder = o.single_layer_prop_encoder;
  }

  TrainConfig tcfg;
  tcfg.lr = o.lr;
  tcfg.weight_decay = o.weight_decay;
  tcfg.epochs = o.epochs;
  tcfg.batch_size = o.batch_size;
  tcfg.warmup_steps = o.warmup;
  tcfg.seed = c.seed;
  tcfg.lambda_prop = o.no_prop_loss ? 0.0 : o.lambda_prop;
  tcfg.augment_random_order = !o.no_random_order;
  tcfg.grad_clip = o.grad_clip;

  nlohmann::json run_config = c.run_config;
  run_config["resolved"] = { { "model", mcfg.to_json() },
                             { "train", tcfg.to_json() },
                             { "property_spec", spec.to_json() },
                             { "train_molecules", train_set.size() } };

  std::ofstream log;
  if (!o.log.empty()) {
    log.open(o.log);
    if (!log)
      throw FormatError(FormatErrorKind::kIo, "cannot write " + o.log);
    log << header("stgg-train-log", run_config).dump() << '\n';
  }
  *c.err << "training on " << train_set.size() << " molecules, max_len "
         << mcfg.max_len << "\n";

  Checkpoint init;
  if (resume)
    init = *resume;
  const TrainResult res = stgg::train(
      mcfg, train_set, v, spec, tcfg,
      [&](const EpochStats &s) {
        const std::string line = s.to_json().dump();
        *c.out << line << '\n';
        if (log.is_open())
          log << line << std::endl;
      },
      resume ? &init : nullptr);

  Checkpoint out;
  out.config = mcfg;
  out.spec = spec;
  out.vocab_digest = v.digest();
  out.run_config = run_config;
  out.params = res.params;
  out.optimizer = res.optimizer;
  save_checkpoint(o.out, out);
  *c.err << "wrote " << o.out << "\n";
  return 0;
}

int sample(const SampleOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  const Checkpoint ck = load_checkpoint(o.model, &v);
  const Sampler sampler(ck.params, ck.config, v, ck.spec);

  SampleRequest req;
  req.target = parse_targets(o.targets, ck.spec);
  req.guidance = o.w_uniform.empty()
                     ? GuidanceMode::fixed(o.w)
                     : GuidanceMode::random(o.w_uniform.at(0), o.w_uniform.at(1));
  req.guidance.validate();
  req.k = o.k;
  req.temperature = o.temperature;
  req.max_len = o.max_len;

  std::ofstream file;
  std::ostream *out = c.out;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file)
      throw FormatError(FormatErrorKind::kIo, "cannot write " + o.out);
    out = &file;
  }
  *out << header("stgg-samples", c.run_config).dump() << '\n';
  for (int i = 0; i < o.n; ++i) {
    req.seed = derive_seed(c.seed, static_cast<std::uint64_t>(i));
    const SampleResult r = sampler.sample_best_of_k(req, {}, o.threads);
    auto candidate = [&](const Candidate &cand) {
      return nlohmann::json {
        { "smiles", write_smiles(cand.graph) },
        { "tokens", to_text(cand.tokens, v) },
        { "predicted_props",
          raw_to_json(ck.spec, destandardize(ck.spec, cand.predicted)) },
        { "w", cand.w },
        { "self_score", cand.self_score }
      };
    };
    nlohmann::json cands = nlohmann::json::array();
    for (const Candidate &cand: r.candidates)
      cands.push_back(candidate(cand));
    const nlohmann::json rec = {
      { "index", i },
      { "target", raw_to_json(ck.spec, destandardize(ck.spec, req.target)) },
      { "k", req.k },
      { "w_mode", req.guidance.to_json() },
      { "best_index", r.best },
      { "best", candidate(r.best_candidate()) },
      { "candidates", std::move(cands) }
    };
    *out << rec.dump() << '\n';
  }
  if (file.is_open()) {
    file.close();
    if (!file)
      throw FormatError(FormatErrorKind::kIo, "write failed: " + o.out);
  }
  return 0;
}

int predict(const PredictOptions &o, const Context &c) {
  const Vocab v = load_vocab(o.vocab);
  const Checkpoint ck = load_checkpoint(o.model, &v);
  const Sampler sampler(ck.params, ck.config, v, ck.spec);
  const LoadedCorpus corpus = load_corpus(o.data);

  std::ofstream file;
  std::ostream *out = c.out;
  if (!o.out.empty()) {
    file.open(o.out);
    if (!file)
      throw FormatError(FormatErrorKind::kIo, "cannot write " + o.out);
    out = &file;
  }
  *out << "line,smiles";
  for (const auto &d: ck.spec.defs())
    *out << ',' << d.name;
  *out << '\n';
  for (const auto &r: corpus.records) {
    *out << r.line_number << ',' << r.smiles;
    const TokenSeq t = encode(r.graph, v);
    RawProperties raw(ck.spec.size());
    if (static_cast<int>(t.size()) <= ck.config.max_len)
      raw = sampler.self_predict_raw(t);
    else
      *c.err << "warning: line " << r.line_number
             << " is longer than the model's max_len\n";
    for (const auto &x: raw) {
      *out << ',';
      if (x)
        *out << number_text(*x);
    }
    *out << '\n';
  }
  return 0;
}

}  // namespace stgg::cli
