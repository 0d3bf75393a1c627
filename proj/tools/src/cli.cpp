//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg_cli/cli.hpp"

#include <algorithm>
#include <functional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "stgg/error.hpp"

namespace stgg::cli {

namespace {

struct AllOptions {
  BuildVocabOptions build_vocab;
  GenSynthOptions gen_synth;
  TrainOptions train;
  SampleOptions sample;
  EvaluateOptions evaluate;
  PredictOptions predict;
  EncodeOptions encode;
  DecodeOptions decode;
  RoundtripOptions roundtrip;
};

struct Command {
  CLI::App *app = nullptr;
  std::function<int(const Context &)> run;
};

CLI::App *add_command(CLI::App &root, const std::string &name,
                      const std::string &help, std::uint64_t &seed,
                      std::string &config) {
  CLI::App *sub = root.add_subcommand(name, help);
  sub->add_option("--seed", seed, "Random seed");
  sub->add_option("--config", config,
                  "JSON file of option values; command-line flags win");
  return sub;
}

void add_training_flags(CLI::App *s, TrainOptions &o) {
  s->add_option("--epochs", o.epochs)->check(CLI::NonNegativeNumber);
  s->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);
  s->add_option("--lr", o.lr)->check(CLI::PositiveNumber);
  s->add_option("--weight-decay", o.weight_decay)->check(CLI::NonNegativeNumber);
  s->add_option("--warmup", o.warmup, "Linear warmup steps")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--grad-clip", o.grad_clip, "Gradient-norm clip, 0 disables")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--lambda-prop", o.lambda_prop, "Property-loss weight")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--d-model", o.d_model)->check(CLI::PositiveNumber);
  s->add_option("--layers", o.layers)->check(CLI::PositiveNumber);
  s->add_option("--heads", o.heads)->check(CLI::PositiveNumber);
  s->add_option("--max-len", o.max_len,
                "Maximum sequence length; 0 = 1.5x the longest training "
                "encoding");
  s->add_option("--max-failure-rate", o.max_failure_rate);
  s->add_flag("--legacy-arch", o.legacy_arch,
              "LayerNorm, learned positions and GELU");
  s->add_flag("--no-random-order", o.no_random_order,
              "Canonical traversals only");
  s->add_flag("--no-standardize", o.no_standardize,
              "Condition on raw property values");
  s->add_flag("--no-prop-loss", o.no_prop_loss, "Drop the property loss");
  s->add_flag("--single-layer-prop-encoder", o.single_layer_prop_encoder,
              "Linear property encoder instead of the two-layer MLP");
}

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const ArgumentError *>(&e))
    return kExitUsage;
  if (dynamic_cast<const DataError *>(&e))
    return kExitData;
  return kExitInvariant;
}

}  // namespace

int run(std::span<const std::string> raw_args, std::ostream &out,
        std::ostream &err) {
  AllOptions o;
  std::uint64_t seed = 0;
  std::string config;

  CLI::App app("Spanning-tree molecule generation", "stgg");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every command");

  std::vector<Command> cmds;

  {
    auto &x = o.build_vocab;
    CLI::App *s = add_command(app, "build-vocab",
                              "Induce the token vocabulary and fit property "
                              "statistics",
                              seed, config);
    s->add_option("--data", x.data, "SMILES file")->required();
    s->add_option("--props", x.props, "Property CSV, one row per SMILES line");
    s->add_option("--out", x.out, "Vocabulary JSON");
    s->add_option("--spec-out", x.spec_out,
                  "Property spec JSON (default: <out>.props.json)");
    s->add_option("--columns", x.columns,
                  "Property columns (default: all CSV columns)")
        ->delimiter(',');
    s->add_option("--categorical", x.categorical, "Categorical columns")
        ->delimiter(',');
    s->add_option("--r-max", x.r_max, "Ring-close token count")
        ->check(CLI::PositiveNumber);
    s->add_option("--max-failure-rate", x.max_failure_rate);
    s->add_flag("--no-standardize", x.no_standardize);
    cmds.push_back({ s, [&](const Context &c) { return build_vocab(x, c); } });
  }
  {
    auto &x = o.gen_synth;
    CLI::App *s = add_command(app, "gen-synth",
                              "Sample a synthetic corpus with uniform rollouts",
                              seed, config);
    s->add_option("--vocab", x.vocab, "Seed vocabulary JSON")->required();
    s->add_option("--n", x.n)->check(CLI::NonNegativeNumber);
    s->add_option("--max-len", x.max_len)->check(CLI::PositiveNumber);
    s->add_option("--out", x.out, "SMILES output")->required();
    s->add_option("--props-out", x.props_out,
                  "Property CSV (default: <out> with .csv)");
    cmds.push_back({ s, [&](const Context &c) { return gen_synth(x, c); } });
  }
  {
    auto &x = o.train;
    CLI::App *s = add_command(app, "train", "Train a model", seed, config);
    s->add_option("--data", x.data, "SMILES file")->required();
    s->add_option("--props", x.props, "Property CSV");
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--spec", x.spec,
                  "Property spec JSON (default: fit on the train split)");
    s->add_option("--columns", x.columns, "Conditioning properties")
        ->delimiter(',');
    s->add_option("--categorical", x.categorical)->delimiter(',');
    s->add_option("--out", x.out, "Checkpoint");
    s->add_option("--log", x.log, "Per-epoch JSONL log");
    s->add_option("--resume", x.resume, "Continue from a checkpoint");
    add_training_flags(s, x);
    cmds.push_back({ s, [&](const Context &c) { return train(x, c); } });
  }
  {
    auto &x = o.sample;
    CLI::App *s = add_command(app, "sample", "Generate molecules", seed, config);
    s->add_option("--model", x.model, "Checkpoint")->required();
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--out", x.out, "JSONL output (default: stdout)");
    s->add_option("--target", x.targets, "Conditioning value name=value");
    s->add_option("--n", x.n, "Molecules to generate")
        ->check(CLI::NonNegativeNumber);
    auto *w = s->add_option("--w", x.w, "Guidance strength")
                  ->check(CLI::PositiveNumber);
    s->add_option("--w-uniform", x.w_uniform,
                  "Draw w uniformly from [LO, HI] per candidate")
        ->expected(2)
        ->excludes(w);
    s->add_option("--k", x.k, "Candidates per molecule; best self-score wins")
        ->check(CLI::PositiveNumber);
    s->add_option("--temperature", x.temperature)
        ->check(CLI::NonNegativeNumber);
    s->add_option("--max-len", x.max_len, "0 = the model's max_len");
    s->add_option("--threads", x.threads)->check(CLI::PositiveNumber);
    cmds.push_back({ s, [&](const Context &c) { return sample(x, c); } });
  }
  {
    auto &x = o.evaluate;
    CLI::App *s = add_command(app, "evaluate", "Score generated samples", seed,
                              config);
    s->add_option("--samples", x.samples, "Samples JSONL")->required();
    s->add_option("--train", x.train, "Training SMILES for novelty")
        ->required();
    s->add_option("--target", x.targets, "MinMAE target name=value");
    s->add_option("--out", x.out, "Report JSON (default: stdout)");
    cmds.push_back({ s, [&](const Context &c) { return evaluate(x, c); } });
  }
  {
    auto &x = o.predict;
    CLI::App *s = add_command(app, "predict",
                              "Property-head predictions for molecules", seed,
                              config);
    s->add_option("--model", x.model, "Checkpoint")->required();
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--data", x.data, "SMILES file")->required();
    s->add_option("--out", x.out, "CSV output (default: stdout)");
    cmds.push_back({ s, [&](const Context &c) { return predict(x, c); } });
  }
  {
    auto &x = o.encode;
    CLI::App *s = add_command(app, "encode", "SMILES to token sequences",
                              seed, config);
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--data", x.data, "SMILES file");
    s->add_option("smiles", x.smiles, "SMILES strings");
    s->add_flag("--random-order", x.random_order,
                "Random traversal seeded by --seed and the input index");
    cmds.push_back({ s, [&](const Context &c) { return encode(x, c); } });
  }
  {
    auto &x = o.decode;
    CLI::App *s = add_command(app, "decode", "Token sequences to SMILES", seed,
                              config);
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--data", x.data, "File with one token sequence per line");
    s->add_option("sequences", x.sequences, "Space-separated token sequences");
    cmds.push_back({ s, [&](const Context &c) { return decode(x, c); } });
  }
  {
    auto &x = o.roundtrip;
    CLI::App *s = add_command(app, "roundtrip-check",
                              "Check decode(encode(g)) is isomorphic to g",
                              seed, config);
    s->add_option("--vocab", x.vocab, "Vocabulary JSON")->required();
    s->add_option("--data", x.data, "SMILES file")->required();
    s->add_option("--seeds", x.seeds, "Random traversals per molecule")
        ->check(CLI::NonNegativeNumber);
    cmds.push_back({ s, [&](const Context &c) { return roundtrip_check(x, c); } });
  }

  try {
    std::vector<std::string> args = merge_config_file(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "stgg: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "stgg: " << e.what() << "\n";
    return exit_code_for(e);
  }

  for (const Command &cmd: cmds) {
    if (!cmd.app->parsed())
      continue;
    Context c;
    c.seed = seed;
    c.run_config = resolved_options(*cmd.app);
    c.run_config["command"] = cmd.app->get_name();
    c.out = &out;
    c.err = &err;
    try {
      return cmd.run(c);
    } catch (const std::exception &e) {
      err << "stgg " << cmd.app->get_name() << ": " << e.what() << "\n";
      return exit_code_for(e);
    }
  }
  return kExitUsage;
}

}  // namespace stgg::cli
