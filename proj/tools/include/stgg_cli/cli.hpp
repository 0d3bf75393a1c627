//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_CLI_CLI_HPP_
#define STGG_CLI_CLI_HPP_

#include <ostream>
#include <span>
#include <string>

namespace stgg::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInvariant = 3,
};

/// Runs one command. args excludes the program name, e.g.
/// {"train", "--data", "x.smi", ...}. Results go to out, diagnostics to err.
int run(std::span<const std::string> args, std::ostream &out,
        std::ostream &err);

}  // namespace stgg::cli

#endif  // STGG_CLI_CLI_HPP_
