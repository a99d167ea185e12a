// Copyright 2026 The mechtree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mechtree/verifier.hpp"

namespace mechtree {

enum ExitCode : int {
  kExitOk = 0,           // success or truthful
  kExitNonTruthful = 1,  // witness emitted
  kExitInputError = 2,   // parse or validation error
  kExitUsageError = 3,
  kExitInternalError = 4,  // invariant failure
};

/// Replaceable pieces, for exercising failure paths in tests.
struct CliHooks {
  std::function<VerificationReport(const DecisionTree&, const VerifierOptions&)> verify_tree =
      [](const DecisionTree& tree, const VerifierOptions& options) {
        return is_truthful(tree, options);
      };
};

/// Runs one command line (without the program name) and returns its exit
/// code. Nothing is thrown.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const CliHooks& hooks = {});

}  // namespace mechtree
