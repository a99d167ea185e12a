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

#include <filesystem>
#include <string>
#include <string_view>

#include "mechtree/tree.hpp"

namespace mechtree {

/// Parses the line-oriented `.mech` format:
///
///   version 1
///   mechanism deterministic agents 3
///   node n0: x1 >= x2 ? n1 : l3
///   leaf l3: 1/2 x1 + 1/2 x2
///   root n0
///
/// Randomized files declare `branch p -> tree ID fixed {..} params m dist ..`
/// lines followed by `tree ID` sections; Moulin files list `set {..}: c`.
/// Throws ParseError (syntax or semantic) with the offending span. A
/// successful result passes validate().
Mechanism parse_mechanism(std::string_view text);
Mechanism load_mechanism(const std::filesystem::path& path);

/// Canonical, byte-deterministic text. Nodes are renumbered in preorder.
std::string serialize(const Mechanism& mech);
std::string serialize(const DecisionTree& tree);

/// Structural identity up to node renumbering.
bool same_mechanism(const Mechanism& a, const Mechanism& b);

}  // namespace mechtree
