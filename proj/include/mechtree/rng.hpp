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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mechtree {

/// Counter-based stream: the n-th draw is a pure function of
/// (seed, stream, n), so results do not depend on platform or scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next();
  /// Uniform on [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  /// Uniform double on [0, 1) with 53 random bits.
  double unit();

  /// Independent child stream, e.g. one per Monte-Carlo trial.
  RngStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// k distinct indices from [0, pool_size) by a partial Fisher-Yates shuffle
/// over a sparse virtual array (O(k) memory). Order is the draw order.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t pool_size,
                                                      std::uint64_t k, RngStream& rng);

}  // namespace mechtree
