// Copyright 2026 The motorgrad Authors
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

#ifndef MOTORGRAD_RANDOM_H_
#define MOTORGRAD_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace motorgrad {

// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Counter-based seed derivation: hashes the index path into a stream key, so
// the seed of (master, 2, 5, 17) never depends on how many other paths exist.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

// A seeded stream of uniform and standard-normal variates. Each rollout owns
// one; the same seed always yields the same sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  double normal();
  double uniform();
  Eigen::VectorXd standard_normal(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace motorgrad

#endif  // MOTORGRAD_RANDOM_H_
