// Copyright 2026 The ermsquash Authors
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

#ifndef ERMSQUASH_COLORING_HPP_
#define ERMSQUASH_COLORING_HPP_

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/error.hpp"

namespace ermsquash {

// Materialized color classes. members[k] is sorted ascending.
struct ColorStats {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<int>> members;
};

// A partition of {0, ..., n-1} stored as a canonical index -> color map.
// Color ids are dense and numbered by first occurrence, so two colorings of
// the same index set are equal iff their assignments are equal.
class Coloring {
 public:
  Coloring() = default;

  static Coloring unit(std::size_t n);
  static Coloring discrete(std::size_t n);
  // Canonicalizes arbitrary integer labels.
  static Coloring from_labels(std::span<const int> labels);

  std::size_t size() const noexcept { return assignment_.size(); }
  int num_colors() const noexcept { return num_colors_; }
  int operator[](std::size_t i) const { return assignment_[i]; }
  std::span<const int> assignment() const noexcept { return assignment_; }

  bool is_unit() const noexcept { return num_colors_ == 1; }
  bool is_discrete() const noexcept {
    return static_cast<std::size_t>(num_colors_) == assignment_.size();
  }

  std::vector<std::size_t> sizes() const;
  ColorStats stats() const;

  // True iff every color of *this lies inside a single color of `coarser`.
  bool refines(const Coloring& coarser) const;

  friend bool operator==(const Coloring&, const Coloring&) = default;

 private:
  std::vector<int> assignment_;
  int num_colors_ = 0;
};

Coloring unit_coloring(std::size_t n);

// Two indices share a color in the result iff they share a color in `c` and
// have equal keys. Keys are compared with operator< / operator== only.
template <std::totally_ordered Key>
Coloring split_by_keys(const Coloring& c, std::span<const Key> keys) {
  require(keys.size() == c.size(), ErrorKind::kDimension,
          "split_by_keys: " + std::to_string(keys.size()) + " keys for " +
              std::to_string(c.size()) + " indices");
  std::vector<int> order(c.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (c[a] != c[b]) return c[a] < c[b];
    return keys[a] < keys[b];
  });
  std::vector<int> labels(c.size());
  int group = -1;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const int i = order[pos];
    if (pos == 0 || c[order[pos - 1]] != c[i] || !(keys[order[pos - 1]] == keys[i])) {
      ++group;
    }
    labels[i] = group;
  }
  return Coloring::from_labels(labels);
}

template <std::totally_ordered Key>
Coloring split_by_keys(const Coloring& c, const std::vector<Key>& keys) {
  return split_by_keys(c, std::span<const Key>(keys));
}

enum class AggregateMode { kSum, kMean };

// Sum (Pi^T v) or mean (Pi^Scaled v) of `v` over every color. Summation runs
// in ascending index order; the mean of a color holding identical values is
// that value exactly.
Eigen::VectorXd aggregate(const Eigen::Ref<const Eigen::VectorXd>& v,
                          const Coloring& c, AggregateMode mode);

// Broadcast a per-color vector back to the index set (Pi v').
Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& reduced,
                       const Coloring& c);

// {"assignment":[...],"num_colors":k}
std::string to_json(const Coloring& c);
Coloring coloring_from_json(std::string_view text);

}  // namespace ermsquash

#endif  // ERMSQUASH_COLORING_HPP_
