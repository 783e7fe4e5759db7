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

#ifndef ERMSQUASH_REFINEMENT_HPP_
#define ERMSQUASH_REFINEMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "ermsquash/coloring.hpp"
#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash {

// How accumulated floating-point sums are turned into split keys.
//
// The default groups by exact value (with -0 == +0), which keeps the
// reduction lossless. Setting `quantize_digits` rounds every sum to that many
// decimal digits first; this is an explicit relaxation for noisy data and can
// merge entries that are only approximately equal.
struct FloatKeyPolicy {
  std::optional<int> quantize_digits;

  std::int64_t key(double sum) const;
  std::string describe() const;
};

// Row coloring (P) and column coloring (Q) of a matrix.
struct EquitablePair {
  Coloring rows;
  Coloring cols;

  friend bool operator==(const EquitablePair&, const EquitablePair&) = default;
};

struct RefinementStats {
  std::size_t entries_touched = 0;
  std::size_t pops = 0;
  std::size_t splits = 0;
  std::size_t closure_passes = 0;
};

// First violation of equitability found by `equitability_witness`.
struct EquitabilityWitness {
  enum class Direction { kRowSums, kColumnSums };

  Direction direction;
  int row_color;     // S
  int col_color;     // T
  int first_index;   // reference member of the color being checked
  int second_index;  // member whose sum differs
  double first_sum;
  double second_sum;

  std::string describe() const;
};

// Coarsest equitable pair refining (p0, q0), computed by stack-based color
// refinement. The output is unique, so it does not depend on pop order.
EquitablePair coarsest_equitable(const SparseMatrix& a, const Coloring& p0,
                                 const Coloring& q0, const FloatKeyPolicy& policy = {},
                                 RefinementStats* stats = nullptr);

// Coarsest Q refining q0 with (Q, Q) equitable on the symmetric matrix k.
Coloring symmetric_coarsest_equitable(const SparseMatrix& k, const Coloring& q0,
                                      const FloatKeyPolicy& policy = {},
                                      RefinementStats* stats = nullptr);

// Returns nullopt when every block of (p, q) has constant row sums and
// constant column sums on `a`.
std::optional<EquitabilityWitness> equitability_witness(const SparseMatrix& a,
                                                        const Coloring& p,
                                                        const Coloring& q,
                                                        const FloatKeyPolicy& policy = {});

inline bool is_equitable(const SparseMatrix& a, const Coloring& p, const Coloring& q,
                         const FloatKeyPolicy& policy = {}) {
  return !equitability_witness(a, p, q, policy).has_value();
}

inline constexpr int kBruteForceMaxDim = 7;

// Exhaustive oracle: enumerates every pair of partitions refining (p0, q0)
// and returns the equitable pair with the fewest colors. Refuses matrices
// larger than kBruteForceMaxDim in either dimension.
EquitablePair brute_force_coarsest(const SparseMatrix& a, const Coloring& p0,
                                   const Coloring& q0, const FloatKeyPolicy& policy = {});

// Symmetric variant of the oracle: enumerates partitions Q refining q0.
Coloring brute_force_symmetric_coarsest(const SparseMatrix& k, const Coloring& q0,
                                        const FloatKeyPolicy& policy = {});

// {"rows":k,"cols":l,"row_sizes":[...],"col_sizes":[...],
//  "row_coloring":{...},"col_coloring":{...}}
std::string to_json(const EquitablePair& pair);

}  // namespace ermsquash

#endif  // ERMSQUASH_REFINEMENT_HPP_
