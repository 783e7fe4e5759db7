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

#include "ermsquash/refinement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace ermsquash {

std::int64_t FloatKeyPolicy::key(double sum) const {
  double x = sum;
  if (quantize_digits) x = std::nearbyint(x * std::pow(10.0, *quantize_digits));
  if (x == 0.0) return 0;  // folds -0.0 and +0.0
  auto bits = std::bit_cast<std::int64_t>(x);
  if (bits < 0) bits = std::numeric_limits<std::int64_t>::min() - bits;
  return bits;
}

std::string FloatKeyPolicy::describe() const {
  if (!quantize_digits) return "exact";
  return "quantize:" + std::to_string(*quantize_digits);
}

std::string EquitabilityWitness::describe() const {
  std::ostringstream os;
  os << (direction == Direction::kRowSums ? "row sums" : "column sums")
     << " differ in block (S=" << row_color << ", T=" << col_color << "): index "
     << first_index << " gives " << first_sum << ", index " << second_index << " gives "
     << second_sum;
  return os.str();
}

namespace {

// One side (rows or columns) of the partition being refined. Members of a
// color occupy elems[begin[c], end[c]).
struct Side {
  std::vector<int> elems;
  std::vector<int> pos;
  std::vector<int> color_of;
  std::vector<int> begin;
  std::vector<int> end;
  std::vector<char> in_stack;

  explicit Side(const Coloring& c) {
    const int n = static_cast<int>(c.size());
    const int k = c.num_colors();
    color_of.assign(c.assignment().begin(), c.assignment().end());
    begin.assign(k, 0);
    end.assign(k, 0);
    in_stack.assign(k, 0);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[c[i]];
    for (int color = 0, offset = 0; color < k; ++color) {
      begin[color] = end[color] = offset;
      offset += counts[color];
    }
    elems.resize(n);
    pos.resize(n);
    for (int i = 0; i < n; ++i) {
      const int slot = end[c[i]]++;
      elems[slot] = i;
      pos[i] = slot;
    }
  }

  int num_colors() const { return static_cast<int>(begin.size()); }
  int size() const { return static_cast<int>(elems.size()); }
  bool discrete() const { return num_colors() == size(); }

  Coloring coloring() const { return Coloring::from_labels(color_of); }
};

struct Adjacency {
  std::span<const int> ptr;
  std::span<const int> idx;
  std::span<const double> val;
};

struct StackEntry {
  bool row_side;
  int color;
};

class Refiner {
 public:
  Refiner(const FloatKeyPolicy& policy, RefinementStats& stats)
      : policy_(policy), stats_(stats) {}

  // Splits every color of `target` by the sums over the source color
  // `color`. Newly created target colors are pushed.
  void refine(const Side& source, int color, const Adjacency& adj, Side& target,
              bool target_is_row, std::vector<StackEntry>& stack) {
    std::vector<int> members(source.elems.begin() + source.begin[color],
                             source.elems.begin() + source.end[color]);
    std::sort(members.begin(), members.end());

    const auto target_n = static_cast<std::size_t>(target.size());
    if (sum_.size() < target_n) {
      sum_.assign(target_n, 0.0);
      touched_.assign(target_n, 0);
      marked_.assign(target_n, 0);
    }
    touched_list_.clear();
    for (int s : members) {
      for (int p = adj.ptr[s]; p < adj.ptr[s + 1]; ++p) {
        const int t = adj.idx[p];
        if (!touched_[t]) {
          touched_[t] = 1;
          touched_list_.push_back(t);
        }
        sum_[t] += adj.val[p];
      }
      stats_.entries_touched += static_cast<std::size_t>(adj.ptr[s + 1] - adj.ptr[s]);
    }

    // (color, key, index) for every touched index whose key differs from the
    // implicit key of untouched indices.
    const std::int64_t zero_key = policy_.key(0.0);
    run_.clear();
    for (int t : touched_list_) {
      const std::int64_t k = policy_.key(sum_[t]);
      if (k != zero_key) run_.push_back({target.color_of[t], k, t});
      sum_[t] = 0.0;
      touched_[t] = 0;
    }
    std::sort(run_.begin(), run_.end());

    std::vector<int> created;
    for (std::size_t lo = 0; lo < run_.size();) {
      std::size_t hi = lo;
      while (hi < run_.size() && std::get<0>(run_[hi]) == std::get<0>(run_[lo])) ++hi;
      split_color(target, lo, hi, created);
      lo = hi;
    }
    for (int c : created) {
      target.in_stack[c] = 1;
      stack.push_back({target_is_row, c});
    }
  }

 private:
  struct Group {
    int offset;  // offset into the tail, or -1 for the untouched group
    int length;
    int min_index;
  };

  void split_color(Side& side, std::size_t lo, std::size_t hi, std::vector<int>& created) {
    const int color = std::get<0>(run_[lo]);
    const int b = side.begin[color];
    const int e = side.end[color];
    const int touched = static_cast<int>(hi - lo);
    const int untouched = (e - b) - touched;

    std::vector<Group> groups;
    if (untouched > 0) groups.push_back({-1, untouched, -1});
    for (std::size_t k = lo; k < hi;) {
      std::size_t k2 = k;
      while (k2 < hi && std::get<1>(run_[k2]) == std::get<1>(run_[k])) ++k2;
      // run_ is sorted by index within a key, so the first entry is the minimum.
      groups.push_back({static_cast<int>(k - lo), static_cast<int>(k2 - k),
                        std::get<2>(run_[k])});
      k = k2;
    }
    if (groups.size() == 1) return;

    for (std::size_t k = lo; k < hi; ++k) marked_[std::get<2>(run_[k])] = 1;
    auto min_of_untouched = [&] {
      int m = std::numeric_limits<int>::max();
      for (int p = b; p < e; ++p) {
        if (!marked_[side.elems[p]]) m = std::min(m, side.elems[p]);
      }
      return m;
    };

    // The largest sub-color keeps the label; ties go to the sub-color holding
    // the smallest index.
    std::size_t keeper = 0;
    for (std::size_t g = 1; g < groups.size(); ++g) {
      if (groups[g].length > groups[keeper].length) {
        keeper = g;
      } else if (groups[g].length == groups[keeper].length) {
        if (groups[keeper].min_index < 0) groups[keeper].min_index = min_of_untouched();
        if (groups[g].min_index < groups[keeper].min_index) keeper = g;
      }
    }

    // Move touched members to the tail of the range, in run order.
    const int tail = e - touched;
    for (int k = 0; k < touched; ++k) {
      const int t = std::get<2>(run_[lo + k]);
      const int slot = tail + k;
      const int other = side.elems[slot];
      const int from = side.pos[t];
      side.elems[slot] = t;
      side.pos[t] = slot;
      side.elems[from] = other;
      side.pos[other] = from;
    }
    for (std::size_t k = lo; k < hi; ++k) marked_[std::get<2>(run_[k])] = 0;

    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int gb = groups[g].offset < 0 ? b : tail + groups[g].offset;
      const int ge = gb + groups[g].length;
      if (g == keeper) {
        side.begin[color] = gb;
        side.end[color] = ge;
        continue;
      }
      const int label = side.num_colors();
      side.begin.push_back(gb);
      side.end.push_back(ge);
      side.in_stack.push_back(0);
      for (int p = gb; p < ge; ++p) side.color_of[side.elems[p]] = label;
      created.push_back(label);
    }
    ++stats_.splits;
  }

  const FloatKeyPolicy& policy_;
  RefinementStats& stats_;
  std::vector<double> sum_;
  std::vector<char> touched_;
  std::vector<char> marked_;
  std::vector<int> touched_list_;
  std::vector<std::tuple<int, std::int64_t, int>> run_;
};

Adjacency row_adjacency(const SparseMatrix& a) {
  return {a.row_ptr(), a.col_idx(), a.values()};
}

Adjacency column_adjacency(const SparseMatrix& a) {
  const auto& c = a.column_major();
  return {c.col_ptr, c.row_idx, c.values};
}

void push_all(Side& side, bool row_side, std::vector<StackEntry>& stack) {
  for (int c = 0; c < side.num_colors(); ++c) {
    if (!side.in_stack[c]) {
      side.in_stack[c] = 1;
      stack.push_back({row_side, c});
    }
  }
}

// Row-direction check of one coloring pair: within every row color S, each
// member's sums over every column color T match the first member's.
std::optional<EquitabilityWitness> check_direction(
    const Adjacency& adj, const Coloring& own, const Coloring& other,
    const FloatKeyPolicy& policy, EquitabilityWitness::Direction direction) {
  const ColorStats stats = own.stats();
  const int k_other = other.num_colors();
  std::vector<double> ref(k_other, 0.0), cur(k_other, 0.0);
  std::vector<char> ref_mark(k_other, 0), cur_mark(k_other, 0);
  std::vector<int> ref_list, cur_list;

  auto accumulate = [&](int s, std::vector<double>& sums, std::vector<char>& mark,
                        std::vector<int>& list) {
    for (int p = adj.ptr[s]; p < adj.ptr[s + 1]; ++p) {
      const int t = other[adj.idx[p]];
      if (!mark[t]) {
        mark[t] = 1;
        list.push_back(t);
      }
      sums[t] += adj.val[p];
    }
  };
  auto reset = [](std::vector<double>& sums, std::vector<char>& mark, std::vector<int>& list) {
    for (int t : list) {
      sums[t] = 0.0;
      mark[t] = 0;
    }
    list.clear();
  };

  for (int s_color = 0; s_color < own.num_colors(); ++s_color) {
    const auto& members = stats.members[s_color];
    const int first = members.front();
    accumulate(first, ref, ref_mark, ref_list);
    for (std::size_t m = 1; m < members.size(); ++m) {
      const int idx = members[m];
      accumulate(idx, cur, cur_mark, cur_list);
      auto compare = [&](int t) -> std::optional<EquitabilityWitness> {
        if (policy.key(ref[t]) == policy.key(cur[t])) return std::nullopt;
        EquitabilityWitness w{direction, 0, 0, first, idx, ref[t], cur[t]};
        if (direction == EquitabilityWitness::Direction::kRowSums) {
          w.row_color = s_color;
          w.col_color = t;
        } else {
          w.row_color = t;
          w.col_color = s_color;
        }
        return w;
      };
      // Report the smallest offending color for deterministic witnesses.
      std::vector<int> candidates(ref_list);
      candidates.insert(candidates.end(), cur_list.begin(), cur_list.end());
      std::sort(candidates.begin(), candidates.end());
      for (int t : candidates) {
        if (auto w = compare(t)) return w;
      }
      reset(cur, cur_mark, cur_list);
    }
    reset(ref, ref_mark, ref_list);
  }
  return std::nullopt;
}

}  // namespace

std::optional<EquitabilityWitness> equitability_witness(const SparseMatrix& a,
                                                        const Coloring& p,
                                                        const Coloring& q,
                                                        const FloatKeyPolicy& policy) {
  require(p.size() == static_cast<std::size_t>(a.rows()) &&
              q.size() == static_cast<std::size_t>(a.cols()),
          ErrorKind::kDimension, "equitability check: colorings do not match matrix shape");
  if (auto w = check_direction(row_adjacency(a), p, q, policy,
                               EquitabilityWitness::Direction::kRowSums)) {
    return w;
  }
  return check_direction(column_adjacency(a), q, p, policy,
                         EquitabilityWitness::Direction::kColumnSums);
}

EquitablePair coarsest_equitable(const SparseMatrix& a, const Coloring& p0,
                                 const Coloring& q0, const FloatKeyPolicy& policy,
                                 RefinementStats* stats) {
  require(p0.size() == static_cast<std::size_t>(a.rows()), ErrorKind::kDimension,
          "coarsest_equitable: row coloring size " + std::to_string(p0.size()) +
              " != rows " + std::to_string(a.rows()));
  require(q0.size() == static_cast<std::size_t>(a.cols()), ErrorKind::kDimension,
          "coarsest_equitable: column coloring size " + std::to_string(q0.size()) +
              " != cols " + std::to_string(a.cols()));
  RefinementStats local;
  RefinementStats& st = stats ? *stats : local;
  Side rows(p0), cols(q0);
  if (rows.size() == 0 || cols.size() == 0) return {p0, q0};

  Refiner refiner(policy, st);
  const Adjacency by_row = row_adjacency(a);
  std::optional<Adjacency> by_col;

  std::vector<StackEntry> stack;
  push_all(rows, true, stack);
  push_all(cols, false, stack);
  for (;;) {
    while (!stack.empty() && !(rows.discrete() && cols.discrete())) {
      const StackEntry top = stack.back();
      stack.pop_back();
      ++st.pops;
      if (top.row_side) {
        rows.in_stack[top.color] = 0;
        refiner.refine(rows, top.color, by_row, cols, false, stack);
      } else {
        cols.in_stack[top.color] = 0;
        if (!by_col) by_col = column_adjacency(a);
        refiner.refine(cols, top.color, *by_col, rows, true, stack);
      }
    }
    if (rows.discrete() && cols.discrete()) break;
    // Sums over the label-keeping sub-color are never recomputed; with
    // inexact floating-point data they can differ in the last bit, so the
    // result is re-checked and refinement resumes from every color if needed.
    if (is_equitable(a, rows.coloring(), cols.coloring(), policy)) break;
    ++st.closure_passes;
    push_all(rows, true, stack);
    push_all(cols, false, stack);
  }
  return {rows.coloring(), cols.coloring()};
}

Coloring symmetric_coarsest_equitable(const SparseMatrix& k, const Coloring& q0,
                                      const FloatKeyPolicy& policy, RefinementStats* stats) {
  require(k.rows() == k.cols(), ErrorKind::kStructure,
          "symmetric refinement needs a square matrix");
  require(k.is_symmetric(), ErrorKind::kStructure,
          "symmetric refinement needs an exactly symmetric matrix");
  require(q0.size() == static_cast<std::size_t>(k.rows()), ErrorKind::kDimension,
          "symmetric_coarsest_equitable: coloring size does not match matrix");
  RefinementStats local;
  RefinementStats& st = stats ? *stats : local;
  Side side(q0);
  if (side.size() == 0) return q0;

  Refiner refiner(policy, st);
  // Row j equals column j, so the row lists serve both directions.
  const Adjacency adj = row_adjacency(k);
  std::vector<StackEntry> stack;
  push_all(side, true, stack);
  for (;;) {
    while (!stack.empty() && !side.discrete()) {
      const StackEntry top = stack.back();
      stack.pop_back();
      ++st.pops;
      side.in_stack[top.color] = 0;
      refiner.refine(side, top.color, adj, side, true, stack);
    }
    if (side.discrete()) break;
    const Coloring current = side.coloring();
    if (is_equitable(k, current, current, policy)) break;
    ++st.closure_passes;
    push_all(side, true, stack);
  }
  return side.coloring();
}

namespace {

// All partitions refining `base`, as canonical label vectors.
std::vector<std::vector<int>> enumerate_refinements(const Coloring& base) {
  std::vector<std::vector<int>> out;
  const int n = static_cast<int>(base.size());
  std::vector<int> labels(n, 0);
  std::vector<int> block_parent;
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      out.push_back(labels);
      return;
    }
    const int blocks = static_cast<int>(block_parent.size());
    for (int b = 0; b < blocks; ++b) {
      if (block_parent[b] == base[i]) {
        labels[i] = b;
        rec(i + 1);
      }
    }
    labels[i] = blocks;
    block_parent.push_back(base[i]);
    rec(i + 1);
    block_parent.pop_back();
  };
  rec(0);
  return out;
}

int count_blocks(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

bool labels_refine(const std::vector<int>& fine, const std::vector<int>& coarse) {
  std::vector<int> parent(fine.size(), -1);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    int& p = parent[fine[i]];
    if (p == -1) {
      p = coarse[i];
    } else if (p != coarse[i]) {
      return false;
    }
  }
  return true;
}

// Groups the indices of one side by their vector of keyed sums over the
// blocks of `partition` on the other side. `entry(i, j)` reads A with i on
// the grouped side.
template <typename Entry>
std::vector<int> signature_labels(int n_grouped, int n_other, const std::vector<int>& partition,
                                  const FloatKeyPolicy& policy, Entry entry) {
  const int k = count_blocks(partition);
  std::vector<std::vector<std::int64_t>> sig(n_grouped, std::vector<std::int64_t>(k));
  for (int i = 0; i < n_grouped; ++i) {
    std::vector<double> sums(k, 0.0);
    for (int j = 0; j < n_other; ++j) sums[partition[j]] += entry(i, j);
    for (int b = 0; b < k; ++b) sig[i][b] = policy.key(sums[b]);
  }
  std::vector<int> labels(n_grouped);
  std::vector<std::vector<std::int64_t>> seen;
  for (int i = 0; i < n_grouped; ++i) {
    auto it = std::find(seen.begin(), seen.end(), sig[i]);
    labels[i] = static_cast<int>(it - seen.begin());
    if (it == seen.end()) seen.push_back(sig[i]);
  }
  return labels;
}

}  // namespace

EquitablePair brute_force_coarsest(const SparseMatrix& a, const Coloring& p0,
                                   const Coloring& q0, const FloatKeyPolicy& policy) {
  require(a.rows() <= kBruteForceMaxDim && a.cols() <= kBruteForceMaxDim, ErrorKind::kLimit,
          "brute_force_coarsest is limited to " + std::to_string(kBruteForceMaxDim) + "x" +
              std::to_string(kBruteForceMaxDim) + " matrices");
  require(p0.size() == static_cast<std::size_t>(a.rows()) &&
              q0.size() == static_cast<std::size_t>(a.cols()),
          ErrorKind::kDimension, "brute_force_coarsest: colorings do not match matrix");
  const Eigen::MatrixXd d = a.to_dense();
  const int m = a.rows();
  const int n = a.cols();
  const auto row_parts = enumerate_refinements(p0);
  const auto col_parts = enumerate_refinements(q0);

  // (P, Q) is equitable iff P refines the row grouping induced by Q and Q
  // refines the column grouping induced by P.
  std::vector<std::vector<int>> row_sig_of_q, col_sig_of_p;
  for (const auto& q : col_parts) {
    row_sig_of_q.push_back(
        signature_labels(m, n, q, policy, [&](int i, int j) { return d(i, j); }));
  }
  for (const auto& p : row_parts) {
    col_sig_of_p.push_back(
        signature_labels(n, m, p, policy, [&](int j, int i) { return d(i, j); }));
  }

  int best_p = -1, best_q = -1, best_count = std::numeric_limits<int>::max();
  for (std::size_t ip = 0; ip < row_parts.size(); ++ip) {
    const int kp = count_blocks(row_parts[ip]);
    for (std::size_t iq = 0; iq < col_parts.size(); ++iq) {
      const int total = kp + count_blocks(col_parts[iq]);
      if (total >= best_count) continue;
      if (labels_refine(row_parts[ip], row_sig_of_q[iq]) &&
          labels_refine(col_parts[iq], col_sig_of_p[ip])) {
        best_p = static_cast<int>(ip);
        best_q = static_cast<int>(iq);
        best_count = total;
      }
    }
  }
  return {Coloring::from_labels(row_parts[best_p]), Coloring::from_labels(col_parts[best_q])};
}

Coloring brute_force_symmetric_coarsest(const SparseMatrix& k, const Coloring& q0,
                                        const FloatKeyPolicy& policy) {
  require(k.rows() <= kBruteForceMaxDim && k.rows() == k.cols(), ErrorKind::kLimit,
          "brute_force_symmetric_coarsest needs a square matrix of size <= " +
              std::to_string(kBruteForceMaxDim));
  require(k.is_symmetric(), ErrorKind::kStructure, "matrix is not symmetric");
  const Eigen::MatrixXd d = k.to_dense();
  const int n = k.rows();
  int best = -1, best_count = std::numeric_limits<int>::max();
  const auto parts = enumerate_refinements(q0);
  for (std::size_t iq = 0; iq < parts.size(); ++iq) {
    const int kq = count_blocks(parts[iq]);
    if (kq >= best_count) continue;
    const auto sig = signature_labels(n, n, parts[iq], policy,
                                      [&](int i, int j) { return d(i, j); });
    if (labels_refine(parts[iq], sig)) {
      best = static_cast<int>(iq);
      best_count = kq;
    }
  }
  return Coloring::from_labels(parts[best]);
}

std::string to_json(const EquitablePair& pair) {
  nlohmann::json j;
  j["rows"] = pair.rows.num_colors();
  j["cols"] = pair.cols.num_colors();
  j["row_sizes"] = pair.rows.sizes();
  j["col_sizes"] = pair.cols.sizes();
  j["row_coloring"] = nlohmann::json::parse(to_json(pair.rows));
  j["col_coloring"] = nlohmann::json::parse(to_json(pair.cols));
  return j.dump();
}

}  // namespace ermsquash
