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

#include "ermsquash/coloring.hpp"

#include <unordered_map>

#include "json.hpp"

namespace ermsquash {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kEmpty: return "empty";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kStructure: return "structure";
    case ErrorKind::kInvariant: return "invariant";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kEvaluation: return "evaluation";
    case ErrorKind::kLimit: return "limit";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Coloring Coloring::unit(std::size_t n) {
  require(n >= 1, ErrorKind::kEmpty, "unit coloring of an empty index set");
  Coloring c;
  c.assignment_.assign(n, 0);
  c.num_colors_ = 1;
  return c;
}

Coloring Coloring::discrete(std::size_t n) {
  Coloring c;
  c.assignment_.resize(n);
  std::iota(c.assignment_.begin(), c.assignment_.end(), 0);
  c.num_colors_ = static_cast<int>(n);
  return c;
}

Coloring Coloring::from_labels(std::span<const int> labels) {
  Coloring c;
  c.assignment_.resize(labels.size());
  std::unordered_map<int, int> relabel;
  relabel.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(labels[i], static_cast<int>(relabel.size()));
    c.assignment_[i] = it->second;
  }
  c.num_colors_ = static_cast<int>(relabel.size());
  return c;
}

std::vector<std::size_t> Coloring::sizes() const {
  std::vector<std::size_t> out(num_colors_, 0);
  for (int k : assignment_) ++out[k];
  return out;
}

ColorStats Coloring::stats() const {
  ColorStats s;
  s.sizes = sizes();
  s.members.resize(num_colors_);
  for (int k = 0; k < num_colors_; ++k) s.members[k].reserve(s.sizes[k]);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    s.members[assignment_[i]].push_back(static_cast<int>(i));
  }
  return s;
}

bool Coloring::refines(const Coloring& coarser) const {
  if (coarser.size() != size()) return false;
  std::vector<int> parent(num_colors_, -1);
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    int& p = parent[assignment_[i]];
    if (p == -1) {
      p = coarser[i];
    } else if (p != coarser[i]) {
      return false;
    }
  }
  return true;
}

Coloring unit_coloring(std::size_t n) { return Coloring::unit(n); }

Eigen::VectorXd aggregate(const Eigen::Ref<const Eigen::VectorXd>& v,
                          const Coloring& c, AggregateMode mode) {
  require(static_cast<std::size_t>(v.size()) == c.size(), ErrorKind::kDimension,
          "aggregate: vector length " + std::to_string(v.size()) +
              " does not match coloring size " + std::to_string(c.size()));
  const int k = c.num_colors();
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(k);
  if (mode == AggregateMode::kSum) {
    for (Eigen::Index i = 0; i < v.size(); ++i) sums[c[i]] += v[i];
    return sums;
  }
  std::vector<std::size_t> counts(k, 0);
  std::vector<double> first(k, 0.0);
  std::vector<char> uniform(k, 1);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const int color = c[i];
    if (counts[color]++ == 0) {
      first[color] = v[i];
    } else if (v[i] != first[color]) {
      uniform[color] = 0;
    }
    sums[color] += v[i];
  }
  for (int color = 0; color < k; ++color) {
    sums[color] = uniform[color] ? first[color]
                                 : sums[color] / static_cast<double>(counts[color]);
  }
  return sums;
}

Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& reduced,
                       const Coloring& c) {
  require(reduced.size() == c.num_colors(), ErrorKind::kDimension,
          "expand: reduced length " + std::to_string(reduced.size()) + " but " +
              std::to_string(c.num_colors()) + " colors");
  Eigen::VectorXd out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = reduced[c[i]];
  return out;
}

std::string to_json(const Coloring& c) {
  nlohmann::json j;
  j["assignment"] = std::vector<int>(c.assignment().begin(), c.assignment().end());
  j["num_colors"] = c.num_colors();
  return j.dump();
}

Coloring coloring_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("coloring json: ") + e.what());
  }
  require(j.is_object() && j.contains("assignment") && j["assignment"].is_array(),
          ErrorKind::kParse, "coloring json: missing \"assignment\" array");
  std::vector<int> labels;
  for (const auto& x : j["assignment"]) {
    require(x.is_number_integer() && x.get<int>() >= 0, ErrorKind::kParse,
            "coloring json: color ids must be nonnegative integers");
    labels.push_back(x.get<int>());
  }
  Coloring c = Coloring::from_labels(labels);
  if (j.contains("num_colors")) {
    require(j["num_colors"].is_number_integer() &&
                j["num_colors"].get<int>() == c.num_colors(),
            ErrorKind::kParse, "coloring json: num_colors does not match assignment");
  }
  return c;
}

}  // namespace ermsquash
