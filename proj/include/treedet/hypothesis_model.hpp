// Copyright 2026 The treedet Authors
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

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/topology.hpp"

namespace treedet {

inline constexpr double kProbabilityTolerance = 1e-12;

// Row-major (hypothesis x symbol) table of conditional probabilities.
class PmfTable {
 public:
  PmfTable() = default;
  PmfTable(std::size_t hypotheses, std::size_t symbols)
      : rows_(hypotheses), cols_(symbols), data_(hypotheses * symbols, 0.0) {}

  // Builds from nested rows; all rows must have equal length.
  static PmfTable from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
      throw Error(ErrorCode::kDimensionMismatch, "empty PMF table");
    }
    PmfTable t(rows.size(), rows.front().size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[j].size() != t.cols_) {
        throw Error(ErrorCode::kDimensionMismatch, "ragged PMF table");
      }
      std::copy(rows[j].begin(), rows[j].end(), t.data_.begin() + j * t.cols_);
    }
    return t;
  }

  std::size_t hypotheses() const { return rows_; }
  std::size_t symbols() const { return cols_; }

  double& operator()(std::size_t j, std::size_t u) { return data_[j * cols_ + u]; }
  double operator()(std::size_t j, std::size_t u) const { return data_[j * cols_ + u]; }

  std::span<const double> row(std::size_t j) const {
    return {data_.data() + j * cols_, cols_};
  }
  std::span<double> row(std::size_t j) { return {data_.data() + j * cols_, cols_}; }

  bool is_row_stochastic(double tol = kProbabilityTolerance) const {
    for (std::size_t j = 0; j < rows_; ++j) {
      double sum = 0.0;
      for (double p : row(j)) {
        if (!(p >= 0.0)) return false;
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
  }

  friend bool operator==(const PmfTable&, const PmfTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// M-ary hypothesis structure: priors and per-leaf conditional observation
// PMFs. Leaves are conditionally independent; only marginals are stored.
struct HypothesisModel {
  std::vector<double> priors;
  std::map<NodeId, PmfTable> leaf_pmfs;

  std::size_t num_hypotheses() const { return priors.size(); }
  const PmfTable& leaf_pmf(NodeId leaf) const {
    auto it = leaf_pmfs.find(leaf);
    if (it == leaf_pmfs.end()) {
      throw Error(ErrorCode::kUnknownNode, "no observation PMF for node " +
                                               std::to_string(leaf.value));
    }
    return it->second;
  }
};

inline void validate_probability_vector(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw Error(ErrorCode::kBadProbabilityVector, "negative or NaN entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::kBadProbabilityVector, "entries sum to " + std::to_string(sum));
  }
}

inline HypothesisModel make_model(const TreeNetwork& net, std::vector<double> priors,
                                  std::map<NodeId, PmfTable> leaf_pmfs) {
  if (priors.size() < 2) {
    throw Error(ErrorCode::kDimensionMismatch, "need at least two hypotheses");
  }
  validate_probability_vector(priors);
  for (NodeId leaf : net.leaves()) {
    auto it = leaf_pmfs.find(leaf);
    if (it == leaf_pmfs.end()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "missing PMF for leaf " + std::to_string(leaf.value));
    }
    const PmfTable& t = it->second;
    if (t.hypotheses() != priors.size() || t.symbols() != net.obs_size(leaf)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "PMF shape mismatch at leaf " + std::to_string(leaf.value));
    }
    for (std::size_t j = 0; j < t.hypotheses(); ++j) validate_probability_vector(t.row(j));
  }
  if (leaf_pmfs.size() != net.leaves().size()) {
    throw Error(ErrorCode::kDimensionMismatch, "PMF given for a node that is not a leaf");
  }
  return HypothesisModel{std::move(priors), std::move(leaf_pmfs)};
}

// Gaussian tail Q(x) = P(N(0,1) > x).
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// P(lo < N(mean,1) <= hi) evaluated on whichever tail keeps precision.
inline double gaussian_cell_mass(double lo, double hi, double mean) {
  const double a = lo - mean;
  const double b = hi - mean;
  if (a >= 0.0) return q_function(a) - q_function(b);
  if (b <= 0.0) return q_function(-b) - q_function(-a);
  return 1.0 - q_function(-a) - q_function(b);
}

// Two-row table (H_0 mean -a, H_1 mean +a, unit variance) over `bins` cells:
// (-inf, e_0], (e_0, e_1], ..., (e_{bins-2}, inf) with the interior edges
// evenly spaced on [-half_range, half_range]. With bins == 2 the only edge is 0.
inline PmfTable discretize_gaussian_antipodal(double snr_db, std::size_t bins,
                                              double half_range) {
  if (bins < 2) throw Error(ErrorCode::kBadBinCount, "need at least two bins");
  if (!(half_range > 0.0)) throw Error(ErrorCode::kBadBinCount, "half_range must be positive");
  const double a = std::pow(10.0, snr_db / 20.0);

  std::vector<double> edges(bins - 1);
  if (bins == 2) {
    edges[0] = 0.0;
  } else {
    const double width = 2.0 * half_range / static_cast<double>(bins - 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = -half_range + width * static_cast<double>(i);
    }
    edges.back() = half_range;
  }

  PmfTable t(2, bins);
  const double means[2] = {-a, a};
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double lo = k == 0 ? -INFINITY : edges[k - 1];
      const double hi = k + 1 == bins ? INFINITY : edges[k];
      t(j, k) = gaussian_cell_mass(lo, hi, means[j]);
    }
  }
  return t;
}

// Same discretized antipodal table at every leaf; leaves must have
// obs_size == bins.
inline HypothesisModel gaussian_antipodal_model(const TreeNetwork& net, double snr_db,
                                                std::size_t bins, double half_range,
                                                std::vector<double> priors = {0.5, 0.5}) {
  PmfTable table = discretize_gaussian_antipodal(snr_db, bins, half_range);
  std::map<NodeId, PmfTable> pmfs;
  for (NodeId leaf : net.leaves()) pmfs.emplace(leaf, table);
  return make_model(net, std::move(priors), std::move(pmfs));
}

// Error of the unconstrained sum detector on n antipodal observations with
// equal priors: Q(sqrt(n E)), E = 10^(snr_db/10).
inline double centralized_linear_pe(double snr_db, std::size_t n_leaves) {
  const double energy = std::pow(10.0, snr_db / 10.0);
  return q_function(std::sqrt(static_cast<double>(n_leaves) * energy));
}

}  // namespace treedet
