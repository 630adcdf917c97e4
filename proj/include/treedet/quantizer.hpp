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

// Node decision functions as explicit lookup tables.
//
// A node's input is a vector of coordinates (one observation index for a
// leaf, one message per immediate predecessor for a relay) flattened in mixed
// radix with the first coordinate most significant. Messages are 0-based.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "treedet/error.hpp"
#include "treedet/hypothesis_model.hpp"
#include "treedet/topology.hpp"

namespace treedet {

using Message = std::uint32_t;

class InputSpace {
 public:
  InputSpace() = default;
  explicit InputSpace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    strides_.assign(dims_.size(), 1);
    size_ = 1;
    for (std::size_t k = dims_.size(); k-- > 0;) {
      if (dims_[k] == 0) throw Error(ErrorCode::kDimensionMismatch, "zero-sized input coordinate");
      strides_[k] = size_;
      size_ *= dims_[k];
    }
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }

  std::size_t digit(std::size_t index, std::size_t k) const {
    return (index / strides_[k]) % dims_[k];
  }

  std::size_t flatten(std::span<const std::size_t> coords) const {
    if (coords.size() != dims_.size()) {
      throw Error(ErrorCode::kBadCoordinate, "coordinate vector has wrong length");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      if (coords[k] >= dims_[k]) throw Error(ErrorCode::kBadCoordinate, "coordinate out of range");
      index += coords[k] * strides_[k];
    }
    return index;
  }

  std::vector<std::size_t> unflatten(std::size_t index) const {
    std::vector<std::size_t> coords(dims_.size());
    for (std::size_t k = 0; k < dims_.size(); ++k) coords[k] = digit(index, k);
    return coords;
  }

  friend bool operator==(const InputSpace& a, const InputSpace& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

class DecisionFunction {
 public:
  DecisionFunction() = default;
  DecisionFunction(InputSpace space, std::size_t output_card, std::vector<Message> table)
      : space_(std::move(space)), output_card_(output_card), table_(std::move(table)) {
    if (output_card_ == 0) throw Error(ErrorCode::kDimensionMismatch, "empty output alphabet");
    if (table_.size() != space_.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "table length " + std::to_string(table_.size()) +
                                                     " != input space " +
                                                     std::to_string(space_.size()));
    }
    for (Message z : table_) {
      if (z >= output_card_) throw Error(ErrorCode::kIndexOutOfRange, "table entry out of range");
    }
  }

  static DecisionFunction constant(InputSpace space, std::size_t output_card, Message z = 0) {
    std::vector<Message> table(space.size(), z);
    return DecisionFunction(std::move(space), output_card, std::move(table));
  }

  const InputSpace& input_space() const { return space_; }
  std::size_t output_card() const { return output_card_; }
  std::span<const Message> table() const { return table_; }

  Message apply(std::size_t input_index) const {
    if (input_index >= table_.size()) {
      throw Error(ErrorCode::kIndexOutOfRange, "input index " + std::to_string(input_index));
    }
    return table_[input_index];
  }
  Message apply(std::span<const std::size_t> coords) const { return table_[space_.flatten(coords)]; }

  // Unchecked access for hot loops.
  Message operator[](std::size_t input_index) const { return table_[input_index]; }

  void assign(std::size_t input_index, Message z) {
    if (input_index >= table_.size()) throw Error(ErrorCode::kIndexOutOfRange, "input index");
    if (z >= output_card_) throw Error(ErrorCode::kIndexOutOfRange, "message out of range");
    table_[input_index] = z;
  }

  friend bool operator==(const DecisionFunction&, const DecisionFunction&) = default;

 private:
  InputSpace space_;
  std::size_t output_card_ = 1;
  std::vector<Message> table_;
};

// Flat indices whose coordinates agree with every fixed coordinate and whose
// table value is `output`. `fixed` has one slot per input coordinate; empty
// slots are free.
inline std::vector<std::size_t> preimage(const DecisionFunction& df,
                                         std::span<const std::optional<std::size_t>> fixed,
                                         Message output) {
  const InputSpace& space = df.input_space();
  if (fixed.size() != space.rank()) {
    throw Error(ErrorCode::kBadCoordinate, "partial assignment has wrong length");
  }
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (fixed[k] && *fixed[k] >= space.dims()[k]) {
      throw Error(ErrorCode::kBadCoordinate, "fixed coordinate out of range");
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t idx = 0; idx < space.size(); ++idx) {
    if (df[idx] != output) continue;
    bool match = true;
    for (std::size_t k = 0; k < fixed.size() && match; ++k) {
      if (fixed[k] && space.digit(idx, k) != *fixed[k]) match = false;
    }
    if (match) out.push_back(idx);
  }
  return out;
}

inline std::vector<std::size_t> preimage(const DecisionFunction& df, Message output) {
  std::vector<std::optional<std::size_t>> free(df.input_space().rank());
  return preimage(df, free, output);
}

// Splits `count` consecutive cells into `groups` contiguous runs of equal
// size; leftover cells go one each to the runs nearest the region's outer
// edge. Returns the run sizes ordered from low to high index.
inline std::vector<std::size_t> split_equal_count(std::size_t count, std::size_t groups,
                                                  bool outer_is_low) {
  std::vector<std::size_t> sizes(groups, count / groups);
  const std::size_t rem = count % groups;
  for (std::size_t r = 0; r < rem; ++r) {
    sizes[outer_is_low ? r : groups - 1 - r] += 1;
  }
  return sizes;
}

// How init_leaf_threshold splits each side of the R = 1 cut when R > 1.
enum class LeafSplit {
  kEqualCount,  // runs with equal numbers of cells
  kEqualMass,   // runs with (nearly) equal prior-weighted probability mass
};

namespace detail {

// Sizes of `groups` contiguous runs covering cells [begin, end) so that each
// run's mixture mass is as close as possible to an equal share: run k ends at
// the first cell where the cumulative mass reaches (k+1)/groups of the total.
// Every run keeps at least one cell while cells remain.
inline std::vector<std::size_t> split_equal_mass(std::span<const double> mass, std::size_t begin,
                                                 std::size_t end, std::size_t groups) {
  std::vector<std::size_t> sizes(groups, 0);
  double total = 0.0;
  for (std::size_t x = begin; x < end; ++x) total += mass[x];
  std::size_t x = begin;
  double cum = 0.0;
  for (std::size_t g = 0; g < groups && x < end; ++g) {
    const std::size_t runs_left = groups - g - 1;
    const double target = total * static_cast<double>(g + 1) / static_cast<double>(groups);
    do {
      cum += mass[x++];
      ++sizes[g];
    } while (x < end && end - x > runs_left && (cum < target || g + 1 == groups));
  }
  return sizes;
}

}  // namespace detail

// Leaf initialization for binary problems. R = 1: the single cut minimizing
// the local MAP error (cells below the cut send 0). R > 1: each side of that
// cut is split into 2^(R-1) contiguous runs, by cell count or by mass.
inline DecisionFunction init_leaf_threshold(const HypothesisModel& model, NodeId leaf,
                                            int rate_bits,
                                            LeafSplit split = LeafSplit::kEqualMass) {
  if (model.num_hypotheses() != 2) {
    throw Error(ErrorCode::kUnsupportedHypothesisCount, "threshold init needs M = 2");
  }
  if (rate_bits <= 0) throw Error(ErrorCode::kZeroRate, "rate must be positive");
  const PmfTable& pmf = model.leaf_pmf(leaf);
  const std::size_t n = pmf.symbols();
  const double pi0 = model.priors[0];
  const double pi1 = model.priors[1];

  // cut c: cells [0, c) -> 0, [c, n) -> 1; c ranges over 1..n-1.
  std::size_t best_cut = n / 2;
  if (n >= 2) {
    double below0 = 0.0, below1 = 0.0;
    double best_correct = -1.0;
    const double total0 = std::accumulate(pmf.row(0).begin(), pmf.row(0).end(), 0.0);
    const double total1 = std::accumulate(pmf.row(1).begin(), pmf.row(1).end(), 0.0);
    for (std::size_t c = 1; c < n; ++c) {
      below0 += pmf(0, c - 1);
      below1 += pmf(1, c - 1);
      const double correct = std::max(pi0 * below0, pi1 * below1) +
                             std::max(pi0 * (total0 - below0), pi1 * (total1 - below1));
      if (correct > best_correct) {
        best_correct = correct;
        best_cut = c;
      }
    }
  }

  const std::size_t out_card = std::size_t{1} << rate_bits;
  const std::size_t per_side = out_card / 2;
  std::vector<Message> table(n, 0);
  if (rate_bits == 1) {
    for (std::size_t x = best_cut; x < n; ++x) table[x] = 1;
    return DecisionFunction(InputSpace({n}), out_card, std::move(table));
  }

  std::vector<std::size_t> low, high;
  if (split == LeafSplit::kEqualCount) {
    low = split_equal_count(best_cut, per_side, /*outer_is_low=*/true);
    high = split_equal_count(n - best_cut, per_side, /*outer_is_low=*/false);
  } else {
    std::vector<double> mixture(n);
    for (std::size_t x = 0; x < n; ++x) mixture[x] = pi0 * pmf(0, x) + pi1 * pmf(1, x);
    low = detail::split_equal_mass(mixture, 0, best_cut, per_side);
    high = detail::split_equal_mass(mixture, best_cut, n, per_side);
  }
  std::size_t x = 0;
  Message label = 0;
  for (std::size_t size : low) {
    for (std::size_t k = 0; k < size; ++k) table[x++] = label;
    ++label;
  }
  label = static_cast<Message>(per_side);
  for (std::size_t size : high) {
    for (std::size_t k = 0; k < size; ++k) table[x++] = label;
    ++label;
  }
  return DecisionFunction(InputSpace({n}), out_card, std::move(table));
}

// Uniform i.i.d. table entries from a seeded 64-bit Mersenne twister. Plain
// modulo keeps the stream identical across standard libraries; the bias is
// below 2^-48 for any alphabet this library accepts.
inline DecisionFunction init_random(InputSpace space, std::size_t output_card,
                                    std::uint64_t seed) {
  if (output_card == 0) throw Error(ErrorCode::kDimensionMismatch, "empty output alphabet");
  std::mt19937_64 rng(seed);
  std::vector<Message> table(space.size());
  for (Message& z : table) z = static_cast<Message>(rng() % output_card);
  return DecisionFunction(std::move(space), output_card, std::move(table));
}

}  // namespace treedet
