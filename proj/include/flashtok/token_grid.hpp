// SPDX-FileCopyrightText: Copyright (c) 2026 The flashtok Authors
// SPDX-License-Identifier: Apache-2.0
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
#include <span>
#include <vector>

namespace flashtok {

/// rows x cols grid of dim-wide feature vectors, row-major, channel fastest.
class TokenGrid {
 public:
  TokenGrid() = default;
  TokenGrid(int rows, int cols, int dim);
  TokenGrid(int rows, int cols, int dim, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }
  std::size_t tokens() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  }

  std::span<double> token(int r, int c) {
    return {data_.data() + offset(r, c), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> token(int r, int c) const {
    return {data_.data() + offset(r, c), static_cast<std::size_t>(dim_)};
  }
  /// Token by flat row-major index.
  std::span<double> token(std::size_t i) {
    return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<const double> token(std::size_t i) const {
    return {data_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  double& at(int r, int c, int k) { return data_[offset(r, c) + k]; }
  double at(int r, int c, int k) const { return data_[offset(r, c) + k]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// True when every value is finite.
  bool finite() const;

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;

 private:
  std::size_t offset(int r, int c) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * dim_;
  }

  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace flashtok
