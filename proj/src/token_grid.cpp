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

#include "flashtok/token_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flashtok/errors.hpp"

namespace flashtok {

TokenGrid::TokenGrid(int rows, int cols, int dim)
    : rows_(rows), cols_(cols), dim_(dim) {
  if (rows < 0 || cols < 0 || dim < 0) {
    throw GeometryError("token grid dims must be non-negative");
  }
  data_.assign(tokens() * static_cast<std::size_t>(dim), 0.0);
}

TokenGrid::TokenGrid(int rows, int cols, int dim, std::vector<double> data)
    : TokenGrid(rows, cols, dim) {
  if (data.size() != data_.size()) {
    throw GeometryError("token grid data length " + std::to_string(data.size()) +
                        " != " + std::to_string(data_.size()));
  }
  data_ = std::move(data);
}

bool TokenGrid::finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace flashtok
