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

#include <cstdint>
#include <string_view>
#include <vector>

namespace flashtok {

enum class Trainable { Adapter, FullModel, LlmPlusAdapter };
enum class TrainType { Full, LoRA };

std::string_view trainable_name(Trainable t);
std::string_view train_type_name(TrainType t);

struct StageConfig {
  int stage_id = 1;
  int resolution = 512;
  std::int64_t data_samples = 0;
  Trainable trainable = Trainable::Adapter;
  TrainType train_type = TrainType::Full;
  double lr_max = 0.0;
  double lr_min = 0.0;
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 0;
  int epochs = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Linear warmup from 0 to lr_max, then cosine decay to lr_min at total_steps.
/// Throws DomainError for steps outside [0, total_steps].
double lr_at(std::int64_t step, const StageConfig& cfg);

/// ceil(samples * epochs / batch).
std::int64_t steps_for(std::int64_t samples, std::int64_t global_batch, int epochs = 1);

inline constexpr std::int64_t kPretrainWarmupSteps = 400;

/// The five-stage recipe (pre-train, three fine-tunes, DPO) with total_steps
/// derived from each stage's sample count and the given global batch.
std::vector<StageConfig> default_stages(std::int64_t global_batch);

}  // namespace flashtok
