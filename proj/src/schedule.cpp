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

#include "flashtok/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "flashtok/errors.hpp"

namespace flashtok {

std::string_view trainable_name(Trainable t) {
  switch (t) {
    case Trainable::Adapter: return "Adapter";
    case Trainable::FullModel: return "Full Model";
    case Trainable::LlmPlusAdapter: return "LLM+Adapter";
  }
  return "unknown";
}

std::string_view train_type_name(TrainType t) {
  return t == TrainType::LoRA ? "LoRA" : "Full";
}

void StageConfig::validate() const {
  auto fail = [this](const std::string& m) {
    throw ConfigError("stage " + std::to_string(stage_id) + ": " + m);
  };
  if (stage_id < 1 || stage_id > 5) fail("stage_id must be in 1..5");
  if (!(lr_min >= 0.0 && lr_min <= lr_max)) fail("need 0 <= lr_min <= lr_max");
  if (warmup_steps < 0 || total_steps < 0) fail("step counts must be >= 0");
  if (warmup_steps > total_steps) fail("warmup_steps exceeds total_steps");
  if (epochs < 1) fail("epochs must be >= 1");
}

double lr_at(std::int64_t step, const StageConfig& cfg) {
  cfg.validate();
  if (step < 0 || step > cfg.total_steps) {
    throw DomainError("step " + std::to_string(step) + " outside [0, " +
                      std::to_string(cfg.total_steps) + "]");
  }
  if (step < cfg.warmup_steps) {
    return cfg.lr_max * static_cast<double>(step) /
           static_cast<double>(cfg.warmup_steps);
  }
  const std::int64_t span = cfg.total_steps - cfg.warmup_steps;
  // Degenerate schedule with no decay phase: the final step is the floor.
  if (span == 0) return cfg.lr_min;
  const double progress =
      static_cast<double>(step - cfg.warmup_steps) / static_cast<double>(span);
  return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) *
                          (1.0 + std::cos(std::numbers::pi * progress));
}

std::int64_t steps_for(std::int64_t samples, std::int64_t global_batch, int epochs) {
  if (global_batch < 1) throw DomainError("global batch must be >= 1");
  if (samples < 0 || epochs < 1) throw DomainError("bad sample or epoch count");
  const std::int64_t seen = samples * epochs;
  return (seen + global_batch - 1) / global_batch;
}

std::vector<StageConfig> default_stages(std::int64_t global_batch) {
  struct Row {
    std::int64_t samples;
    Trainable trainable;
    TrainType type;
    double lr_max;
    double lr_min;
    std::int64_t warmup;
  };
  const Row rows[] = {
      {10'000'000, Trainable::Adapter, TrainType::Full, 1.00e-3, 2.00e-5,
       kPretrainWarmupSteps},
      {24'000'000, Trainable::FullModel, TrainType::Full, 1.00e-5, 0.0, 0},
      {6'000'000, Trainable::FullModel, TrainType::Full, 1.00e-5, 0.0, 0},
      {10'000'000, Trainable::FullModel, TrainType::Full, 1.00e-5, 0.0, 0},
      {87'000, Trainable::LlmPlusAdapter, TrainType::LoRA, 1.00e-5, 0.0, 0},
  };
  std::vector<StageConfig> stages;
  int id = 1;
  for (const Row& r : rows) {
    StageConfig s;
    s.stage_id = id++;
    s.resolution = 512;
    s.data_samples = r.samples;
    s.trainable = r.trainable;
    s.train_type = r.type;
    s.lr_max = r.lr_max;
    s.lr_min = r.lr_min;
    s.epochs = 1;
    s.total_steps = steps_for(r.samples, global_batch, s.epochs);
    s.warmup_steps = std::min(r.warmup, s.total_steps);
    s.validate();
    stages.push_back(s);
  }
  return stages;
}

}  // namespace flashtok
