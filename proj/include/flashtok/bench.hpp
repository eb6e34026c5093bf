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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flashtok/image.hpp"
#include "flashtok/pipeline.hpp"

namespace flashtok {

/// Time source for the benchmark loop, in seconds.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
};

class SteadyClock final : public Clock {
 public:
  double now() override {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  }
};

/// Deterministic clock advancing by `tick` seconds per reading. A zero tick
/// makes every measured interval zero.
class FakeClock final : public Clock {
 public:
  explicit FakeClock(double tick = 0.0) : tick_(tick) {}
  double now() override {
    const double t = t_;
    t_ += tick_;
    return t;
  }

 private:
  double tick_;
  double t_ = 0.0;
};

struct BenchSample {
  std::string image_id;
  std::int64_t n_visual_tokens = 0;
  std::int64_t n_prompt_tokens = 0;
  std::int64_t n_output_tokens = 0;
  double encode_s = 0.0;  // measured part of ttft_s
  double ttft_s = 0.0;
  std::vector<double> tpot_s;

  double mean_tpot() const;
  double total_s() const;  // ttft + sum(tpot)
};

struct LatencyStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

struct BenchFailure {
  std::string image_id;
  std::string error;
};

/// tps = sum(n_output_tokens) / sum(ttft_s + sum(tpot_s)). TPOT statistics are
/// over per-sample mean TPOT.
struct BenchReport {
  std::vector<BenchSample> samples;
  std::vector<BenchFailure> failures;
  LatencyStats ttft;
  LatencyStats tpot;
  double tps = 0.0;
  nlohmann::json config;
};

/// Nearest-rank percentile (q in 1..100) of unsorted values.
double nearest_rank(std::vector<double> values, int q);

/// Aggregates samples; the result does not depend on their order. Throws
/// DomainError on empty input.
BenchReport summarize(const std::vector<BenchSample>& samples);

/// Recomputes tps from the report's own samples; throws DomainError if it
/// differs from report.tps by more than 1e-9 relative.
void check_report(const BenchReport& report);

struct BenchImage {
  std::string id;
  std::filesystem::path path;          // decoded inside the timed region
  std::optional<ImageBuffer> pixels;   // used instead of path when set
};

/// Times decode -> layout -> encode_layout -> adapter_forward per image on a
/// single thread and models prefill and decode with cfg.cost_model:
///   ttft   = encode + base + per_ctx * n_ctx
///   tpot_i = base + per_ctx * (n_ctx + i),  i = 0 .. n_output_tokens - 1
/// with n_ctx = visual tokens + prompt tokens. Decode failures are recorded
/// in report.failures and excluded from the aggregates.
BenchReport run_bench(const std::vector<BenchImage>& images,
                      const PipelineConfig& cfg, int n_output_tokens, Clock& clock);

nlohmann::json report_to_json(const BenchReport& report);

/// image_id,n_visual_tokens,ttft_s,mean_tpot_s
void write_report_csv(const BenchReport& report, std::ostream& out);

struct ParetoPoint {
  std::string name;
  double tps = 0.0;
  double accuracy = 0.0;
};

/// True when a is at least as good as b on both axes and strictly better on one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

/// Non-dominated points sorted by descending tps. Exact duplicates collapse to
/// one entry (the lexicographically smallest name). Throws DomainError on
/// empty input, non-finite values, or accuracy outside [0, 100].
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

/// Parses "name,tps,accuracy" CSV (header required).
std::vector<ParetoPoint> read_pareto_csv(std::istream& in);

}  // namespace flashtok
