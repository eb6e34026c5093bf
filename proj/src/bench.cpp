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

#include "flashtok/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "flashtok/errors.hpp"

namespace flashtok {

double BenchSample::mean_tpot() const {
  if (tpot_s.empty()) return 0.0;
  return std::accumulate(tpot_s.begin(), tpot_s.end(), 0.0) /
         static_cast<double>(tpot_s.size());
}

double BenchSample::total_s() const {
  return std::accumulate(tpot_s.begin(), tpot_s.end(), ttft_s);
}

double nearest_rank(std::vector<double> values, int q) {
  if (values.empty()) throw DomainError("percentile of empty set");
  if (q < 1 || q > 100) throw DomainError("percentile must be in 1..100");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t rank = (static_cast<std::size_t>(q) * n + 99) / 100;
  return values[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

// Sum in sorted order so aggregates are independent of sample order.
double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

LatencyStats stats_of(const std::vector<double>& values) {
  return {ordered_sum(values) / static_cast<double>(values.size()),
          nearest_rank(values, 50), nearest_rank(values, 95)};
}

double recompute_tps(const std::vector<BenchSample>& samples) {
  std::vector<double> totals;
  std::int64_t tokens = 0;
  for (const auto& s : samples) {
    tokens += s.n_output_tokens;
    totals.push_back(s.total_s());
  }
  const double time = ordered_sum(totals);
  if (!(time > 0.0)) throw DomainError("total generation time must be positive");
  return static_cast<double>(tokens) / time;
}

void check_sample(const BenchSample& s) {
  if (s.n_output_tokens < 0 || s.tpot_s.size() != static_cast<std::size_t>(s.n_output_tokens)) {
    throw DomainError("sample " + s.image_id + ": tpot list length must equal n_output_tokens");
  }
  if (!(s.ttft_s >= 0.0) ||
      std::any_of(s.tpot_s.begin(), s.tpot_s.end(), [](double t) { return !(t >= 0.0); })) {
    throw DomainError("sample " + s.image_id + ": times must be >= 0");
  }
}

}  // namespace

BenchReport summarize(const std::vector<BenchSample>& samples) {
  if (samples.empty()) throw DomainError("summarize: no samples");
  std::vector<double> ttft;
  std::vector<double> tpot;
  for (const auto& s : samples) {
    check_sample(s);
    ttft.push_back(s.ttft_s);
    tpot.push_back(s.mean_tpot());
  }
  BenchReport report;
  report.samples = samples;
  report.ttft = stats_of(ttft);
  report.tpot = stats_of(tpot);
  report.tps = recompute_tps(samples);
  return report;
}

void check_report(const BenchReport& report) {
  if (report.samples.empty()) return;
  const double expect = recompute_tps(report.samples);
  if (!(std::abs(expect - report.tps) <= 1e-9 * std::abs(expect))) {
    throw DomainError("bench report tps is inconsistent with its samples");
  }
}

BenchReport run_bench(const std::vector<BenchImage>& images,
                      const PipelineConfig& cfg, int n_output_tokens, Clock& clock) {
  if (images.empty()) throw DomainError("run_bench: no images");
  if (n_output_tokens < 0) throw DomainError("run_bench: n_output_tokens must be >= 0");
  cfg.validate();
  const VitParams vit = init_vit(cfg.vit);
  const AdapterParams adapter = init_adapter(cfg.adapter);
  const auto& cost = cfg.cost_model;

  std::vector<BenchSample> samples;
  std::vector<BenchFailure> failures;
  for (const auto& image : images) {
    BenchSample s;
    s.image_id = image.id;
    const double t0 = clock.now();
    std::int64_t visual = 0;
    try {
      const ImageBuffer img = image.pixels ? *image.pixels : decode_image(image.path);
      const TileLayout layout =
          plan_layout(cfg.strategy, img.width(), img.height(), cfg.tiling);
      const TokenGrid features = encode_layout(img, layout, vit, cfg.tiling, 1);
      const TokenGrid embedded = adapter_forward(features, adapter, cfg.adapter);
      visual = static_cast<std::int64_t>(embedded.tokens());
    } catch (const IoError& e) {
      failures.push_back({image.id, e.what()});
      continue;
    } catch (const DecodeError& e) {
      failures.push_back({image.id, e.what()});
      continue;
    }
    const double t1 = clock.now();
    s.encode_s = t1 - t0;
    s.n_visual_tokens = visual;
    s.n_prompt_tokens = cfg.prompt_tokens;
    s.n_output_tokens = n_output_tokens;
    const double ctx = static_cast<double>(visual + cfg.prompt_tokens);
    s.ttft_s = s.encode_s + cost.base_s + cost.per_ctx_s * ctx;
    s.tpot_s.resize(n_output_tokens);
    for (int i = 0; i < n_output_tokens; ++i) {
      s.tpot_s[i] = cost.base_s + cost.per_ctx_s * (ctx + i);
    }
    samples.push_back(std::move(s));
  }

  BenchReport report;
  if (!samples.empty()) report = summarize(samples);
  report.failures = std::move(failures);
  report.config = to_json(cfg);
  report.config["n_output_tokens"] = n_output_tokens;
  check_report(report);
  return report;
}

nlohmann::json report_to_json(const BenchReport& r) {
  using nlohmann::json;
  auto stats = [](const LatencyStats& s) {
    return json{{"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
  };
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"image_id", s.image_id},
                       {"n_visual_tokens", s.n_visual_tokens},
                       {"n_prompt_tokens", s.n_prompt_tokens},
                       {"n_output_tokens", s.n_output_tokens},
                       {"encode_s", s.encode_s},
                       {"ttft_s", s.ttft_s},
                       {"tpot_s", s.tpot_s}});
  }
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"image_id", f.image_id}, {"error", f.error}});
  }
  return {{"samples", samples},
          {"failures", failures},
          {"failed_count", r.failures.size()},
          {"ttft_s", stats(r.ttft)},
          {"tpot_s", stats(r.tpot)},
          {"tps", r.tps},
          {"tps_definition", "sum(n_output_tokens) / sum(ttft_s + sum(tpot_s)); includes prefill"},
          {"config", r.config}};
}

void write_report_csv(const BenchReport& r, std::ostream& out) {
  out << "image_id,n_visual_tokens,ttft_s,mean_tpot_s\n";
  for (const auto& s : r.samples) {
    out << s.image_id << ',' << s.n_visual_tokens << ','
        << std::setprecision(17) << s.ttft_s << ',' << s.mean_tpot() << '\n';
  }
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.tps >= b.tps && a.accuracy >= b.accuracy &&
         (a.tps > b.tps || a.accuracy > b.accuracy);
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
  if (points.empty()) throw DomainError("pareto_front: no points");
  for (const auto& p : points) {
    if (!std::isfinite(p.tps) || !std::isfinite(p.accuracy) || p.accuracy < 0.0 ||
        p.accuracy > 100.0) {
      throw DomainError("pareto point '" + p.name + "' is invalid");
    }
  }
  std::vector<ParetoPoint> sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.tps != b.tps) return a.tps > b.tps;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.name < b.name;
  });
  // Sweep in descending tps: a point survives only if it beats every
  // faster-or-equal point on accuracy.
  std::vector<ParetoPoint> front;
  for (const auto& p : sorted) {
    if (front.empty() || p.accuracy > front.back().accuracy) front.push_back(p);
  }
  return front;
}

std::vector<ParetoPoint> read_pareto_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("pareto CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "name,tps,accuracy") {
    throw DomainError("pareto CSV: header must be 'name,tps,accuracy'");
  }
  std::vector<ParetoPoint> points;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name, tps, acc, extra;
    if (!std::getline(fields, name, ',') || !std::getline(fields, tps, ',') ||
        !std::getline(fields, acc, ',') || std::getline(fields, extra, ',')) {
      throw DomainError("pareto CSV line " + std::to_string(lineno) + ": expected 3 fields");
    }
    try {
      std::size_t used_t = 0, used_a = 0;
      const double t = std::stod(tps, &used_t);
      const double a = std::stod(acc, &used_a);
      if (used_t != tps.size() || used_a != acc.size()) throw std::invalid_argument("trailing");
      points.push_back({name, t, a});
    } catch (const std::exception&) {
      throw DomainError("pareto CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return points;
}

}  // namespace flashtok
