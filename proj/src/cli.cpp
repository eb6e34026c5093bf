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

#include "flashtok/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "flashtok/adapter.hpp"
#include "flashtok/bench.hpp"
#include "flashtok/encoder.hpp"
#include "flashtok/errors.hpp"
#include "flashtok/image.hpp"
#include "flashtok/parallel.hpp"
#include "flashtok/pipeline.hpp"
#include "flashtok/schedule.hpp"
#include "flashtok/serialize.hpp"
#include "flashtok/tiling.hpp"

namespace flashtok {

namespace {

// Flags shared by the pipeline-driven commands.
struct PipelineFlags {
  std::string preset;
  std::string config_path;
  std::string strategy;
  std::uint64_t seed = kDefaultSeed;
  std::optional<int> patch_size;
  std::optional<int> grid_side;
  std::optional<double> overlap_rate;
  std::optional<int> max_tiles;
  std::optional<int> shuffle;
  std::optional<bool> compress_after_iss;
  std::optional<int> vit_dim;
  std::optional<int> vit_depth;
  std::optional<int> vit_heads;
  std::optional<int> adapter_out;
  std::optional<int> adapter_hidden;
};

const std::map<std::string, Strategy> kStrategies{
    {"static", Strategy::Static},
    {"dynamic", Strategy::DynamicCrop},
    {"overlap", Strategy::OverlapCrop},
    {"iss", Strategy::ISS}};

void add_pipeline_flags(CLI::App& cmd, PipelineFlags& f) {
  std::vector<std::string> presets = preset_names();
  std::vector<std::string> strategies;
  for (const auto& [name, _] : kStrategies) strategies.push_back(name);
  cmd.add_option("--preset", f.preset, "Named configuration")
      ->check(CLI::IsMember(presets));
  cmd.add_option("--config", f.config_path, "JSON config merged over the preset")
      ->check(CLI::ExistingFile);
  cmd.add_option("--strategy", f.strategy, "static | dynamic | overlap | iss")
      ->check(CLI::IsMember(strategies));
  cmd.add_option("--seed", f.seed, "Parameter seed (vit = seed, adapter = seed + 1)")
      ->capture_default_str();
  cmd.add_option("--patch-size", f.patch_size, "Patch edge in pixels");
  cmd.add_option("--grid-side", f.grid_side, "Patches per tile edge");
  cmd.add_option("--overlap-rate", f.overlap_rate, "Discarded fraction per tile edge (ISS)");
  cmd.add_option("--max-tiles", f.max_tiles, "Tile budget");
  cmd.add_option("--shuffle", f.shuffle, "Pixel-shuffle factor");
  cmd.add_option("--compress-after-iss", f.compress_after_iss,
                 "Pixel-shuffle retained ISS tokens (true|false)");
  cmd.add_option("--vit-dim", f.vit_dim, "Encoder width");
  cmd.add_option("--vit-depth", f.vit_depth, "Encoder blocks");
  cmd.add_option("--vit-heads", f.vit_heads, "Attention heads");
  cmd.add_option("--adapter-out", f.adapter_out, "Adapter output width");
  cmd.add_option("--adapter-hidden", f.adapter_hidden, "Adapter hidden width");
}

std::string default_preset_for(Strategy s) {
  switch (s) {
    case Strategy::Static: return "static-siglip2like";
    case Strategy::ISS: return "iss-aimv2like";
    default: return "dynamic-aimv2like";
  }
}

// preset -> config file -> flags (flags win), then cross-field validation.
PipelineConfig resolve_config(const PipelineFlags& f, const CLI::App& cmd) {
  std::optional<Strategy> strategy;
  if (!f.strategy.empty()) strategy = kStrategies.at(f.strategy);
  std::string name = f.preset;
  if (name.empty()) name = default_preset_for(strategy.value_or(Strategy::Static));
  PipelineConfig cfg = *preset(name);

  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw IoError("cannot open config " + f.config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config ") + f.config_path + ": " + e.what());
    }
    merge_json(cfg, doc);
  }

  if (strategy) cfg.strategy = *strategy;
  if (f.patch_size) cfg.tiling.patch_size = cfg.vit.patch_size = *f.patch_size;
  if (f.grid_side) cfg.tiling.tile_grid_side = cfg.vit.grid_side = *f.grid_side;
  if (f.overlap_rate) cfg.tiling.overlap_rate = *f.overlap_rate;
  if (f.max_tiles) cfg.tiling.max_tiles = *f.max_tiles;
  if (f.shuffle) cfg.tiling.shuffle_factor = *f.shuffle;
  if (f.compress_after_iss) cfg.tiling.compress_after_iss = *f.compress_after_iss;
  if (f.vit_dim) cfg.vit.dim = cfg.adapter.in_dim = *f.vit_dim;
  if (f.vit_depth) cfg.vit.depth = *f.vit_depth;
  if (f.vit_heads) cfg.vit.heads = *f.vit_heads;
  if (f.adapter_out) cfg.adapter.out_dim = *f.adapter_out;
  if (f.adapter_hidden) cfg.adapter.hidden_dim = *f.adapter_hidden;
  if (cmd.count("--seed") > 0 || f.config_path.empty()) cfg.apply_seed(f.seed);
  if (strategy || f.shuffle || f.compress_after_iss) {
    cfg.adapter.shuffle_factor = effective_shuffle_factor(cfg.strategy, cfg.tiling);
  }
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

nlohmann::json token_counts(const TileLayout& layout, const TilingConfig& cfg) {
  return {{"vit", count_vit_tokens(layout)}, {"llm", count_llm_tokens(layout, cfg)}};
}

// ---- tile ------------------------------------------------------------------

struct TileArgs {
  PipelineFlags pipeline;
  std::string image;
  std::string out_path;
  bool ascii = false;
};

int cmd_tile(const TileArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  const PipelineConfig cfg = resolve_config(a.pipeline, cmd);
  const ImageBuffer img = decode_image(a.image);
  const TileLayout layout = plan_layout(cfg.strategy, img.width(), img.height(), cfg.tiling);
  nlohmann::json doc = layout_to_json(layout);
  doc["image"] = {{"path", a.image}, {"w", img.width()}, {"h", img.height()}};
  doc["tokens"] = token_counts(layout, cfg.tiling);
  doc["seed"] = cfg.seed;
  doc["config"] = to_json(cfg);
  const std::string text = doc.dump(2) + "\n";
  if (a.out_path.empty()) {
    out << text;
    if (a.ascii) err << render_ascii(layout);
  } else {
    write_text(a.out_path, text);
    if (a.ascii) out << render_ascii(layout);
  }
  return kExitOk;
}

// ---- tokens ----------------------------------------------------------------

struct TokensArgs {
  PipelineFlags pipeline;
  int width = 512;
  int height = 512;
  std::string sweep;
};

std::vector<std::pair<int, int>> parse_sizes(const std::string& sizes_arg) {
  std::string text;
  std::ifstream file(sizes_arg);
  if (file) {
    std::stringstream ss;
    ss << file.rdbuf();
    text = ss.str();
  } else {
    text = sizes_arg;
  }
  // Accept "WxH,WxH" lists or CSV lines "w,h" (optional "width,height" header).
  std::vector<std::pair<int, int>> sizes;
  auto parse_pair = [&](const std::string& item, char sep) {
    const auto pos = item.find(sep);
    if (pos == std::string::npos) throw ConfigError("bad size '" + item + "'");
    try {
      std::size_t u1 = 0, u2 = 0;
      const std::string ws = item.substr(0, pos), hs = item.substr(pos + 1);
      const int w = std::stoi(ws, &u1);
      const int h = std::stoi(hs, &u2);
      if (u1 != ws.size() || u2 != hs.size() || w < 1 || h < 1) throw std::invalid_argument("");
      sizes.emplace_back(w, h);
    } catch (const std::logic_error&) {
      throw ConfigError("bad size '" + item + "'");
    }
  };
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](char c) { return std::isspace(static_cast<unsigned char>(c)); }),
               line.end());
    if (line.empty() || line == "width,height") continue;
    if (line.find('x') != std::string::npos) {
      std::istringstream items(line);
      std::string item;
      while (std::getline(items, item, ',')) {
        if (!item.empty()) parse_pair(item, 'x');
      }
    } else {
      parse_pair(line, ',');
    }
  }
  if (sizes.empty()) throw ConfigError("--sweep: no sizes given");
  return sizes;
}

int cmd_tokens(const TokensArgs& a, const CLI::App& cmd, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a.pipeline, cmd);
  if (!a.sweep.empty()) {
    out << "width,height,strategy,grid_rows,grid_cols,vit_tokens,llm_tokens\n";
    for (const auto& [w, h] : parse_sizes(a.sweep)) {
      const TileLayout layout = plan_layout(cfg.strategy, w, h, cfg.tiling);
      out << w << ',' << h << ',' << strategy_name(cfg.strategy) << ','
          << layout.grid_rows << ',' << layout.grid_cols << ','
          << count_vit_tokens(layout) << ',' << count_llm_tokens(layout, cfg.tiling)
          << '\n';
    }
    return kExitOk;
  }
  if (a.width < 1 || a.height < 1) throw ConfigError("--width/--height must be positive");
  const TileLayout layout = plan_layout(cfg.strategy, a.width, a.height, cfg.tiling);
  out << "vit=" << count_vit_tokens(layout) << " llm=" << count_llm_tokens(layout, cfg.tiling)
      << '\n';
  return kExitOk;
}

// ---- encode ----------------------------------------------------------------

struct EncodeArgs {
  PipelineFlags pipeline;
  std::string image;
  std::string out_path;
  std::string stage = "encoder";
  std::string save_adapter;
};

int cmd_encode(const EncodeArgs& a, const CLI::App& cmd, std::ostream& out) {
  const PipelineConfig cfg = resolve_config(a.pipeline, cmd);
  const ImageBuffer img = decode_image(a.image);
  const TileLayout layout = plan_layout(cfg.strategy, img.width(), img.height(), cfg.tiling);
  const VitParams vit = init_vit(cfg.vit);
  TokenGrid features = encode_layout(img, layout, vit, cfg.tiling, default_worker_count());
  if (a.stage == "adapter" || !a.save_adapter.empty()) {
    const AdapterParams adapter = init_adapter(cfg.adapter);
    if (!a.save_adapter.empty()) write_adapter_params(adapter, a.save_adapter);
    if (a.stage == "adapter") features = adapter_forward(features, adapter, cfg.adapter);
  }
  write_feature_dump(features, a.out_path);
  nlohmann::json meta{{"features", a.out_path},
                      {"stage", a.stage},
                      {"rows", features.rows()},
                      {"cols", features.cols()},
                      {"dim", features.dim()},
                      {"seed", cfg.seed},
                      {"layout", layout_to_json(layout)},
                      {"config", to_json(cfg)}};
  write_text(a.out_path + ".json", meta.dump(2) + "\n");
  out << "wrote " << a.out_path << " (" << features.rows() << "x" << features.cols() << "x"
      << features.dim() << ")\n";
  return kExitOk;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  PipelineFlags pipeline;
  std::vector<std::string> images;
  int n_out = 128;
  int prompt_tokens = -1;
  std::optional<double> base_s;
  std::optional<double> per_ctx_s;
  bool fake_clock = false;
  std::string json_path;
  std::string csv_path;
};

bool is_image_file(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".ppm" || ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::vector<BenchImage> collect_images(const std::vector<std::string>& inputs) {
  std::vector<BenchImage> images;
  for (const auto& input : inputs) {
    const std::filesystem::path p(input);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) images.push_back({f.filename().string(), f, std::nullopt});
    } else {
      images.push_back({p.filename().string(), p, std::nullopt});
    }
  }
  if (images.empty()) throw ConfigError("--images: no images found");
  return images;
}

int cmd_bench(const BenchArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg = resolve_config(a.pipeline, cmd);
  if (a.prompt_tokens >= 0) cfg.prompt_tokens = a.prompt_tokens;
  if (a.base_s) cfg.cost_model.base_s = *a.base_s;
  if (a.per_ctx_s) cfg.cost_model.per_ctx_s = *a.per_ctx_s;
  cfg.validate();
  if (a.n_out < 0) throw ConfigError("--n-out must be >= 0");
  const auto images = collect_images(a.images);

  SteadyClock steady;
  FakeClock fake(0.0);
  Clock& clock = a.fake_clock ? static_cast<Clock&>(fake) : steady;
  BenchReport report = run_bench(images, cfg, a.n_out, clock);
  report.config["clock"] = a.fake_clock ? "fake" : "steady";

  const std::string json_text = report_to_json(report).dump(2) + "\n";
  if (a.json_path.empty()) {
    out << json_text;
  } else {
    write_text(a.json_path, json_text);
  }
  if (!a.csv_path.empty()) {
    std::ostringstream csv;
    write_report_csv(report, csv);
    write_text(a.csv_path, csv.str());
  }
  for (const auto& f : report.failures) err << "failed: " << f.image_id << ": " << f.error << '\n';
  return report.samples.empty() ? kExitRuntime : kExitOk;
}

// ---- schedule --------------------------------------------------------------

struct ScheduleArgs {
  int stage = 1;
  std::int64_t batch = 240;
  std::optional<std::int64_t> samples;
  std::optional<std::int64_t> warmup;
  std::int64_t every = 1;
  std::string out_path;
};

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  if (a.batch < 1) throw ConfigError("--batch must be >= 1");
  if (a.every < 1) throw ConfigError("--every must be >= 1");
  StageConfig s = default_stages(a.batch).at(a.stage - 1);
  if (a.samples) {
    if (*a.samples < 0) throw ConfigError("--samples must be >= 0");
    s.data_samples = *a.samples;
    s.total_steps = steps_for(s.data_samples, a.batch, s.epochs);
    s.warmup_steps = std::min(s.warmup_steps, s.total_steps);
  }
  if (a.warmup) s.warmup_steps = *a.warmup;
  s.validate();
  std::ostringstream csv;
  csv << "step,lr\n" << std::setprecision(17);
  for (std::int64_t step = 0; step <= s.total_steps; step += a.every) {
    csv << step << ',' << lr_at(step, s) << '\n';
  }
  if (s.total_steps % a.every != 0) {
    csv << s.total_steps << ',' << lr_at(s.total_steps, s) << '\n';
  }
  if (a.out_path.empty()) {
    out << csv.str();
  } else {
    write_text(a.out_path, csv.str());
  }
  return kExitOk;
}

// ---- pareto ----------------------------------------------------------------

struct ParetoArgs {
  std::string input;
  std::string json_path;
};

int cmd_pareto(const ParetoArgs& a, std::ostream& out) {
  std::ifstream in(a.input);
  if (!in) throw IoError("cannot open " + a.input);
  std::vector<ParetoPoint> points;
  try {
    points = read_pareto_csv(in);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto front = pareto_front(points);
  out << "name,tps,accuracy\n";
  for (const auto& p : front) out << p.name << ',' << p.tps << ',' << p.accuracy << '\n';
  if (!a.json_path.empty()) {
    nlohmann::json doc{{"input", a.input}, {"front", nlohmann::json::array()}};
    for (const auto& p : points) {
      const bool on_front = std::any_of(front.begin(), front.end(), [&](const ParetoPoint& f) {
        return f.name == p.name && f.tps == p.tps && f.accuracy == p.accuracy;
      });
      doc["points"].push_back(
          {{"name", p.name}, {"tps", p.tps}, {"accuracy", p.accuracy}, {"on_front", on_front}});
    }
    for (const auto& p : front) {
      doc["front"].push_back({{"name", p.name}, {"tps", p.tps}, {"accuracy", p.accuracy}});
    }
    write_text(a.json_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flashtok: tiling, token budgets, visual encoding and latency analysis"};
  app.name("flashtok");
  app.require_subcommand(1);

  TileArgs tile;
  auto* tile_cmd = app.add_subcommand("tile", "Plan a tile layout for an image and emit JSON");
  add_pipeline_flags(*tile_cmd, tile.pipeline);
  tile_cmd->add_option("--image", tile.image, "Input image (PNG, JPEG, PPM)")->required();
  tile_cmd->add_option("--out", tile.out_path, "Write JSON here instead of stdout");
  tile_cmd->add_flag("--ascii", tile.ascii, "Render a text diagram of the tiles");

  TokensArgs tokens;
  auto* tokens_cmd = app.add_subcommand("tokens", "Encoder and LLM token counts");
  add_pipeline_flags(*tokens_cmd, tokens.pipeline);
  tokens_cmd->add_option("--width", tokens.width, "Image width")->capture_default_str();
  tokens_cmd->add_option("--height", tokens.height, "Image height")->capture_default_str();
  tokens_cmd->add_option("--sweep", tokens.sweep,
                         "Size list (\"800x600,1024x768\") or CSV file of width,height");

  EncodeArgs encode;
  auto* encode_cmd = app.add_subcommand("encode", "Encode an image and write an FVTK feature dump");
  add_pipeline_flags(*encode_cmd, encode.pipeline);
  encode_cmd->add_option("--image", encode.image, "Input image")->required();
  encode_cmd->add_option("--out", encode.out_path, "Feature dump path")->required();
  encode_cmd->add_option("--stage", encode.stage, "encoder | adapter")
      ->check(CLI::IsMember({"encoder", "adapter"}))
      ->capture_default_str();
  encode_cmd->add_option("--save-adapter", encode.save_adapter,
                         "Also write the adapter parameters (FVTK tensor container)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "TTFT / TPOT / TPS benchmark");
  add_pipeline_flags(*bench_cmd, bench.pipeline);
  bench_cmd->add_option("--images", bench.images, "Image directory or files")->required();
  bench_cmd->add_option("--n-out", bench.n_out, "Output tokens per image")->capture_default_str();
  bench_cmd->add_option("--prompt-tokens", bench.prompt_tokens, "Text prompt tokens");
  bench_cmd->add_option("--base-s", bench.base_s, "Decode cost per token (s)");
  bench_cmd->add_option("--per-ctx-s", bench.per_ctx_s, "Decode cost per context token (s)");
  bench_cmd->add_flag("--fake-clock", bench.fake_clock, "Zero-time deterministic clock");
  bench_cmd->add_option("--json", bench.json_path, "Report JSON path (default stdout)");
  bench_cmd->add_option("--csv", bench.csv_path, "Per-sample CSV path");

  ScheduleArgs sched;
  auto* sched_cmd = app.add_subcommand("schedule", "Learning-rate schedule as step,lr CSV");
  sched_cmd->add_option("--stage", sched.stage, "Stage 1..5")
      ->check(CLI::Range(1, 5))
      ->capture_default_str();
  sched_cmd->add_option("--batch", sched.batch, "Global batch size")->capture_default_str();
  sched_cmd->add_option("--samples", sched.samples, "Override the stage's sample count");
  sched_cmd->add_option("--warmup", sched.warmup, "Override warmup steps");
  sched_cmd->add_option("--every", sched.every, "Emit every N-th step (final step always)")
      ->capture_default_str();
  sched_cmd->add_option("--out", sched.out_path, "CSV path (default stdout)");

  ParetoArgs pareto;
  auto* pareto_cmd = app.add_subcommand("pareto", "Pareto front of name,tps,accuracy points");
  pareto_cmd->add_option("input", pareto.input, "CSV with header name,tps,accuracy")->required();
  pareto_cmd->add_option("--json", pareto.json_path, "Also write a JSON document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*tile_cmd) return cmd_tile(tile, *tile_cmd, out, err);
    if (*tokens_cmd) return cmd_tokens(tokens, *tokens_cmd, out);
    if (*encode_cmd) return cmd_encode(encode, *encode_cmd, out);
    if (*bench_cmd) return cmd_bench(bench, *bench_cmd, out, err);
    if (*sched_cmd) return cmd_schedule(sched, out);
    if (*pareto_cmd) return cmd_pareto(pareto, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace flashtok
