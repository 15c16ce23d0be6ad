// Copyright 2026 The rvpan Authors.
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

// rvpan command line. Every subcommand reads an optional --config file and
// accepts `--section.key value` overrides (flag > file > default).
//
// Exit codes: 0 ok, 2 configuration, 3 file format, 4 consistency, 1 other.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rvpan/config.hpp"
#include "rvpan/io.hpp"
#include "rvpan/metrics.hpp"
#include "rvpan/pipeline.hpp"
#include "rvpan/synth.hpp"

namespace fs = std::filesystem;
using namespace rvpan;

namespace {

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kInvalidParams:
    case ErrorCode::kInvalidWindow:
      return 2;
    case ErrorCode::kFormatError:
      return 3;
    case ErrorCode::kConsistencyError:
      return 4;
    default:
      return 1;
  }
}

// Turns leftover `--a.b value` / `--a.b=value` arguments into overrides.
void ApplyOverrides(const std::vector<std::string>& extras, KeyValueConfig& kv) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.find('.') == std::string::npos) {
      throw Error(ErrorCode::kConfigError, "unexpected argument '" + arg + "'");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= extras.size()) throw Error(ErrorCode::kConfigError, "missing value for --" + key);
      value = extras[++i];
    }
    kv.Set(key, value);
  }
}

struct Common {
  std::string config_path;
  KeyValueConfig kv;

  PipelineConfig Pipeline() const {
    PipelineConfig cfg = PipelineConfigFrom(kv);
    cfg.Validate();
    return cfg;
  }
};

std::string RequireOutput(const PipelineConfig& cfg) {
  if (cfg.data.output.empty()) throw Error(ErrorCode::kConfigError, "data.output is not set");
  return cfg.data.output;
}

int CmdProject(const Common& c) {
  const PipelineConfig cfg = c.Pipeline();
  const PointCloud cloud = io::ReadScanBin(cfg.data.scan);
  const RangeImage ri = ProjectToRangeView(cloud, cfg.projection);
  io::WriteFloatMap(RequireOutput(cfg),
                    io::PackChannels({&ri.depth, &ri.x, &ri.y, &ri.z, &ri.remission}));
  std::printf("points=%lld pixels=%dx%d occupied=%.4f\n", static_cast<long long>(cloud.size()),
              cfg.projection.height, cfg.projection.width, ri.occupied_fraction());
  return 0;
}

int CmdNormals(const Common& c) {
  const PipelineConfig cfg = c.Pipeline();
  const PointCloud cloud = io::ReadScanBin(cfg.data.scan);
  const RangeImage ri = ProjectToRangeView(cloud, cfg.projection);
  const RangeImage half = BuildDenseDepthMap(cloud, ri);
  const DepthMaps maps = CompleteRangeImage(ri, half, cfg.completion);
  const NormalMap normals = ComputeNormals(maps.completed, cfg.projection, cfg.completion.wrap_azimuth);
  io::WriteFloatMap(RequireOutput(cfg), io::NormalsToMap(maps.completed, normals));
  std::printf("valid_normals=%.4f\n", normals.valid.cast<double>().mean());
  return 0;
}

void PrintTimings(const PipelineResult& r) {
  for (const auto& t : r.timings) std::printf("%-10s %10.1f us\n", t.name.c_str(), t.micros);
  std::printf("%-10s %10.1f us\n", "total", r.total_micros());
  std::printf("pillars=%lld instances=%d\n", static_cast<long long>(r.num_pillars), r.num_instances);
}

int CmdSegment(const Common& c) {
  const PipelineConfig cfg = c.Pipeline();
  const PipelineInputs inputs = LoadInputs(cfg);
  const PipelineResult r = RunPipeline(cfg, inputs);
  io::WritePanoptic(RequireOutput(cfg), r.labeling);
  PrintTimings(r);
  if (!cfg.data.labels.empty()) {
    const auto gt_labels = io::ReadLabels(cfg.data.labels, static_cast<std::size_t>(inputs.cloud.size()));
    PanopticLabeling gt{{}, {}, cfg.registry};
    for (const auto& l : gt_labels) {
      gt.semantic.push_back(l.semantic);
      gt.instance.push_back(l.instance);
    }
    std::cout << FormatReportTable(Evaluate(r.labeling, gt, {0, cfg.eval_min_points}));
  }
  return 0;
}

PanopticLabeling ReadLabeling(const std::string& path, const ClassRegistry& registry,
                              std::optional<std::size_t> expected) {
  PanopticLabeling out{{}, {}, registry};
  for (const auto& l : io::ReadLabels(path, expected)) {
    out.semantic.push_back(l.semantic);
    out.instance.push_back(l.instance);
  }
  return out;
}

int CmdEval(const Common& c, const std::string& pred_path, const std::string& gt_path,
            const std::string& format) {
  const PipelineConfig cfg = c.Pipeline();
  const PanopticLabeling gt = ReadLabeling(gt_path, cfg.registry, std::nullopt);
  const PanopticLabeling pred = ReadLabeling(pred_path, cfg.registry, gt.semantic.size());
  const PqReport report = Evaluate(pred, gt, {0, cfg.eval_min_points});
  std::cout << (format == "kv" ? FormatReportKeyValue(report) : FormatReportTable(report));
  return 0;
}

int CmdBench(const Common& c, int frames, int repetitions, int instances, long long seed,
             double sigma) {
  const PipelineConfig cfg = c.Pipeline();
  std::vector<PipelineInputs> inputs;
  if (!cfg.data.scan.empty()) {
    inputs.push_back(LoadInputs(cfg));
  } else {
    synth::RandomSceneOptions opts;
    opts.min_instances = opts.max_instances = instances;
    opts.embedding_sigma = sigma;
    opts.min_distance = 10.0;
    opts.max_distance = 45.0;
    opts.sensor.projection = cfg.projection;
    for (int f = 0; f < frames; ++f) {
      const auto spec = synth::RandomSceneSpec(static_cast<std::uint64_t>(seed + f), opts);
      inputs.push_back(SyntheticInputs(synth::GenerateScene(spec), cfg));
    }
  }
  std::cout << FormatBenchReport(Benchmark(cfg, inputs, repetitions));
  return 0;
}

int CmdSynth(const Common& c, const std::string& stem) {
  const PipelineConfig cfg = c.Pipeline();
  synth::SceneSpec spec = SceneSpecFrom(c.kv);
  spec.sensor.projection = cfg.projection;
  spec.registry = cfg.registry;
  const synth::Scene scene = synth::GenerateScene(spec);
  const synth::ProjectedScene projected = synth::ProjectScene(scene, cfg.projection, cfg.registry);

  const fs::path dir = RequireOutput(cfg);
  fs::create_directories(dir);
  io::WriteScanBin(dir / (stem + ".bin"), scene.cloud);
  io::WriteLabels(dir / (stem + ".label"), *scene.cloud.labels);
  io::WriteU16Map(dir / (stem + ".sem"), io::SemanticToMap(projected.semantic));
  io::WriteFloatMap(dir / (stem + ".emb"), io::EmbeddingToMap(projected.embedding));
  std::printf("points=%lld foreground=%zu instances=%zu\n", static_cast<long long>(scene.cloud.size()),
              scene.num_foreground, scene.centroids.size());
  std::printf("wrote %s/%s.{bin,label,sem,emb}\n", dir.string().c_str(), stem.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-view LiDAR panoptic segmentation tools"};
  app.require_subcommand(1);

  Common common;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->allow_extras();
    sub->add_option("--config", common.config_path, "key = value configuration file");
    return sub;
  };
  CLI::App* project = add("project", "Project a scan to a range image (5-channel float map)");
  CLI::App* normals = add("normals", "Complete depth and estimate normals (depth,nx,ny,nz map)");
  CLI::App* segment = add("segment", "Run the full pipeline and write panoptic labels");
  CLI::App* eval = add("eval", "Panoptic quality of a prediction against ground truth");
  CLI::App* bench = add("bench", "Per-stage timing report (p50/p95, Hz)");
  CLI::App* synth = add("synth", "Generate a synthetic scan with labels and ideal predictions");

  std::string pred_path, gt_path, format = "table";
  eval->add_option("--pred", pred_path, "predicted .label file")->required();
  eval->add_option("--gt", gt_path, "ground-truth .label file")->required();
  eval->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}));

  int frames = 5, repetitions = 10, instances = 12;
  long long seed = 1;
  bench->add_option("--frames", frames, "synthetic frames when data.scan is unset")
      ->check(CLI::PositiveNumber);
  bench->add_option("--repetitions", repetitions, "measured passes")->check(CLI::PositiveNumber);
  bench->add_option("--instances", instances, "instances per synthetic frame")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "first synthetic seed");
  double sigma = 0.1;
  bench->add_option("--sigma", sigma, "embedding noise of synthetic frames (m)")
      ->check(CLI::NonNegativeNumber);

  std::string stem = "scene";
  synth->add_option("--stem", stem, "output file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!common.config_path.empty()) common.kv = KeyValueConfig::Load(common.config_path);
    ApplyOverrides(sub->remaining(), common.kv);

    if (sub == project) return CmdProject(common);
    if (sub == normals) return CmdNormals(common);
    if (sub == segment) return CmdSegment(common);
    if (sub == eval) return CmdEval(common, pred_path, gt_path, format);
    if (sub == bench) return CmdBench(common, frames, repetitions, instances, seed, sigma);
    if (sub == synth) return CmdSynth(common, stem);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
