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

#include "rvpan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "rvpan/io.hpp"

namespace rvpan {
namespace {

// Runs `fn` under a timer; library errors are re-raised with the stage name.
template <typename Fn>
auto RunStage(std::vector<StageTiming>& timings, const char* name, Fn&& fn) {
  try {
    StageTimer timer(timings, name);
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "': " + e.message());
  }
}

void CheckShape(const char* what, Index rows, Index cols, const ProjectionConfig& cfg) {
  if (rows != cfg.height || cols != cfg.width) {
    std::ostringstream os;
    os << what << " is " << rows << "x" << cols << ", projection expects " << cfg.height << "x"
       << cfg.width;
    throw Error(ErrorCode::kShapeError, os.str());
  }
}

}  // namespace

double PipelineResult::total_micros() const {
  double sum = 0.0;
  for (const auto& t : timings) sum += t.micros;
  return sum;
}

PipelineResult RunPipeline(const PipelineConfig& cfg, const PipelineInputs& inputs) {
  PipelineResult out;
  auto& timings = out.timings;

  RunStage(timings, "validate", [&] {
    cfg.Validate();
    CheckShape("semantic map", inputs.semantics.rows(), inputs.semantics.cols(), cfg.projection);
    CheckShape("embedding map", inputs.embedding.ex.rows(), inputs.embedding.ex.cols(),
               cfg.projection);
    CheckShape("embedding map", inputs.embedding.ey.rows(), inputs.embedding.ey.cols(),
               cfg.projection);
    return 0;
  });

  out.range = RunStage(timings, "project",
                       [&] { return ProjectToRangeView(inputs.cloud, cfg.projection); });

  if (cfg.stages.normals) {
    RunStage(timings, "normals", [&] {
      const RangeImage half = BuildDenseDepthMap(inputs.cloud, out.range);
      DepthMaps maps = CompleteRangeImage(out.range, half, cfg.completion);
      out.normals = ComputeNormals(maps.completed, cfg.projection, cfg.completion.wrap_azimuth);
      out.completed_depth = std::move(maps.completed);
      return 0;
    });
  }

  EmbeddingMap embedding = RunStage(timings, "mask", [&] {
    EmbeddingMap e;
    e.ex = inputs.embedding.ex;
    e.ey = inputs.embedding.ey;
    // Empty pixels carry no point, whatever the network predicted there.
    e.foreground = ForegroundMask(inputs.semantics, cfg.registry.thing_classes) * out.range.occupancy;
    return e;
  });

  const InstanceResult instances =
      RunStage(timings, "segment", [&] { return SegmentInstances(embedding, cfg.instance); });
  out.num_pillars = static_cast<Index>(instances.graph.pillars.members.size());
  out.num_instances = instances.graph.num_instances();

  std::vector<std::int32_t> point_instance = RunStage(timings, "reproject", [&] {
    out.reprojected_semantics = ReprojectChannel(out.range, inputs.semantics);
    return ReprojectChannel(out.range, instances.instance_ids);
  });

  std::vector<std::int32_t> point_semantic = out.reprojected_semantics;
  if (cfg.stages.knn) {
    point_semantic = RunStage(timings, "knn", [&] {
      return KnnRefine(inputs.cloud, out.range, inputs.semantics, cfg.knn);
    });
  }

  out.labeling = RunStage(timings, "fuse",
                          [&] { return Fuse(point_semantic, point_instance, cfg.registry); });
  return out;
}

PipelineInputs LoadInputs(const PipelineConfig& cfg) {
  std::vector<StageTiming> ignored;
  PipelineInputs in;
  in.cloud = RunStage(ignored, "load_scan", [&] {
    if (cfg.data.scan.empty()) throw Error(ErrorCode::kIoError, "data.scan is not set");
    return io::ReadScanBin(cfg.data.scan);
  });
  in.semantics = RunStage(ignored, "load_semantics", [&] {
    if (cfg.data.semantics.empty()) throw Error(ErrorCode::kIoError, "data.semantics is not set");
    return io::SemanticFromMap(io::ReadU16Map(cfg.data.semantics));
  });
  in.embedding = RunStage(ignored, "load_embeddings", [&] {
    if (cfg.data.embeddings.empty()) {
      throw Error(ErrorCode::kIoError, "data.embeddings is not set");
    }
    return io::EmbeddingFromMap(io::ReadFloatMap(cfg.data.embeddings));
  });
  return in;
}

PipelineInputs SyntheticInputs(const synth::Scene& scene, const PipelineConfig& cfg) {
  const synth::ProjectedScene projected = ProjectScene(scene, cfg.projection, cfg.registry);
  PipelineInputs in;
  in.cloud = scene.cloud;
  in.semantics = projected.semantic;
  in.embedding = projected.embedding;
  return in;
}

double Percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "percentile of no samples");
  if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::kInvalidParams, "percentile q must be in (0, 1]");
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
  return samples[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

StageStats Summarize(std::string name, const std::vector<double>& samples) {
  StageStats s;
  s.name = std::move(name);
  s.samples = samples.size();
  if (samples.empty()) return s;
  s.p50 = Percentile(samples, 0.50);
  s.p95 = Percentile(samples, 0.95);
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  return s;
}

}  // namespace

BenchReport Benchmark(const PipelineConfig& cfg, const std::vector<PipelineInputs>& frames,
                      int repetitions) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "benchmark needs at least one frame");
  if (repetitions < 1) throw Error(ErrorCode::kInvalidParams, "repetitions must be >= 1");

  for (const auto& f : frames) RunPipeline(cfg, f);  // warm-up, not recorded

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> per_stage;
  std::vector<double> totals;
  BenchReport report;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (const auto& f : frames) {
      const PipelineResult r = RunPipeline(cfg, f);
      for (const auto& t : r.timings) {
        if (!per_stage.count(t.name)) order.push_back(t.name);
        per_stage[t.name].push_back(t.micros);
      }
      totals.push_back(r.total_micros());
      if (rep == 0) report.pillars_per_frame.push_back(r.num_pillars);
    }
  }

  for (const auto& name : order) report.stages.push_back(Summarize(name, per_stage[name]));
  report.end_to_end = Summarize("end_to_end", totals);
  report.hz = report.end_to_end.mean > 0.0 ? 1e6 / report.end_to_end.mean : 0.0;
  report.frames = frames.size();
  report.repetitions = repetitions;
  report.timer_overhead_us = MeasureTimerOverhead(10000);
  return report;
}

double MeasureTimerOverhead(int iterations) {
  if (iterations < 1) throw Error(ErrorCode::kInvalidParams, "iterations must be >= 1");
  std::vector<StageTiming> sink;
  sink.reserve(static_cast<std::size_t>(iterations));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < iterations; ++i) {
    StageTimer t(sink, "empty");
  }
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::micro>(end - start).count() / iterations;
}

std::string FormatBenchReport(const BenchReport& report) {
  std::ostringstream os;
  char line[160];
  os << "frames=" << report.frames << " repetitions=" << report.repetitions
     << " (warm-up pass excluded)\n";
  os << "timings cover post-processing only; network inference is not included\n";
  std::snprintf(line, sizeof line, "%-12s %12s %12s %12s\n", "stage", "p50_us", "p95_us", "mean_us");
  os << line;
  auto row = [&](const StageStats& s) {
    std::snprintf(line, sizeof line, "%-12s %12.1f %12.1f %12.1f\n", s.name.c_str(), s.p50, s.p95,
                  s.mean);
    os << line;
  };
  for (const auto& s : report.stages) row(s);
  row(report.end_to_end);
  std::snprintf(line, sizeof line, "throughput_hz %.2f\n", report.hz);
  os << line;
  std::snprintf(line, sizeof line, "timer_overhead_us %.4f\n", report.timer_overhead_us);
  os << line;
  os << "pillars_per_frame";
  for (Index m : report.pillars_per_frame) os << ' ' << m;
  os << " (reference average at grid 0.15 m: 141)\n";
  return os.str();
}

}  // namespace rvpan
