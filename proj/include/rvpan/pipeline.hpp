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

// Frame pipeline: project -> complete depth + normals -> foreground mask ->
// cluster-free instances -> reproject -> KNN refine -> fuse.
//
// Semantic predictions and instance embeddings enter as range-view images so
// the pipeline runs without any inference runtime.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "rvpan/config.hpp"
#include "rvpan/depth_completion.hpp"
#include "rvpan/fusion.hpp"
#include "rvpan/instance.hpp"
#include "rvpan/synth.hpp"

namespace rvpan {

struct PipelineInputs {
  PointCloud cloud;
  Image<std::int32_t> semantics;  // H x W predicted class per pixel
  EmbeddingMap embedding;         // H x W; the mask is recomputed from `semantics`
};

struct StageTiming {
  std::string name;
  double micros = 0.0;
};

struct PipelineResult {
  PanopticLabeling labeling;
  std::vector<StageTiming> timings;
  RangeImage range;
  std::optional<NormalMap> normals;
  std::optional<ImageD> completed_depth;
  std::vector<std::int32_t> reprojected_semantics;  // before KNN refinement
  Index num_pillars = 0;
  std::int32_t num_instances = 0;

  double total_micros() const;
};

/// Errors are rethrown with the failing stage named in the message.
PipelineResult RunPipeline(const PipelineConfig& cfg, const PipelineInputs& inputs);

/// Reads the scan, semantic map and embedding map named in `cfg.data`.
PipelineInputs LoadInputs(const PipelineConfig& cfg);

/// Ground-truth semantics and ideal embeddings of a synthetic scene.
PipelineInputs SyntheticInputs(const synth::Scene& scene, const PipelineConfig& cfg);

/// Steady-clock stopwatch that records into a timing list on destruction.
class StageTimer {
 public:
  StageTimer(std::vector<StageTiming>& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto end = std::chrono::steady_clock::now();
    sink_.push_back({std::move(name_), std::chrono::duration<double, std::micro>(end - start_).count()});
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  std::vector<StageTiming>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

struct StageStats {
  std::string name;
  double p50 = 0.0;  // microseconds
  double p95 = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

struct BenchReport {
  std::vector<StageStats> stages;
  StageStats end_to_end;
  double hz = 0.0;
  std::vector<Index> pillars_per_frame;
  std::size_t frames = 0;
  int repetitions = 0;
  double timer_overhead_us = 0.0;
};

/// Nearest-rank percentile of unsorted samples, q in (0, 1].
double Percentile(std::vector<double> samples, double q);

/// One unmeasured warm-up pass over all frames, then `repetitions` measured
/// passes. Hz = 1 / mean end-to-end seconds.
BenchReport Benchmark(const PipelineConfig& cfg, const std::vector<PipelineInputs>& frames,
                      int repetitions);

/// Mean cost of one StageTimer around an empty scope, in microseconds.
double MeasureTimerOverhead(int iterations = 100000);

std::string FormatBenchReport(const BenchReport& report);

}  // namespace rvpan
