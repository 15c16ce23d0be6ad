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

// Panoptic quality (PQ = SQ * RQ) and IoU over labeled points.
//
// A segment is the set of points sharing (class, instance) for thing classes
// and all points of one class for stuff classes. A predicted and a ground
// truth segment of the same class match when their IoU exceeds 0.5, which
// makes the matching unique. Points whose ground-truth class is the ignore
// label are dropped from every count.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rvpan/fusion.hpp"
#include "rvpan/types.hpp"

namespace rvpan {

struct EvalOptions {
  std::int32_t ignore_class = 0;
  /// Thing segments with fewer points are dropped on both sides (20 for
  /// nuScenes-style evaluation, 0 for SemanticKITTI-style).
  std::size_t min_points = 0;
};

struct ClassMatches {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<double> tp_ious;
  // Point-level semantic counts, used for IoU and PQ-dagger.
  std::size_t sem_intersection = 0;
  std::size_t sem_union = 0;

  double iou_sum() const;
};

struct SegmentMatches {
  std::map<std::int32_t, ClassMatches> per_class;
  ClassRegistry registry;
};

/// Throws ShapeError if the two labelings differ in length.
SegmentMatches MatchSegments(const PanopticLabeling& pred, const PanopticLabeling& gt,
                             const EvalOptions& options = {});

struct ClassQuality {
  double pq = 0.0;
  double rq = 0.0;
  double sq = 0.0;
  double iou = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  bool is_thing = false;
};

struct PqReport {
  std::map<std::int32_t, ClassQuality> per_class;
  double pq = 0.0;
  double pq_dagger = 0.0;
  double rq = 0.0;
  double sq = 0.0;
  double pq_things = 0.0;
  double rq_things = 0.0;
  double sq_things = 0.0;
  double pq_stuff = 0.0;
  double rq_stuff = 0.0;
  double sq_stuff = 0.0;
  double miou = 0.0;
};

/// Per-class SQ, RQ, PQ and unweighted means over the classes that occur in
/// either labeling. PQ-dagger replaces PQ by IoU for stuff classes.
PqReport PanopticQuality(const SegmentMatches& matches);

PqReport Evaluate(const PanopticLabeling& pred, const PanopticLabeling& gt,
                  const EvalOptions& options = {});

struct IouReport {
  std::map<std::int32_t, double> per_class;
  double miou = 0.0;
};

/// Point-level IoU per class over classes present in prediction or ground
/// truth; `ignore` points (by ground truth) are skipped.
IouReport MeanIou(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& gt,
                  int num_classes, std::int32_t ignore = 0);

/// Aligned table for people.
std::string FormatReportTable(const PqReport& report);
/// One `key=value` per line, stable ordering, for diffing.
std::string FormatReportKeyValue(const PqReport& report);

}  // namespace rvpan
