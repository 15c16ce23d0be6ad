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

#pragma once

#include <cstdint>
#include <vector>

#include "rvpan/projection.hpp"
#include "rvpan/types.hpp"

namespace rvpan {

/// Per-point panoptic output. Instance 0 marks stuff and unassigned points.
struct PanopticLabeling {
  std::vector<std::int32_t> semantic;
  std::vector<std::int32_t> instance;
  ClassRegistry registry = ClassRegistry::SemanticKitti();

  std::size_t size() const { return semantic.size(); }
};

struct KnnParams {
  int k = 5;
  int window = 5;
  double range_cutoff = 1.0;  // meters
  double sigma = 1.0;         // pixels, Gaussian weight on window offset

  void Validate() const;
};

/// Range-gated neighbour vote in the range image. For each point, the
/// occupied pixels of its window are ranked by |range(point) - range(pixel)|;
/// the k closest within the cutoff vote with a Gaussian weight on their pixel
/// offset. Points with no surviving neighbour keep their own pixel's class.
std::vector<std::int32_t> KnnRefine(const PointCloud& cloud, const RangeImage& ri,
                                    const Image<std::int32_t>& pixel_semantic,
                                    const KnnParams& params);

/// Every instance takes the most frequent class of its members (smallest class
/// id on ties). Points with instance 0 are untouched.
PanopticLabeling MajorityVote(PanopticLabeling labeling);

/// Zeroes instance ids of non-thing points, then applies MajorityVote.
PanopticLabeling Fuse(const std::vector<std::int32_t>& semantic,
                      const std::vector<std::int32_t>& instance, const ClassRegistry& registry);

}  // namespace rvpan
