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

#include "rvpan/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace rvpan {

void KnnParams::Validate() const {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidWindow, "knn window must be odd, got " + std::to_string(window));
  }
  if (k < 1 || k > window * window) {
    throw Error(ErrorCode::kInvalidParams, "knn k must lie in [1, window^2]");
  }
  if (!(range_cutoff > 0.0) || !(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "knn cutoff and sigma must be positive");
  }
}

std::vector<std::int32_t> KnnRefine(const PointCloud& cloud, const RangeImage& ri,
                                    const Image<std::int32_t>& pixel_semantic,
                                    const KnnParams& params) {
  params.Validate();
  if (pixel_semantic.rows() != ri.height() || pixel_semantic.cols() != ri.width()) {
    throw Error(ErrorCode::kShapeError, "semantic image does not match the range image");
  }
  if (cloud.size() != ri.num_points()) {
    throw Error(ErrorCode::kShapeError, "cloud and range image disagree on point count");
  }
  const int half = params.window / 2;
  const double inv_two_sigma2 = 1.0 / (2.0 * params.sigma * params.sigma);

  struct Candidate {
    double range_gap;
    int order;
    int dr;
    int dc;
    std::int32_t label;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(params.window * params.window));
  std::vector<std::pair<std::int32_t, double>> votes;

  std::vector<std::int32_t> out(static_cast<std::size_t>(cloud.size()));
  for (Index p = 0; p < cloud.size(); ++p) {
    const PixelIndex px = ri.point_to_pixel[static_cast<std::size_t>(p)];
    const double range = cloud.xyz.row(p).norm();
    candidates.clear();
    int order = 0;
    for (int dr = -half; dr <= half; ++dr) {
      const int r = px.row + dr;
      for (int dc = -half; dc <= half; ++dc, ++order) {
        const int c = px.col + dc;
        if (r < 0 || r >= ri.height() || c < 0 || c >= ri.width()) continue;
        if (!ri.occupancy(r, c)) continue;
        candidates.push_back({std::abs(range - ri.depth(r, c)), order, dr, dc, pixel_semantic(r, c)});
      }
    }
    const std::size_t keep = std::min(candidates.size(), static_cast<std::size_t>(params.k));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.range_gap != b.range_gap) return a.range_gap < b.range_gap;
                        return a.order < b.order;
                      });
    votes.clear();
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& cand = candidates[i];
      if (cand.range_gap > params.range_cutoff) continue;
      const double w = std::exp(-static_cast<double>(cand.dr * cand.dr + cand.dc * cand.dc) *
                                inv_two_sigma2);
      auto it = std::find_if(votes.begin(), votes.end(),
                             [&](const auto& v) { return v.first == cand.label; });
      if (it == votes.end()) {
        votes.emplace_back(cand.label, w);
      } else {
        it->second += w;
      }
    }
    if (votes.empty()) {
      out[static_cast<std::size_t>(p)] = pixel_semantic(px.row, px.col);
      continue;
    }
    auto best = votes.front();
    for (const auto& v : votes) {
      if (v.second > best.second || (v.second == best.second && v.first < best.first)) best = v;
    }
    out[static_cast<std::size_t>(p)] = best.first;
  }
  return out;
}

PanopticLabeling MajorityVote(PanopticLabeling labeling) {
  if (labeling.semantic.size() != labeling.instance.size()) {
    throw Error(ErrorCode::kShapeError, "semantic and instance lengths differ");
  }
  // instance -> (class -> count)
  std::map<std::int32_t, std::map<std::int32_t, std::size_t>> counts;
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (labeling.instance[i] > 0) ++counts[labeling.instance[i]][labeling.semantic[i]];
  }
  std::map<std::int32_t, std::int32_t> mode;
  for (const auto& [id, per_class] : counts) {
    std::int32_t best_class = per_class.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [c, n] : per_class) {
      if (n > best_count) {
        best_class = c;
        best_count = n;
      }
    }
    mode[id] = best_class;
  }
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (labeling.instance[i] > 0) labeling.semantic[i] = mode[labeling.instance[i]];
  }
  return labeling;
}

PanopticLabeling Fuse(const std::vector<std::int32_t>& semantic,
                      const std::vector<std::int32_t>& instance, const ClassRegistry& registry) {
  if (semantic.size() != instance.size()) {
    throw Error(ErrorCode::kShapeError, "semantic has " + std::to_string(semantic.size()) +
                                            " points, instance has " +
                                            std::to_string(instance.size()));
  }
  PanopticLabeling out{semantic, instance, registry};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!registry.is_thing(out.semantic[i])) out.instance[i] = 0;
  }
  return MajorityVote(std::move(out));
}

}  // namespace rvpan
