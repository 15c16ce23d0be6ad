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

#include "rvpan/types.hpp"

namespace rvpan {

enum class CollisionPolicy { kKeepNearest };

/// Spherical projection parameters. Angles in degrees.
struct ProjectionConfig {
  int height = 64;
  int width = 2048;
  double fov_up = 3.0;
  double fov_down = -25.0;
  CollisionPolicy collision_policy = CollisionPolicy::kKeepNearest;

  /// 64-beam preset (SemanticKITTI style).
  static ProjectionConfig Beams64() { return {64, 2048, 3.0, -25.0}; }
  /// 32-beam preset (nuScenes style).
  static ProjectionConfig Beams32() { return {32, 1024, 10.0, -30.0}; }

  /// Throws InvalidParams if the field of view or the size is degenerate.
  void Validate() const;

  double fov_rad() const;
  /// Angular size of one column / one row, in radians.
  double azimuth_step() const;
  double elevation_step() const;
  /// Azimuth and elevation of a pixel center, in radians.
  double azimuth_of_col(double col) const;
  double elevation_of_row(double row) const;

  /// Same field of view at half the resolution in both axes.
  ProjectionConfig Half() const;
};

inline constexpr std::int32_t kNoPoint = -1;

/// Range-view image. Per-pixel channels hold the nearest point that landed on
/// the pixel; `point_to_pixel` records the pixel of every input point.
struct RangeImage {
  ProjectionConfig config;
  ImageD depth;
  ImageD x;
  ImageD y;
  ImageD z;
  ImageD remission;
  Mask occupancy;
  Image<std::int32_t> pixel_to_point;
  std::vector<PixelIndex> point_to_pixel;

  int height() const { return config.height; }
  int width() const { return config.width; }
  Index num_points() const { return static_cast<Index>(point_to_pixel.size()); }
  /// Fraction of occupied pixels.
  double occupied_fraction() const;
};

/// Pixel a single point falls in, computed in double precision and clamped.
PixelIndex ProjectPoint(double x, double y, double z, const ProjectionConfig& cfg);

/// Throws EmptyInput on an empty cloud and DegeneratePoint on a point at the
/// sensor origin.
RangeImage ProjectToRangeView(const PointCloud& cloud, const ProjectionConfig& cfg);

/// Depth guidance map: the same projection at (H/2, W/2).
RangeImage BuildDenseDepthMap(const PointCloud& cloud, const ProjectionConfig& cfg);

/// Same map derived from the full-resolution image of `cloud`. Even sizes pool
/// 2x2 blocks (identical result, no re-projection); odd sizes re-project.
RangeImage BuildDenseDepthMap(const PointCloud& cloud, const RangeImage& full);

/// Copies each point's pixel label back onto the point. Colliding points share
/// the label of their pixel.
std::vector<PointLabel> ReprojectLabels(const RangeImage& ri,
                                        const Image<std::int32_t>& pixel_semantic,
                                        const Image<std::int32_t>& pixel_instance);

/// Single-channel variant used by the semantic path.
std::vector<std::int32_t> ReprojectChannel(const RangeImage& ri,
                                           const Image<std::int32_t>& pixel_values);

/// Per-pixel label image built from per-point labels, using the retained
/// (nearest) point of each pixel. Empty pixels get `fill`.
Image<std::int32_t> RasterizePointValues(const RangeImage& ri,
                                         const std::vector<std::int32_t>& values,
                                         std::int32_t fill = 0);

}  // namespace rvpan
