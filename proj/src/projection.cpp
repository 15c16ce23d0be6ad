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

#include "rvpan/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rvpan {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::int32_t FloorClamp(double value, int upper) {
  const double f = std::floor(value);
  if (f < 0.0) return 0;
  if (f > static_cast<double>(upper - 1)) return upper - 1;
  return static_cast<std::int32_t>(f);
}

}  // namespace

void ProjectionConfig::Validate() const {
  if (height < 2 || width < 2) {
    throw Error(ErrorCode::kInvalidParams, "projection size must be at least 2x2, got " +
                                               std::to_string(height) + "x" +
                                               std::to_string(width));
  }
  if (!(fov_up > fov_down)) {
    throw Error(ErrorCode::kInvalidParams, "fov_up must exceed fov_down");
  }
}

double ProjectionConfig::fov_rad() const { return (fov_up - fov_down) * kDegToRad; }

double ProjectionConfig::azimuth_step() const { return 2.0 * std::numbers::pi / width; }

double ProjectionConfig::elevation_step() const { return fov_rad() / height; }

double ProjectionConfig::azimuth_of_col(double col) const {
  return std::numbers::pi * (1.0 - 2.0 * (col + 0.5) / width);
}

double ProjectionConfig::elevation_of_row(double row) const {
  return fov_down * kDegToRad + (1.0 - (row + 0.5) / height) * fov_rad();
}

ProjectionConfig ProjectionConfig::Half() const {
  ProjectionConfig half = *this;
  half.height = height / 2;
  half.width = width / 2;
  return half;
}

double RangeImage::occupied_fraction() const {
  if (occupancy.size() == 0) return 0.0;
  return occupancy.cast<double>().sum() / static_cast<double>(occupancy.size());
}

PixelIndex ProjectPoint(double x, double y, double z, const ProjectionConfig& cfg) {
  const double r = std::sqrt(x * x + y * y + z * z);
  const double azimuth = std::atan2(y, x);
  const double elevation = std::asin(std::clamp(z / r, -1.0, 1.0));
  const double fov_down = cfg.fov_down * kDegToRad;
  const double u = 0.5 * (1.0 - azimuth / std::numbers::pi) * cfg.width;
  const double v = (1.0 - (elevation - fov_down) / cfg.fov_rad()) * cfg.height;
  return {FloorClamp(v, cfg.height), FloorClamp(u, cfg.width)};
}

RangeImage ProjectToRangeView(const PointCloud& cloud, const ProjectionConfig& cfg) {
  cfg.Validate();
  if (cloud.empty()) {
    throw Error(ErrorCode::kEmptyInput, "cannot project an empty point cloud");
  }
  const Index n = cloud.size();
  const bool has_remission = cloud.remission.size() == n;

  RangeImage ri;
  ri.config = cfg;
  ri.depth = ImageD::Zero(cfg.height, cfg.width);
  ri.x = ImageD::Zero(cfg.height, cfg.width);
  ri.y = ImageD::Zero(cfg.height, cfg.width);
  ri.z = ImageD::Zero(cfg.height, cfg.width);
  ri.remission = ImageD::Zero(cfg.height, cfg.width);
  ri.occupancy = Mask::Zero(cfg.height, cfg.width);
  ri.pixel_to_point = Image<std::int32_t>::Constant(cfg.height, cfg.width, kNoPoint);
  ri.point_to_pixel.resize(static_cast<std::size_t>(n));

  for (Index i = 0; i < n; ++i) {
    const double x = cloud.xyz(i, 0);
    const double y = cloud.xyz(i, 1);
    const double z = cloud.xyz(i, 2);
    const double r = std::sqrt(x * x + y * y + z * z);
    if (!(r > 0.0)) {
      throw Error(ErrorCode::kDegeneratePoint,
                  "point " + std::to_string(i) + " lies at the sensor origin");
    }
    const PixelIndex px = ProjectPoint(x, y, z, cfg);
    ri.point_to_pixel[static_cast<std::size_t>(i)] = px;

    // Keep the nearest point; equal depths keep the earlier index, which is
    // already stored because points are visited in index order.
    std::int32_t& slot = ri.pixel_to_point(px.row, px.col);
    if (slot != kNoPoint && !(r < ri.depth(px.row, px.col))) continue;
    slot = static_cast<std::int32_t>(i);
    ri.depth(px.row, px.col) = r;
    ri.x(px.row, px.col) = x;
    ri.y(px.row, px.col) = y;
    ri.z(px.row, px.col) = z;
    ri.remission(px.row, px.col) = has_remission ? cloud.remission(i) : 0.0;
    ri.occupancy(px.row, px.col) = 1;
  }
  return ri;
}

RangeImage BuildDenseDepthMap(const PointCloud& cloud, const ProjectionConfig& cfg) {
  return ProjectToRangeView(cloud, cfg.Half());
}

RangeImage BuildDenseDepthMap(const PointCloud& cloud, const RangeImage& full) {
  const ProjectionConfig& cfg = full.config;
  if (cfg.height % 2 != 0 || cfg.width % 2 != 0) return BuildDenseDepthMap(cloud, cfg);
  if (full.num_points() != cloud.size()) {
    throw Error(ErrorCode::kShapeError, "range image was not projected from this cloud");
  }
  // With even sizes a half-resolution pixel covers exactly a 2x2 block, so the
  // nearest point of the block is the nearest of the four retained points.
  const ProjectionConfig half_cfg = cfg.Half();
  const int rows = half_cfg.height;
  const int cols = half_cfg.width;
  RangeImage ri;
  ri.config = half_cfg;
  ri.depth = ImageD::Zero(rows, cols);
  ri.x = ImageD::Zero(rows, cols);
  ri.y = ImageD::Zero(rows, cols);
  ri.z = ImageD::Zero(rows, cols);
  ri.remission = ImageD::Zero(rows, cols);
  ri.occupancy = Mask::Zero(rows, cols);
  ri.pixel_to_point = Image<std::int32_t>::Constant(rows, cols, kNoPoint);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      Index best_r = -1, best_c = -1;
      for (Index r = 2 * i; r < 2 * i + 2; ++r) {
        for (Index c = 2 * j; c < 2 * j + 2; ++c) {
          const std::int32_t p = full.pixel_to_point(r, c);
          if (p == kNoPoint) continue;
          if (best_r >= 0) {
            const double d = full.depth(r, c), best = full.depth(best_r, best_c);
            if (d > best || (d == best && p > full.pixel_to_point(best_r, best_c))) continue;
          }
          best_r = r;
          best_c = c;
        }
      }
      if (best_r < 0) continue;
      ri.depth(i, j) = full.depth(best_r, best_c);
      ri.x(i, j) = full.x(best_r, best_c);
      ri.y(i, j) = full.y(best_r, best_c);
      ri.z(i, j) = full.z(best_r, best_c);
      ri.remission(i, j) = full.remission(best_r, best_c);
      ri.occupancy(i, j) = 1;
      ri.pixel_to_point(i, j) = full.pixel_to_point(best_r, best_c);
    }
  }
  ri.point_to_pixel.reserve(full.point_to_pixel.size());
  for (const PixelIndex& px : full.point_to_pixel) ri.point_to_pixel.push_back({px.row / 2, px.col / 2});
  return ri;
}

std::vector<std::int32_t> ReprojectChannel(const RangeImage& ri,
                                           const Image<std::int32_t>& pixel_values) {
  if (pixel_values.rows() != ri.height() || pixel_values.cols() != ri.width()) {
    throw Error(ErrorCode::kShapeError,
                "label image is " + std::to_string(pixel_values.rows()) + "x" +
                    std::to_string(pixel_values.cols()) + ", range image is " +
                    std::to_string(ri.height()) + "x" + std::to_string(ri.width()));
  }
  std::vector<std::int32_t> out(ri.point_to_pixel.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const PixelIndex px = ri.point_to_pixel[i];
    out[i] = pixel_values(px.row, px.col);
  }
  return out;
}

std::vector<PointLabel> ReprojectLabels(const RangeImage& ri,
                                        const Image<std::int32_t>& pixel_semantic,
                                        const Image<std::int32_t>& pixel_instance) {
  const auto semantic = ReprojectChannel(ri, pixel_semantic);
  const auto instance = ReprojectChannel(ri, pixel_instance);
  std::vector<PointLabel> out(semantic.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {semantic[i], instance[i]};
  return out;
}

Image<std::int32_t> RasterizePointValues(const RangeImage& ri,
                                         const std::vector<std::int32_t>& values,
                                         std::int32_t fill) {
  if (static_cast<Index>(values.size()) != ri.num_points()) {
    throw Error(ErrorCode::kShapeError, "expected one value per projected point");
  }
  Image<std::int32_t> out = Image<std::int32_t>::Constant(ri.height(), ri.width(), fill);
  for (Index r = 0; r < ri.height(); ++r) {
    for (Index c = 0; c < ri.width(); ++c) {
      const std::int32_t p = ri.pixel_to_point(r, c);
      if (p != kNoPoint) out(r, c) = values[static_cast<std::size_t>(p)];
    }
  }
  return out;
}

}  // namespace rvpan
