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

// Deterministic completion of sparse range images and surface normals from
// range gradients.
//
// The sparse full-resolution map is filled twice, once along rows and once
// along columns, with a Gaussian-weighted average of the occupied neighbours
// in a k-wide window. A coarse dense map (the scan projected at half
// resolution, bilinearly upsampled) provides range gradients that pick, per
// empty pixel, the direction in which range changes least. Occupied pixels are
// never modified.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rvpan/projection.hpp"
#include "rvpan/types.hpp"

namespace rvpan {

struct CompletionConfig {
  int k = 7;
  double a = 1.0;
  double b = 1.0;
  bool wrap_azimuth = false;

  void Validate() const;
};

enum class FillDirection { kRow, kCol };

template <typename Scalar>
using WeightVector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct FillResult {
  Image<Scalar> value;  // 0 where invalid
  Mask valid;           // 0 where no occupied neighbour fell in the window
};

/// w(v) = a * exp(-v^2 / (2 b^2)) for v in [-k/2, k/2]; entry k/2 is v = 0.
template <typename Scalar>
WeightVector<Scalar> GaussianWeights(int k, Scalar a, Scalar b) {
  if (k < 3 || k % 2 == 0) {
    throw Error(ErrorCode::kInvalidWindow,
                "window length must be odd and >= 3, got " + std::to_string(k));
  }
  if (!(a > Scalar(0)) || !(b > Scalar(0))) {
    throw Error(ErrorCode::kInvalidParams, "gaussian weight parameters must be positive");
  }
  const int half = k / 2;
  WeightVector<Scalar> w(k);
  for (int v = -half; v <= half; ++v) {
    const Scalar vv = static_cast<Scalar>(v);
    w(v + half) = a * std::exp(-(vv * vv) / (Scalar(2) * b * b));
  }
  return w;
}

/// Normalized weighted average of occupied neighbours along one axis. Applied
/// to every pixel, occupied or not. Out-of-range neighbours count as empty
/// unless `wrap` is set, in which case row fills wrap around in azimuth.
template <typename Scalar>
FillResult<Scalar> DirectionalFill(const Image<Scalar>& sparse, const Mask& occupancy,
                                   const WeightVector<Scalar>& weights, FillDirection direction,
                                   bool wrap = false) {
  if (sparse.rows() != occupancy.rows() || sparse.cols() != occupancy.cols()) {
    throw Error(ErrorCode::kShapeError, "depth and occupancy sizes differ");
  }
  const Index rows = sparse.rows();
  const Index cols = sparse.cols();
  const Index half = weights.size() / 2;
  const bool along_row = direction == FillDirection::kRow;
  const bool cyclic = wrap && along_row;

  FillResult<Scalar> out{Image<Scalar>::Zero(rows, cols), Mask::Zero(rows, cols)};
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      Scalar num(0);
      Scalar den(0);
      for (Index v = -half; v <= half; ++v) {
        Index ni = i;
        Index nj = j;
        if (along_row) {
          nj = j + v;
          if (cyclic) nj = ((nj % cols) + cols) % cols;
          if (nj < 0 || nj >= cols) continue;
        } else {
          ni = i + v;
          if (ni < 0 || ni >= rows) continue;
        }
        if (!occupancy(ni, nj)) continue;
        const Scalar w = weights(v + half);
        num += sparse(ni, nj) * w;
        den += w;
      }
      if (den > Scalar(0)) {
        out.value(i, j) = num / den;
        out.valid(i, j) = 1;
      }
    }
  }
  return out;
}

/// Fills empty pixels of a coarse map with the nearest occupied value in the
/// same row (left wins ties). Rows with no occupied pixel copy the nearest
/// filled row (upper wins ties). Throws EmptyInput if nothing is occupied.
template <typename Scalar>
Image<Scalar> PrefillRows(const Image<Scalar>& values, const Mask& occupancy) {
  const Index rows = values.rows();
  const Index cols = values.cols();
  Image<Scalar> out = values;
  Eigen::Array<bool, Eigen::Dynamic, 1> row_filled = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(rows, false);
  for (Index i = 0; i < rows; ++i) {
    Index last = -1;
    Eigen::Array<Index, Eigen::Dynamic, 1> left(cols);
    for (Index j = 0; j < cols; ++j) {
      if (occupancy(i, j)) last = j;
      left(j) = last;
    }
    if (last < 0) continue;
    row_filled(i) = true;
    Index next = -1;
    for (Index j = cols - 1; j >= 0; --j) {
      if (occupancy(i, j)) {
        next = j;
        continue;
      }
      const Index l = left(j);
      Index src;
      if (l < 0) {
        src = next;
      } else if (next < 0) {
        src = l;
      } else {
        src = (j - l <= next - j) ? l : next;
      }
      out(i, j) = values(i, src);
    }
  }
  if (!row_filled.any()) {
    throw Error(ErrorCode::kEmptyInput, "dense depth map has no occupied pixel");
  }
  for (Index i = 0; i < rows; ++i) {
    if (row_filled(i)) continue;
    Index best = -1;
    for (Index d = 1; d < rows && best < 0; ++d) {
      if (i - d >= 0 && row_filled(i - d)) best = i - d;
      else if (i + d < rows && row_filled(i + d)) best = i + d;
    }
    out.row(i) = out.row(best);
  }
  return out;
}

/// Bilinear resize with the half-pixel (align-corners = false) convention.
template <typename Scalar>
Image<Scalar> BilinearResize(const Image<Scalar>& in, Index out_rows, Index out_cols) {
  const Index in_rows = in.rows();
  const Index in_cols = in.cols();
  if (in_rows == 0 || in_cols == 0) {
    throw Error(ErrorCode::kEmptyInput, "cannot resize an empty image");
  }
  const double sy = static_cast<double>(in_rows) / static_cast<double>(out_rows);
  const double sx = static_cast<double>(in_cols) / static_cast<double>(out_cols);

  auto source = [](Index dst, double scale, Index in_size, Index& i0, Index& i1, Scalar& t) {
    double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in_size - 1));
    i0 = static_cast<Index>(std::floor(s));
    i1 = std::min(i0 + 1, in_size - 1);
    t = static_cast<Scalar>(s - static_cast<double>(i0));
  };

  Image<Scalar> out(out_rows, out_cols);
  for (Index i = 0; i < out_rows; ++i) {
    Index r0, r1;
    Scalar ty;
    source(i, sy, in_rows, r0, r1, ty);
    for (Index j = 0; j < out_cols; ++j) {
      Index c0, c1;
      Scalar tx;
      source(j, sx, in_cols, c0, c1, tx);
      const Scalar top = in(r0, c0) * (Scalar(1) - tx) + in(r0, c1) * tx;
      const Scalar bottom = in(r1, c0) * (Scalar(1) - tx) + in(r1, c1) * tx;
      out(i, j) = top * (Scalar(1) - ty) + bottom * ty;
    }
  }
  return out;
}

/// Prefills the coarse map and upsamples it to (out_rows, out_cols).
template <typename Scalar>
Image<Scalar> BilinearUpsample(const Image<Scalar>& dense_half, const Mask& occupancy,
                               Index out_rows, Index out_cols) {
  return BilinearResize(PrefillRows(dense_half, occupancy), out_rows, out_cols);
}

/// Derivative of a map along increasing column and increasing row index,
/// divided by the angular size of one column / one row. Central differences
/// inside, one-sided at the borders, zero along an axis of length 1.
template <typename Scalar>
std::pair<Image<Scalar>, Image<Scalar>> AngularGradients(const Image<Scalar>& r,
                                                         Scalar col_step, Scalar row_step,
                                                         bool wrap_cols = false) {
  const Index rows = r.rows();
  const Index cols = r.cols();
  Image<Scalar> d_col = Image<Scalar>::Zero(rows, cols);
  Image<Scalar> d_row = Image<Scalar>::Zero(rows, cols);
  if (cols > 1) {
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (wrap_cols) {
          const Index jl = (j + cols - 1) % cols;
          const Index jr = (j + 1) % cols;
          d_col(i, j) = (r(i, jr) - r(i, jl)) / (Scalar(2) * col_step);
        } else if (j == 0) {
          d_col(i, j) = (r(i, 1) - r(i, 0)) / col_step;
        } else if (j == cols - 1) {
          d_col(i, j) = (r(i, j) - r(i, j - 1)) / col_step;
        } else {
          d_col(i, j) = (r(i, j + 1) - r(i, j - 1)) / (Scalar(2) * col_step);
        }
      }
    }
  }
  if (rows > 1) {
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (i == 0) {
          d_row(i, j) = (r(1, j) - r(0, j)) / row_step;
        } else if (i == rows - 1) {
          d_row(i, j) = (r(i, j) - r(i - 1, j)) / row_step;
        } else {
          d_row(i, j) = (r(i + 1, j) - r(i - 1, j)) / (Scalar(2) * row_step);
        }
      }
    }
  }
  return {std::move(d_col), std::move(d_row)};
}

/// Guidance gradients of the upsampled coarse map: (d/d azimuth, d/d elevation).
template <typename Scalar>
std::pair<Image<Scalar>, Image<Scalar>> GuidanceGradients(const Image<Scalar>& upsampled,
                                                          const ProjectionConfig& cfg,
                                                          bool wrap_azimuth = false) {
  return AngularGradients<Scalar>(upsampled, static_cast<Scalar>(cfg.azimuth_step()),
                                  static_cast<Scalar>(cfg.elevation_step()), wrap_azimuth);
}

/// Per-pixel choice between the row and column fill. Occupied pixels keep the
/// measurement; empty pixels take the row fill when the azimuth gradient is no
/// larger than the elevation gradient and the column fill otherwise. If the
/// chosen fill is invalid the other one is used, and if both are invalid the
/// upsampled coarse value.
template <typename Scalar>
Image<Scalar> CompleteDepth(const Image<Scalar>& sparse, const Mask& occupancy,
                            const FillResult<Scalar>& row_fill,
                            const FillResult<Scalar>& col_fill, const Image<Scalar>& grad_theta,
                            const Image<Scalar>& grad_phi, const Image<Scalar>& upsampled) {
  const Index rows = sparse.rows();
  const Index cols = sparse.cols();
  auto same_shape = [&](auto const& m) { return m.rows() == rows && m.cols() == cols; };
  if (!same_shape(occupancy) || !same_shape(row_fill.value) || !same_shape(col_fill.value) ||
      !same_shape(grad_theta) || !same_shape(grad_phi) || !same_shape(upsampled)) {
    throw Error(ErrorCode::kShapeError, "completion inputs must share one size");
  }
  Image<Scalar> out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (occupancy(i, j)) {
        out(i, j) = sparse(i, j);
        continue;
      }
      const bool prefer_row = std::abs(grad_theta(i, j)) <= std::abs(grad_phi(i, j));
      const FillResult<Scalar>& first = prefer_row ? row_fill : col_fill;
      const FillResult<Scalar>& second = prefer_row ? col_fill : row_fill;
      if (first.valid(i, j)) {
        out(i, j) = first.value(i, j);
      } else if (second.valid(i, j)) {
        out(i, j) = second.value(i, j);
      } else {
        out(i, j) = upsampled(i, j);
      }
    }
  }
  return out;
}

/// All intermediate maps of one completion run.
struct DepthMaps {
  ImageD sparse;
  Mask occupancy;
  ImageD dense_half;
  Mask dense_half_occupancy;
  ImageD upsampled;
  FillResult<double> row_fill;
  FillResult<double> col_fill;
  ImageD guidance_theta;
  ImageD guidance_phi;
  ImageD completed;
};

/// Runs the full completion on a projected scan and its half-resolution map.
DepthMaps CompleteRangeImage(const RangeImage& sparse, const RangeImage& dense_half,
                             const CompletionConfig& cfg);

/// Unit normals in the sensor frame, oriented toward the sensor.
struct NormalMap {
  ImageD nx;
  ImageD ny;
  ImageD nz;
  Mask valid;

  Eigen::Vector3d at(Index row, Index col) const {
    return {nx(row, col), ny(row, col), nz(row, col)};
  }
};

/// Normals of the surface p(theta, phi) = r * ray(theta, phi), taken as the
/// cross product of its two angular partials at each pixel center.
NormalMap ComputeNormals(const ImageD& completed, const ProjectionConfig& cfg,
                         bool wrap_azimuth = false);

}  // namespace rvpan
