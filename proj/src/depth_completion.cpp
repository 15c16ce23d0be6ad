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

#include "rvpan/depth_completion.hpp"

#include <cmath>
#include <vector>

namespace rvpan {

void CompletionConfig::Validate() const {
  if (k < 3 || k % 2 == 0) {
    throw Error(ErrorCode::kInvalidWindow,
                "window length must be odd and >= 3, got " + std::to_string(k));
  }
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "gaussian weight parameters must be positive");
  }
}

DepthMaps CompleteRangeImage(const RangeImage& sparse, const RangeImage& dense_half,
                             const CompletionConfig& cfg) {
  cfg.Validate();
  DepthMaps maps;
  maps.sparse = sparse.depth;
  maps.occupancy = sparse.occupancy;
  maps.dense_half = dense_half.depth;
  maps.dense_half_occupancy = dense_half.occupancy;

  const auto weights = GaussianWeights<double>(cfg.k, cfg.a, cfg.b);
  maps.row_fill = DirectionalFill<double>(maps.sparse, maps.occupancy, weights,
                                          FillDirection::kRow, cfg.wrap_azimuth);
  maps.col_fill = DirectionalFill<double>(maps.sparse, maps.occupancy, weights,
                                          FillDirection::kCol, cfg.wrap_azimuth);
  maps.upsampled = BilinearUpsample<double>(maps.dense_half, maps.dense_half_occupancy,
                                            sparse.height(), sparse.width());
  auto [g_theta, g_phi] = GuidanceGradients<double>(maps.upsampled, sparse.config,
                                                    cfg.wrap_azimuth);
  maps.guidance_theta = std::move(g_theta);
  maps.guidance_phi = std::move(g_phi);
  maps.completed = CompleteDepth<double>(maps.sparse, maps.occupancy, maps.row_fill,
                                         maps.col_fill, maps.guidance_theta, maps.guidance_phi,
                                         maps.upsampled);
  return maps;
}

NormalMap ComputeNormals(const ImageD& completed, const ProjectionConfig& cfg,
                         bool wrap_azimuth) {
  cfg.Validate();
  const Index rows = completed.rows();
  const Index cols = completed.cols();
  if (rows != cfg.height || cols != cfg.width) {
    throw Error(ErrorCode::kShapeError, "completed map does not match the projection size");
  }
  const double d_theta = cfg.azimuth_step();
  const double d_phi = cfg.elevation_step();
  // Azimuth decreases with the column index and elevation with the row index,
  // so index-direction derivatives flip sign when expressed per radian.
  auto [d_col, d_row] = AngularGradients<double>(completed, d_theta, d_phi, wrap_azimuth);

  std::vector<double> sin_t(cols), cos_t(cols), sin_p(rows), cos_p(rows);
  for (Index j = 0; j < cols; ++j) {
    const double t = cfg.azimuth_of_col(static_cast<double>(j));
    sin_t[j] = std::sin(t);
    cos_t[j] = std::cos(t);
  }
  for (Index i = 0; i < rows; ++i) {
    const double p = cfg.elevation_of_row(static_cast<double>(i));
    sin_p[i] = std::sin(p);
    cos_p[i] = std::cos(p);
  }

  // In the local basis (e_r, e_theta, e_phi) the cross product of the two
  // partials reduces to r cos(phi) e_r - r_theta e_theta - cos(phi) r_phi e_phi
  // (up to the positive factor r); negating it faces the sensor.
  NormalMap out{ImageD::Zero(rows, cols), ImageD::Zero(rows, cols), ImageD::Zero(rows, cols),
                Mask::Zero(rows, cols)};
  for (Index i = 0; i < rows; ++i) {
    const double cp = cos_p[i];
    const double sp = sin_p[i];
    for (Index j = 0; j < cols; ++j) {
      const double r = completed(i, j);
      if (!(r > 0.0) || !std::isfinite(r)) continue;
      const double a = r * cp;
      const double b = -d_col(i, j);       // r_theta
      const double c = -cp * d_row(i, j);  // cos(phi) r_phi
      const double len = std::sqrt(a * a + b * b + c * c);
      if (!(len >= 1e-9) || !std::isfinite(len)) continue;
      const double ka = -a / len, kb = b / len, kc = c / len;
      const double ct = cos_t[j], st = sin_t[j];
      // e_r = (cp ct, cp st, sp), e_theta = (-st, ct, 0), e_phi = (-sp ct, -sp st, cp).
      out.nx(i, j) = ka * cp * ct - kb * st - kc * sp * ct;
      out.ny(i, j) = ka * cp * st + kb * ct - kc * sp * st;
      out.nz(i, j) = ka * sp + kc * cp;
      out.valid(i, j) = 1;
    }
  }
  return out;
}

}  // namespace rvpan
