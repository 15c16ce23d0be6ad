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

#include "rvpan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <random>

namespace rvpan::synth {

namespace {

constexpr double kNoHit = std::numeric_limits<double>::infinity();

struct Ray {
  Eigen::Vector3d dir;
};

double IntersectBox(const Ray& ray, const Blueprint& b) {
  // Ray origin is the sensor at (0, 0, 0); work in the box frame.
  const double c = std::cos(-b.yaw);
  const double s = std::sin(-b.yaw);
  const Eigen::Vector3d o(-(c * b.center.x() - s * b.center.y()),
                          -(s * b.center.x() + c * b.center.y()), -b.center.z());
  const Eigen::Vector3d d(c * ray.dir.x() - s * ray.dir.y(), s * ray.dir.x() + c * ray.dir.y(),
                          ray.dir.z());
  const Eigen::Vector3d half = 0.5 * b.extent;
  double t_near = -kNoHit;
  double t_far = kNoHit;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < -half[a] || o[a] > half[a]) return kNoHit;
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return kNoHit;
  }
  return t_near > 0.0 ? t_near : kNoHit;
}

double IntersectCylinder(const Ray& ray, const Blueprint& b) {
  const double radius = 0.5 * b.extent.x();
  const double z_lo = b.center.z() - 0.5 * b.extent.z();
  const double z_hi = b.center.z() + 0.5 * b.extent.z();
  double best = kNoHit;
  // Side wall.
  const double dx = ray.dir.x();
  const double dy = ray.dir.y();
  const double qa = dx * dx + dy * dy;
  const double qb = -2.0 * (dx * b.center.x() + dy * b.center.y());
  const double qc = b.center.x() * b.center.x() + b.center.y() * b.center.y() - radius * radius;
  if (qa > 1e-15) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
        const double z = t * ray.dir.z();
        if (t > 0.0 && z >= z_lo && z <= z_hi) best = std::min(best, t);
      }
    }
  }
  // Caps.
  if (std::abs(ray.dir.z()) > 1e-15) {
    for (double zc : {z_lo, z_hi}) {
      const double t = zc / ray.dir.z();
      if (t <= 0.0) continue;
      const double px = t * dx - b.center.x();
      const double py = t * dy - b.center.y();
      if (px * px + py * py <= radius * radius) best = std::min(best, t);
    }
  }
  return best;
}

double IntersectPatch(const Ray& ray, const Blueprint& b) {
  const Eigen::Vector3d n(std::cos(b.yaw), std::sin(b.yaw), 0.0);
  const Eigen::Vector3d tangent(-std::sin(b.yaw), std::cos(b.yaw), 0.0);
  const double denom = n.dot(ray.dir);
  if (std::abs(denom) < 1e-15) return kNoHit;
  const double t = n.dot(b.center) / denom;
  if (t <= 0.0) return kNoHit;
  const Eigen::Vector3d local = t * ray.dir - b.center;
  if (std::abs(local.dot(tangent)) > 0.5 * b.extent.x()) return kNoHit;
  if (std::abs(local.z()) > 0.5 * b.extent.z()) return kNoHit;
  return t;
}

double Intersect(const Ray& ray, const Blueprint& b) {
  switch (b.shape) {
    case Shape::kBox: return IntersectBox(ray, b);
    case Shape::kCylinder: return IntersectCylinder(ray, b);
    case Shape::kPlanePatch: return IntersectPatch(ray, b);
  }
  return kNoHit;
}

}  // namespace

void SceneSpec::Validate() const {
  sensor.projection.Validate();
  if (!(embedding_sigma >= 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "embedding sigma must be non-negative");
  }
  if (!(sensor.max_range > sensor.min_range) || sensor.min_range < 0.0) {
    throw Error(ErrorCode::kInvalidParams, "sensor range interval is empty");
  }
  for (const auto& b : instances) {
    const bool ok = b.shape == Shape::kBox
                        ? (b.extent.array() > 0.0).all()
                        : (b.extent.x() > 0.0 && b.extent.z() > 0.0);
    if (!ok) throw Error(ErrorCode::kInvalidParams, "blueprint with non-positive extent");
  }
}

Scene GenerateScene(const SceneSpec& spec) {
  spec.Validate();
  const ProjectionConfig& cfg = spec.sensor.projection;

  // Thing blueprints get consecutive instance ids in blueprint order.
  std::vector<std::int32_t> blueprint_instance(spec.instances.size(), 0);
  std::int32_t next_id = 0;
  for (std::size_t b = 0; b < spec.instances.size(); ++b) {
    if (spec.registry.is_thing(spec.instances[b].semantic)) blueprint_instance[b] = ++next_id;
  }

  std::vector<Eigen::Vector3d> hits;
  std::vector<PointLabel> labels;
  for (int v = 0; v < cfg.height; ++v) {
    const double phi = cfg.elevation_of_row(v);
    for (int u = 0; u < cfg.width; ++u) {
      const double theta = cfg.azimuth_of_col(u);
      const Ray ray{{std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta),
                     std::sin(phi)}};
      double best = kNoHit;
      PointLabel label;
      for (std::size_t b = 0; b < spec.instances.size(); ++b) {
        const double t = Intersect(ray, spec.instances[b]);
        if (t < best) {
          best = t;
          label = {spec.instances[b].semantic, blueprint_instance[b]};
        }
      }
      if (spec.ground_z && ray.dir.z() < 0.0) {
        const double t = *spec.ground_z / ray.dir.z();
        if (t > 0.0 && t < best) {
          best = t;
          label = {spec.ground_class, 0};
        }
      }
      if (best < spec.sensor.min_range || best > spec.sensor.max_range) continue;
      hits.push_back(best * ray.dir);
      labels.push_back(label);
    }
  }
  if (hits.empty()) throw Error(ErrorCode::kEmptyScene, "no ray hit any surface");

  Scene scene;
  const Index n = static_cast<Index>(hits.size());
  scene.cloud.xyz.resize(n, 3);
  scene.cloud.remission.resize(n);
  for (Index i = 0; i < n; ++i) {
    scene.cloud.xyz.row(i) = hits[i].transpose();
    scene.cloud.remission(i) = labels[i].instance > 0 ? 0.6 : 0.3;
  }

  std::vector<Eigen::Vector2d> sums(static_cast<std::size_t>(next_id), Eigen::Vector2d::Zero());
  std::vector<std::size_t> counts(static_cast<std::size_t>(next_id), 0);
  for (Index i = 0; i < n; ++i) {
    const std::int32_t id = labels[i].instance;
    if (id <= 0) continue;
    sums[id - 1] += hits[i].head<2>();
    ++counts[id - 1];
  }
  scene.centroids.resize(sums.size(), Eigen::Vector2d::Zero());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    if (counts[k] > 0) scene.centroids[k] = sums[k] / static_cast<double>(counts[k]);
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.embedding_sigma > 0.0 ? spec.embedding_sigma : 1.0);
  scene.embeddings.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    const std::int32_t id = labels[i].instance;
    if (id <= 0) {
      scene.embeddings.row(i) = hits[i].head<2>().transpose();
      continue;
    }
    ++scene.num_foreground;
    Eigen::Vector2d e = scene.centroids[id - 1];
    if (spec.embedding_sigma > 0.0) {
      e.x() += noise(rng);
      e.y() += noise(rng);
    }
    scene.embeddings.row(i) = e.transpose();
  }
  scene.cloud.labels = std::move(labels);
  return scene;
}

SceneSpec RandomSceneSpec(std::uint64_t seed, const RandomSceneOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(options.min_instances, options.max_instances);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SceneSpec spec;
  spec.sensor = options.sensor;
  spec.seed = seed;
  spec.embedding_sigma = options.embedding_sigma;
  const double ground = spec.ground_z.value_or(-1.73);

  const int target = count_dist(rng);
  std::vector<std::pair<Eigen::Vector2d, double>> footprints;  // center, radius
  int attempts = 0;
  while (static_cast<int>(spec.instances.size()) < target && attempts < 10000) {
    ++attempts;
    Blueprint b;
    const double kind = unit(rng);
    if (kind < 0.6) {
      b.shape = Shape::kBox;
      b.semantic = semantic_kitti::kCar;
      b.extent = {4.2 + 0.6 * unit(rng), 1.7 + 0.2 * unit(rng), 1.4 + 0.2 * unit(rng)};
    } else if (kind < 0.8) {
      b.shape = Shape::kBox;
      b.semantic = semantic_kitti::kTruck;
      b.extent = {6.0 + 2.0 * unit(rng), 2.3 + 0.2 * unit(rng), 2.6 + 0.6 * unit(rng)};
    } else {
      b.shape = Shape::kCylinder;
      b.semantic = semantic_kitti::kPerson;
      b.extent = {0.6, 0.6, 1.6 + 0.3 * unit(rng)};
    }
    const double dist = options.min_distance + (options.max_distance - options.min_distance) * unit(rng);
    const double bearing = 2.0 * std::numbers::pi * unit(rng);
    const Eigen::Vector2d xy(dist * std::cos(bearing), dist * std::sin(bearing));
    const double radius = 0.5 * std::hypot(b.extent.x(), b.extent.y());
    bool clear = true;
    for (const auto& [c, r] : footprints) {
      if ((c - xy).norm() < r + radius + options.clearance) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    b.center = {xy.x(), xy.y(), ground + 0.5 * b.extent.z()};
    b.yaw = std::numbers::pi * unit(rng);
    footprints.emplace_back(xy, radius);
    spec.instances.push_back(b);
  }
  return spec;
}

ProjectedScene ProjectScene(const Scene& scene, const ProjectionConfig& cfg,
                            const ClassRegistry& registry) {
  ProjectedScene out;
  out.range = ProjectToRangeView(scene.cloud, cfg);
  const auto& labels = *scene.cloud.labels;
  std::vector<std::int32_t> sem(labels.size()), inst(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sem[i] = labels[i].semantic;
    inst[i] = labels[i].instance;
  }
  out.semantic = RasterizePointValues(out.range, sem, 0);
  out.instance = RasterizePointValues(out.range, inst, 0);
  out.embedding.ex = ImageD::Zero(cfg.height, cfg.width);
  out.embedding.ey = ImageD::Zero(cfg.height, cfg.width);
  for (Index r = 0; r < cfg.height; ++r) {
    for (Index c = 0; c < cfg.width; ++c) {
      const std::int32_t p = out.range.pixel_to_point(r, c);
      if (p == kNoPoint) continue;
      out.embedding.ex(r, c) = scene.embeddings(p, 0);
      out.embedding.ey(r, c) = scene.embeddings(p, 1);
    }
  }
  out.embedding.foreground = ForegroundMask(out.semantic, registry.thing_classes);
  return out;
}

std::vector<std::int32_t> BfsClusterOracle(const Eigen::Ref<const Embedding2<double>>& points,
                                           double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidParams, "radius must be positive");
  const Index n = points.rows();
  const double r2 = radius * radius;
  std::vector<std::int32_t> labels(static_cast<std::size_t>(n), 0);
  std::int32_t next = 0;
  std::deque<Index> queue;
  for (Index seed = 0; seed < n; ++seed) {
    if (labels[seed] != 0) continue;
    labels[seed] = ++next;
    queue.push_back(seed);
    while (!queue.empty()) {
      const Index i = queue.front();
      queue.pop_front();
      for (Index j = 0; j < n; ++j) {
        if (labels[j] != 0) continue;
        if ((points.row(i) - points.row(j)).squaredNorm() <= r2) {
          labels[j] = next;
          queue.push_back(j);
        }
      }
    }
  }
  return labels;
}

std::vector<std::int32_t> ReachabilityOracle(const BoolMatrix& adjacency) {
  const Index m = adjacency.rows();
  if (m > 256) throw Error(ErrorCode::kOracleScaleError, "reachability oracle is limited to 256 nodes");
  if (adjacency.cols() != m) throw Error(ErrorCode::kShapeError, "adjacency must be square");
  Eigen::MatrixXi reach = adjacency.cast<int>();
  reach.diagonal().setOnes();
  for (;;) {
    Eigen::MatrixXi next = ((reach * reach).array() > 0).cast<int>();
    if (next == reach) break;
    reach = std::move(next);
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(m), 0);
  std::int32_t k = 0;
  for (Index i = 0; i < m; ++i) {
    if (labels[i] != 0) continue;
    ++k;
    for (Index j = i; j < m; ++j) {
      if (reach(i, j) && reach(j, i)) labels[j] = k;
    }
  }
  return labels;
}

OracleNormals NormalsOracle(const PointCloud& cloud, int knn, const std::vector<Index>& queries) {
  if (knn < 3) throw Error(ErrorCode::kInvalidParams, "plane fit needs at least 3 neighbours");
  const Index n = cloud.size();
  std::vector<Index> q = queries;
  if (q.empty()) {
    q.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) q[i] = i;
  }
  const Index k = std::min<Index>(knn, n);
  OracleNormals out;
  out.normals = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>::Zero(
      static_cast<Index>(q.size()), 3);
  out.valid.assign(q.size(), false);

  std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
  for (std::size_t qi = 0; qi < q.size(); ++qi) {
    const Eigen::RowVector3d p = cloud.xyz.row(q[qi]);
    for (Index j = 0; j < n; ++j) dist[j] = {(cloud.xyz.row(j) - p).squaredNorm(), j};
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (Index j = 0; j < k; ++j) mean += cloud.xyz.row(dist[j].second).transpose();
    mean /= static_cast<double>(k);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (Index j = 0; j < k; ++j) {
      const Eigen::Vector3d d = cloud.xyz.row(dist[j].second).transpose() - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d lambda = eig.eigenvalues();  // ascending
    if (!(lambda(2) > 0.0) || lambda(1) <= 1e-10 * lambda(2)) continue;
    Eigen::Vector3d normal = eig.eigenvectors().col(0);
    if (normal.dot(p.transpose()) > 0.0) normal = -normal;
    out.normals.row(static_cast<Index>(qi)) = normal.transpose();
    out.valid[qi] = true;
  }
  return out;
}

double RandIndex(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeError, "labelings differ in length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::int32_t, double> ca, cb;
  std::map<std::pair<std::int32_t, std::int32_t>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    cab[{a[i], b[i]}] += 1;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double sa = 0, sb = 0, sab = 0;
  for (const auto& [k, v] : ca) sa += pairs(v);
  for (const auto& [k, v] : cb) sb += pairs(v);
  for (const auto& [k, v] : cab) sab += pairs(v);
  const double total = pairs(n);
  // Agreements: pairs together in both plus pairs apart in both.
  return (total - sa - sb + 2.0 * sab) / total;
}

}  // namespace rvpan::synth
