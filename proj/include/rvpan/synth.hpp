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

// Synthetic labeled scans and slow reference algorithms for testing.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rvpan/instance.hpp"
#include "rvpan/projection.hpp"
#include "rvpan/types.hpp"

namespace rvpan::synth {

enum class Shape { kBox, kCylinder, kPlanePatch };

/// One object of the scene. `extent` is the full size along the local axes:
/// boxes (length, width, height); cylinders (diameter, unused, height);
/// plane patches (width, unused, height). Patches are vertical, facing
/// (cos yaw, sin yaw, 0).
struct Blueprint {
  Shape shape = Shape::kBox;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extent = Eigen::Vector3d::Ones();
  double yaw = 0.0;  // radians
  std::int32_t semantic = semantic_kitti::kCar;
};

struct SensorModel {
  ProjectionConfig projection = ProjectionConfig::Beams64();
  double min_range = 0.5;
  double max_range = 80.0;
};

struct SceneSpec {
  std::vector<Blueprint> instances;
  std::optional<double> ground_z = -1.73;
  std::int32_t ground_class = semantic_kitti::kRoad;
  SensorModel sensor;
  double embedding_sigma = 0.0;  // meters
  std::uint64_t seed = 0;
  ClassRegistry registry = ClassRegistry::SemanticKitti();

  /// Throws InvalidParams on a degenerate extent or negative sigma.
  void Validate() const;
};

struct Scene {
  PointCloud cloud;                // with ground-truth labels
  Embedding2<double> embeddings;   // per point; instance centroid (+ noise) on things
  std::vector<Eigen::Vector2d> centroids;  // index = instance id - 1
  std::size_t num_foreground = 0;
};

/// Casts one ray through every pixel center; each ray keeps its nearest hit.
/// Throws EmptyScene if nothing is hit.
Scene GenerateScene(const SceneSpec& spec);

struct RandomSceneOptions {
  int min_instances = 3;
  int max_instances = 15;
  double min_distance = 6.0;   // meters from the sensor
  double max_distance = 30.0;
  double clearance = 1.0;      // gap between object footprints
  double embedding_sigma = 0.0;
  SensorModel sensor;
};

/// Cars, trucks and pedestrians scattered on the ground with disjoint
/// footprints.
SceneSpec RandomSceneSpec(std::uint64_t seed, const RandomSceneOptions& options);

/// Range image, semantic image, and embedding map of a generated scene.
struct ProjectedScene {
  RangeImage range;
  Image<std::int32_t> semantic;
  Image<std::int32_t> instance;
  EmbeddingMap embedding;
};

ProjectedScene ProjectScene(const Scene& scene, const ProjectionConfig& cfg,
                            const ClassRegistry& registry);

/// Points within `radius` of each other are linked; labels are connected
/// components found by breadth-first search (1..K, by smallest member).
std::vector<std::int32_t> BfsClusterOracle(const Eigen::Ref<const Embedding2<double>>& points,
                                           double radius);

/// Components from the transitive closure of the adjacency, computed by
/// repeated boolean matrix squaring. Throws OracleScaleError above 256 nodes.
std::vector<std::int32_t> ReachabilityOracle(const BoolMatrix& adjacency);

struct OracleNormals {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> normals;
  std::vector<bool> valid;
};

/// Least-squares plane fit over the k nearest neighbours (brute force) of
/// each query point; normal = eigenvector of the smallest covariance
/// eigenvalue, oriented toward the sensor. Neighbourhoods of rank < 2 are
/// flagged invalid. An empty `queries` means every point.
OracleNormals NormalsOracle(const PointCloud& cloud, int knn, const std::vector<Index>& queries = {});

/// Rand index between two labelings of the same elements.
double RandIndex(const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b);

}  // namespace rvpan::synth
