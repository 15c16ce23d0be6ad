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

#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "test_util.hpp"

namespace rvpan::synth {
namespace {

using namespace semantic_kitti;

TEST(GenerateSceneTest, OneBoxSharesIdAndEmbedding) {
  SceneSpec spec;
  spec.instances.push_back({Shape::kBox, {12, 3, -0.9}, {4, 1.8, 1.5}, 0.3, kCar});
  const auto scene = GenerateScene(spec);
  const auto& labels = *scene.cloud.labels;
  std::set<std::int32_t> ids;
  Eigen::Vector2d first(NAN, NAN);
  std::size_t fg = 0;
  for (Index i = 0; i < scene.cloud.size(); ++i) {
    const auto& l = labels[static_cast<std::size_t>(i)];
    if (l.semantic != kCar) {
      EXPECT_EQ(l.instance, 0);
      continue;
    }
    ++fg;
    ids.insert(l.instance);
    const Eigen::Vector2d e = scene.embeddings.row(i).transpose();
    if (std::isnan(first.x())) first = e;
    ASSERT_EQ(e, first);
  }
  EXPECT_GT(fg, 100u);
  EXPECT_EQ(fg, scene.num_foreground);
  EXPECT_EQ(ids, (std::set<std::int32_t>{1}));
  ASSERT_EQ(scene.centroids.size(), 1u);
  EXPECT_EQ(first, scene.centroids[0]);
}

TEST(GenerateSceneTest, GroundOnlyHasNoForeground) {
  const auto scene = GenerateScene(SceneSpec{});
  EXPECT_EQ(scene.num_foreground, 0u);
  for (const auto& l : *scene.cloud.labels) EXPECT_EQ(l, (PointLabel{kRoad, 0}));
  // Every point lies on the ground plane.
  EXPECT_LT((scene.cloud.xyz.col(2).array() + 1.73).abs().maxCoeff(), 1e-9);
}

TEST(GenerateSceneTest, EmptySceneIsRejected) {
  SceneSpec spec;
  spec.ground_z.reset();
  EXPECT_THROW_CODE(GenerateScene(spec), ErrorCode::kEmptyScene);
}

TEST(GenerateSceneTest, FixedSeedIsByteIdentical) {
  RandomSceneOptions opts;
  opts.embedding_sigma = 0.05;
  const auto a = GenerateScene(RandomSceneSpec(42, opts));
  const auto b = GenerateScene(RandomSceneSpec(42, opts));
  ASSERT_EQ(a.cloud.xyz.size(), b.cloud.xyz.size());
  EXPECT_EQ(std::memcmp(a.cloud.xyz.data(), b.cloud.xyz.data(), sizeof(double) * a.cloud.xyz.size()), 0);
  EXPECT_EQ(std::memcmp(a.embeddings.data(), b.embeddings.data(), sizeof(double) * a.embeddings.size()), 0);
  EXPECT_EQ(*a.cloud.labels, *b.cloud.labels);
}

TEST(RandomSceneSpecTest, RespectsCountAndSeparation) {
  RandomSceneOptions opts;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto spec = RandomSceneSpec(seed, opts);
    ASSERT_GE(static_cast<int>(spec.instances.size()), opts.min_instances);
    ASSERT_LE(static_cast<int>(spec.instances.size()), opts.max_instances);
  }
}

TEST(BfsOracleTest, Cases) {
  Embedding2<double> two(4, 2);
  two << 0, 0, 0.1, 0, 10, 0, 10.1, 0;
  const auto labels = BfsClusterOracle(two, 1.0);
  EXPECT_EQ(labels, (std::vector<std::int32_t>{1, 1, 2, 2}));
  Embedding2<double> chain(20, 2);
  for (int i = 0; i < 20; ++i) chain.row(i) << 0.9 * i, 0.0;
  for (auto l : BfsClusterOracle(chain, 1.0)) EXPECT_EQ(l, 1);
  Embedding2<double> one(1, 2);
  one << 3, 4;
  EXPECT_EQ(BfsClusterOracle(one, 1.0), (std::vector<std::int32_t>{1}));
}

TEST(ReachabilityOracleTest, Cases) {
  const auto id = ReachabilityOracle(BoolMatrix::Identity(5, 5));
  EXPECT_EQ(id, (std::vector<std::int32_t>{1, 2, 3, 4, 5}));
  for (auto l : ReachabilityOracle(BoolMatrix::Constant(5, 5, true))) EXPECT_EQ(l, 1);
  EXPECT_THROW_CODE(ReachabilityOracle(BoolMatrix::Identity(300, 300)), ErrorCode::kOracleScaleError);
}

PointCloud FromRows(const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>& xyz) {
  PointCloud c;
  c.xyz = xyz;
  c.remission = Eigen::VectorXd::Zero(xyz.rows());
  return c;
}

TEST(NormalsOracleTest, PlaneSamples) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  const Eigen::Vector3d n = Eigen::Vector3d(1, 2, 3).normalized();
  const Eigen::Vector3d a = n.unitOrthogonal(), b = n.cross(a);
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> xyz(200, 3);
  for (int i = 0; i < 200; ++i) xyz.row(i) = (Eigen::Vector3d(5, 5, 5) + u(rng) * a + u(rng) * b).transpose();
  const auto out = NormalsOracle(FromRows(xyz), 10);
  for (int i = 0; i < 200; ++i) {
    ASSERT_TRUE(out.valid[static_cast<std::size_t>(i)]);
    const double c = std::abs(out.normals.row(i).dot(n));
    ASSERT_LT(std::acos(std::min(c, 1.0)), 1e-4);
  }
}

TEST(NormalsOracleTest, SphereSamplesAreRadial) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> xyz(20000, 3);
  for (int i = 0; i < 20000; ++i) {
    Eigen::Vector3d v(g(rng), g(rng), g(rng));
    xyz.row(i) = (10.0 * v.normalized()).transpose();
  }
  const std::vector<Index> queries{0, 100, 1000};
  const auto out = NormalsOracle(FromRows(xyz), 8, queries);
  for (std::size_t k = 0; k < queries.size(); ++k) {
    ASSERT_TRUE(out.valid[k]);
    const double c = std::abs(out.normals.row(static_cast<Index>(k)).dot(xyz.row(queries[k]).normalized()));
    EXPECT_GT(c, std::cos(2.0 * M_PI / 180.0));
  }
}

TEST(NormalsOracleTest, CollinearPointsAreFlagged) {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> xyz(10, 3);
  for (int i = 0; i < 10; ++i) xyz.row(i) << i, 2.0 * i, 1.0;
  const auto out = NormalsOracle(FromRows(xyz), 5);
  for (bool v : out.valid) EXPECT_FALSE(v);
}

TEST(RandIndexTest, RenamingInvariantAndDetectsSplits) {
  EXPECT_EQ(RandIndex({1, 1, 2, 2}, {7, 7, 3, 3}), 1.0);
  EXPECT_LT(RandIndex({1, 1, 1, 1}, {1, 1, 2, 2}), 1.0);
  // 4 points: pairs (0,1) agree, (2,3) disagree... brute force count.
  const std::vector<std::int32_t> a{1, 1, 2, 3}, b{1, 2, 2, 3};
  int agree = 0, total = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      agree += (a[i] == a[j]) == (b[i] == b[j]);
      ++total;
    }
  }
  EXPECT_DOUBLE_EQ(RandIndex(a, b), static_cast<double>(agree) / total);
}

}  // namespace
}  // namespace rvpan::synth
