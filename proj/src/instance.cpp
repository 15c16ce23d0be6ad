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

#include "rvpan/instance.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace rvpan {

namespace {

struct CellKey {
  std::int64_t x;
  std::int64_t y;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    const auto hx = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    const auto hy = static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full;
    return static_cast<std::size_t>(hx ^ (hy + 0x165667B19E3779F9ull + (hx << 6) + (hx >> 2)));
  }
};

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Index{0});
  }

  Index Find(Index x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The smaller root becomes the representative.
  void Union(Index a, Index b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<Index> parent_;
};

}  // namespace

void InstanceParams::Validate() const {
  if (!(grid_size > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "grid size must be positive");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "threshold must lie in (0, 1)");
  }
  if (const auto* fixed = std::get_if<FixedAlpha>(&alpha_mode)) {
    if (!(fixed->alpha > 0.0)) throw Error(ErrorCode::kInvalidParams, "alpha must be positive");
  }
}

double InstanceParams::alpha() const {
  if (const auto* fixed = std::get_if<FixedAlpha>(&alpha_mode)) return fixed->alpha;
  return DeriveAlpha(threshold, grid_size);
}

double DeriveAlpha(double threshold, double grid_size) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidParams, "threshold must lie in (0, 1)");
  }
  if (!(grid_size > 0.0)) throw Error(ErrorCode::kInvalidParams, "grid size must be positive");
  return -std::log(threshold) / (2.0 * grid_size);
}

Mask ForegroundMask(const Image<std::int32_t>& semantic,
                    const std::vector<std::int32_t>& thing_set) {
  Mask mask(semantic.rows(), semantic.cols());
  for (Index i = 0; i < semantic.size(); ++i) {
    const std::int32_t c = semantic.data()[i];
    mask.data()[i] = std::find(thing_set.begin(), thing_set.end(), c) != thing_set.end() ? 1 : 0;
  }
  return mask;
}

EmbeddingMap ComposeEmbedding(const RangeImage& ri, const ImageD& offset_x, const ImageD& offset_y,
                              const Mask& foreground) {
  if (offset_x.rows() != ri.height() || offset_x.cols() != ri.width() ||
      offset_y.rows() != ri.height() || offset_y.cols() != ri.width() ||
      foreground.rows() != ri.height() || foreground.cols() != ri.width()) {
    throw Error(ErrorCode::kShapeError, "offset maps must match the range image");
  }
  return {ri.x + offset_x, ri.y + offset_y, foreground};
}

ForegroundEmbedding FlattenForeground(const EmbeddingMap& embedding) {
  const Index rows = embedding.ex.rows();
  const Index cols = embedding.ex.cols();
  if (embedding.ey.rows() != rows || embedding.ey.cols() != cols ||
      embedding.foreground.rows() != rows || embedding.foreground.cols() != cols) {
    throw Error(ErrorCode::kShapeError, "embedding channels and mask differ in size");
  }
  const Index n = static_cast<Index>(embedding.foreground.cast<Index>().sum());
  ForegroundEmbedding out;
  out.points.resize(n, 2);
  out.pixels.reserve(static_cast<std::size_t>(n));
  Index k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      if (!embedding.foreground(i, j)) continue;
      out.points(k, 0) = embedding.ex(i, j);
      out.points(k, 1) = embedding.ey(i, j);
      out.pixels.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
      ++k;
    }
  }
  return out;
}

Pillars Pillarize(const Eigen::Ref<const Embedding2<double>>& embeddings, double grid_size) {
  if (!(grid_size > 0.0)) throw Error(ErrorCode::kInvalidParams, "grid size must be positive");
  const Index n = embeddings.rows();
  Pillars out;
  out.point_to_pillar.resize(static_cast<std::size_t>(n));
  std::unordered_map<CellKey, Index, CellKeyHash> cells;
  cells.reserve(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector2d> sums;
  for (Index i = 0; i < n; ++i) {
    const CellKey key{static_cast<std::int64_t>(std::floor(embeddings(i, 0) / grid_size)),
                      static_cast<std::int64_t>(std::floor(embeddings(i, 1) / grid_size))};
    auto [it, inserted] = cells.try_emplace(key, static_cast<Index>(sums.size()));
    if (inserted) {
      sums.emplace_back(Eigen::Vector2d::Zero());
      out.members.emplace_back();
    }
    const Index p = it->second;
    sums[p] += embeddings.row(i).transpose();
    out.members[p].push_back(i);
    out.point_to_pillar[i] = p;
  }
  out.centers.resize(static_cast<Index>(sums.size()), 2);
  for (std::size_t p = 0; p < sums.size(); ++p) {
    out.centers.row(static_cast<Index>(p)) =
        (sums[p] / static_cast<double>(out.members[p].size())).transpose();
  }
  return out;
}

std::vector<std::int32_t> ConnectedComponents(const BoolMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorCode::kShapeError, "adjacency must be square");
  }
  const Index m = adjacency.rows();
  DisjointSets sets(m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < j; ++i) {
      if (adjacency(i, j) || adjacency(j, i)) sets.Union(i, j);
    }
  }
  std::vector<std::int32_t> labels(static_cast<std::size_t>(m), 0);
  std::vector<std::int32_t> root_label(static_cast<std::size_t>(m), 0);
  std::int32_t next = 0;
  for (Index i = 0; i < m; ++i) {
    const Index root = sets.Find(i);
    if (root_label[root] == 0) root_label[root] = ++next;
    labels[i] = root_label[root];
  }
  return labels;
}

Image<std::int32_t> AssignInstanceIds(const std::vector<std::int32_t>& components,
                                      const Pillars& pillars,
                                      const std::vector<PixelIndex>& back_index, int height,
                                      int width) {
  if (back_index.size() != pillars.point_to_pillar.size()) {
    throw Error(ErrorCode::kShapeError, "back-index and pillar membership differ in length");
  }
  Image<std::int32_t> ids = Image<std::int32_t>::Zero(height, width);
  for (std::size_t k = 0; k < back_index.size(); ++k) {
    const PixelIndex px = back_index[k];
    ids(px.row, px.col) = components[static_cast<std::size_t>(pillars.point_to_pillar[k])];
  }
  return ids;
}

std::int32_t PillarGraph::num_instances() const {
  std::int32_t k = 0;
  for (auto c : components) k = std::max(k, c);
  return k;
}

namespace {

PillarGraph BuildGraph(const Eigen::Ref<const Embedding2<double>>& embeddings,
                       const InstanceParams& params) {
  params.Validate();
  PillarGraph graph;
  graph.alpha = params.alpha();
  graph.pillars = Pillarize(embeddings, params.grid_size);
  graph.pairwise = PairwiseMatrix<double>(graph.pillars.centers, graph.alpha);
  graph.adjacency = ThresholdAdjacency<double>(graph.pairwise, params.threshold);
  graph.components = ConnectedComponents(graph.adjacency);
  return graph;
}

}  // namespace

std::vector<std::int32_t> SegmentPoints(const Eigen::Ref<const Embedding2<double>>& embeddings,
                                        const InstanceParams& params, PillarGraph* graph_out) {
  PillarGraph graph = BuildGraph(embeddings, params);
  std::vector<std::int32_t> ids(graph.pillars.point_to_pillar.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    ids[k] = graph.components[static_cast<std::size_t>(graph.pillars.point_to_pillar[k])];
  }
  if (graph_out) *graph_out = std::move(graph);
  return ids;
}

InstanceResult SegmentInstances(const EmbeddingMap& embedding, const InstanceParams& params) {
  const ForegroundEmbedding fg = FlattenForeground(embedding);
  InstanceResult result;
  result.graph = BuildGraph(fg.points, params);
  result.instance_ids = AssignInstanceIds(result.graph.components, result.graph.pillars,
                                          fg.pixels, embedding.height(), embedding.width());
  return result;
}

}  // namespace rvpan
