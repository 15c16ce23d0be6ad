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

// Binary file formats. All multi-byte values are little-endian.
//
//   scan  (.bin)    float32 quadruples x, y, z, remission; N = size / 16
//   label (.label)  uint32 per point; low 16 bits class, high 16 bits instance
//   map   (.rvm)    16-byte header then row-major H x W x C samples:
//                     u32 magic  "RVF4" (float32) or "RVU2" (uint16)
//                     u32 height, u32 width, u32 channels

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "rvpan/depth_completion.hpp"
#include "rvpan/fusion.hpp"
#include "rvpan/instance.hpp"
#include "rvpan/projection.hpp"
#include "rvpan/types.hpp"

namespace rvpan::io {

inline constexpr std::uint32_t kFloatMapMagic = 0x34465652;  // "RVF4"
inline constexpr std::uint32_t kU16MapMagic = 0x32555652;    // "RVU2"

PointCloud ReadScanBin(const std::filesystem::path& path);
void WriteScanBin(const std::filesystem::path& path, const PointCloud& cloud);

std::uint32_t PackLabel(const PointLabel& label);
PointLabel UnpackLabel(std::uint32_t word);

/// Throws ConsistencyError when `expected_count` is given and differs.
std::vector<PointLabel> ReadLabels(const std::filesystem::path& path,
                                   std::optional<std::size_t> expected_count = std::nullopt);
/// Throws RangeError for class or instance ids outside [0, 2^16).
void WriteLabels(const std::filesystem::path& path, const std::vector<PointLabel>& labels);
void WritePanoptic(const std::filesystem::path& path, const PanopticLabeling& labeling);

template <typename T>
struct MapData {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<T> data;  // (row * width + col) * channels + channel

  T at(std::uint32_t row, std::uint32_t col, std::uint32_t ch) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

MapData<float> ReadFloatMap(const std::filesystem::path& path);
void WriteFloatMap(const std::filesystem::path& path, const MapData<float>& map);
MapData<std::uint16_t> ReadU16Map(const std::filesystem::path& path);
void WriteU16Map(const std::filesystem::path& path, const MapData<std::uint16_t>& map);

/// Interleaves single-channel images into one map; all must share a size.
MapData<float> PackChannels(const std::vector<const ImageD*>& channels);

/// Embedding file (2 channels) to an embedding map; the mask is left empty.
EmbeddingMap EmbeddingFromMap(const MapData<float>& map);
MapData<float> EmbeddingToMap(const EmbeddingMap& embedding);

Image<std::int32_t> SemanticFromMap(const MapData<std::uint16_t>& map);
MapData<std::uint16_t> SemanticToMap(const Image<std::int32_t>& semantic);

/// Completed depth followed by nx, ny, nz.
MapData<float> NormalsToMap(const ImageD& completed, const NormalMap& normals);

}  // namespace rvpan::io
