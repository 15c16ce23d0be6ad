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

#include "rvpan/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rvpan::io {

namespace {

std::vector<unsigned char> ReadAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed for " + path.string());
  return bytes;
}

void WriteAll(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::uint32_t LoadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void StoreU32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

float LoadF32(const unsigned char* p) { return std::bit_cast<float>(LoadU32(p)); }

void StoreF32(std::vector<unsigned char>& out, float v) { StoreU32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint16_t LoadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void StoreU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

template <typename T>
MapData<T> ReadMap(const std::filesystem::path& path, std::uint32_t magic) {
  const auto bytes = ReadAll(path);
  if (bytes.size() < 16) {
    throw Error(ErrorCode::kFormatError, path.string() + ": truncated map header");
  }
  if (LoadU32(bytes.data()) != magic) {
    throw Error(ErrorCode::kFormatError, path.string() + ": unexpected map magic");
  }
  MapData<T> map;
  map.height = LoadU32(bytes.data() + 4);
  map.width = LoadU32(bytes.data() + 8);
  map.channels = LoadU32(bytes.data() + 12);
  const std::size_t count =
      static_cast<std::size_t>(map.height) * map.width * map.channels;
  if (bytes.size() != 16 + count * sizeof(T)) {
    throw Error(ErrorCode::kFormatError, path.string() + ": payload size does not match header");
  }
  map.data.resize(count);
  const unsigned char* p = bytes.data() + 16;
  for (std::size_t i = 0; i < count; ++i, p += sizeof(T)) {
    if constexpr (std::is_same_v<T, float>) {
      map.data[i] = LoadF32(p);
    } else {
      map.data[i] = LoadU16(p);
    }
  }
  return map;
}

template <typename T>
void WriteMap(const std::filesystem::path& path, const MapData<T>& map, std::uint32_t magic) {
  const std::size_t count = static_cast<std::size_t>(map.height) * map.width * map.channels;
  if (map.data.size() != count) {
    throw Error(ErrorCode::kShapeError, "map payload does not match its header");
  }
  std::vector<unsigned char> bytes;
  bytes.reserve(16 + count * sizeof(T));
  StoreU32(bytes, magic);
  StoreU32(bytes, map.height);
  StoreU32(bytes, map.width);
  StoreU32(bytes, map.channels);
  for (T v : map.data) {
    if constexpr (std::is_same_v<T, float>) {
      StoreF32(bytes, v);
    } else {
      StoreU16(bytes, v);
    }
  }
  WriteAll(path, bytes);
}

}  // namespace

PointCloud ReadScanBin(const std::filesystem::path& path) {
  const auto bytes = ReadAll(path);
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::kFormatError,
                path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  const Index n = static_cast<Index>(bytes.size() / 16);
  PointCloud cloud;
  cloud.xyz.resize(n, 3);
  cloud.remission.resize(n);
  const unsigned char* p = bytes.data();
  for (Index i = 0; i < n; ++i, p += 16) {
    cloud.xyz(i, 0) = LoadF32(p);
    cloud.xyz(i, 1) = LoadF32(p + 4);
    cloud.xyz(i, 2) = LoadF32(p + 8);
    cloud.remission(i) = LoadF32(p + 12);
  }
  return cloud;
}

void WriteScanBin(const std::filesystem::path& path, const PointCloud& cloud) {
  std::vector<unsigned char> bytes;
  bytes.reserve(static_cast<std::size_t>(cloud.size()) * 16);
  const bool has_remission = cloud.remission.size() == cloud.size();
  for (Index i = 0; i < cloud.size(); ++i) {
    StoreF32(bytes, static_cast<float>(cloud.xyz(i, 0)));
    StoreF32(bytes, static_cast<float>(cloud.xyz(i, 1)));
    StoreF32(bytes, static_cast<float>(cloud.xyz(i, 2)));
    StoreF32(bytes, has_remission ? static_cast<float>(cloud.remission(i)) : 0.0f);
  }
  WriteAll(path, bytes);
}

std::uint32_t PackLabel(const PointLabel& label) {
  if (label.semantic < 0 || label.semantic > 0xFFFF || label.instance < 0 ||
      label.instance > 0xFFFF) {
    throw Error(ErrorCode::kRangeError, "label (" + std::to_string(label.semantic) + ", " +
                                            std::to_string(label.instance) +
                                            ") does not fit in 16 + 16 bits");
  }
  return static_cast<std::uint32_t>(label.semantic) |
         (static_cast<std::uint32_t>(label.instance) << 16);
}

PointLabel UnpackLabel(std::uint32_t word) {
  return {static_cast<std::int32_t>(word & 0xFFFF), static_cast<std::int32_t>(word >> 16)};
}

std::vector<PointLabel> ReadLabels(const std::filesystem::path& path,
                                   std::optional<std::size_t> expected_count) {
  const auto bytes = ReadAll(path);
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorCode::kFormatError,
                path.string() + ": size " + std::to_string(bytes.size()) + " is not a multiple of 4");
  }
  const std::size_t n = bytes.size() / 4;
  if (expected_count && *expected_count != n) {
    throw Error(ErrorCode::kConsistencyError, path.string() + ": " + std::to_string(n) +
                                                  " labels for " +
                                                  std::to_string(*expected_count) + " points");
  }
  std::vector<PointLabel> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = UnpackLabel(LoadU32(bytes.data() + 4 * i));
  return labels;
}

void WriteLabels(const std::filesystem::path& path, const std::vector<PointLabel>& labels) {
  std::vector<unsigned char> bytes;
  bytes.reserve(labels.size() * 4);
  for (const auto& l : labels) StoreU32(bytes, PackLabel(l));
  WriteAll(path, bytes);
}

void WritePanoptic(const std::filesystem::path& path, const PanopticLabeling& labeling) {
  if (labeling.semantic.size() != labeling.instance.size()) {
    throw Error(ErrorCode::kShapeError, "semantic and instance lengths differ");
  }
  std::vector<PointLabel> labels(labeling.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = {labeling.semantic[i], labeling.instance[i]};
  }
  WriteLabels(path, labels);
}

MapData<float> ReadFloatMap(const std::filesystem::path& path) {
  return ReadMap<float>(path, kFloatMapMagic);
}

void WriteFloatMap(const std::filesystem::path& path, const MapData<float>& map) {
  WriteMap(path, map, kFloatMapMagic);
}

MapData<std::uint16_t> ReadU16Map(const std::filesystem::path& path) {
  return ReadMap<std::uint16_t>(path, kU16MapMagic);
}

void WriteU16Map(const std::filesystem::path& path, const MapData<std::uint16_t>& map) {
  WriteMap(path, map, kU16MapMagic);
}

MapData<float> PackChannels(const std::vector<const ImageD*>& channels) {
  if (channels.empty()) throw Error(ErrorCode::kShapeError, "no channels to pack");
  const Index rows = channels.front()->rows();
  const Index cols = channels.front()->cols();
  for (const ImageD* c : channels) {
    if (c->rows() != rows || c->cols() != cols) {
      throw Error(ErrorCode::kShapeError, "channels differ in size");
    }
  }
  MapData<float> map;
  map.height = static_cast<std::uint32_t>(rows);
  map.width = static_cast<std::uint32_t>(cols);
  map.channels = static_cast<std::uint32_t>(channels.size());
  map.data.reserve(static_cast<std::size_t>(rows * cols) * channels.size());
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      for (const ImageD* c : channels) map.data.push_back(static_cast<float>((*c)(i, j)));
    }
  }
  return map;
}

EmbeddingMap EmbeddingFromMap(const MapData<float>& map) {
  if (map.channels != 2) {
    throw Error(ErrorCode::kFormatError, "embedding map needs 2 channels, got " +
                                             std::to_string(map.channels));
  }
  EmbeddingMap e;
  e.ex.resize(map.height, map.width);
  e.ey.resize(map.height, map.width);
  for (std::uint32_t i = 0; i < map.height; ++i) {
    for (std::uint32_t j = 0; j < map.width; ++j) {
      e.ex(i, j) = map.at(i, j, 0);
      e.ey(i, j) = map.at(i, j, 1);
    }
  }
  return e;
}

MapData<float> EmbeddingToMap(const EmbeddingMap& embedding) {
  return PackChannels({&embedding.ex, &embedding.ey});
}

Image<std::int32_t> SemanticFromMap(const MapData<std::uint16_t>& map) {
  if (map.channels != 1) {
    throw Error(ErrorCode::kFormatError, "semantic map needs 1 channel, got " +
                                             std::to_string(map.channels));
  }
  Image<std::int32_t> out(map.height, map.width);
  for (std::size_t i = 0; i < map.data.size(); ++i) out.data()[i] = map.data[i];
  return out;
}

MapData<std::uint16_t> SemanticToMap(const Image<std::int32_t>& semantic) {
  MapData<std::uint16_t> map;
  map.height = static_cast<std::uint32_t>(semantic.rows());
  map.width = static_cast<std::uint32_t>(semantic.cols());
  map.channels = 1;
  map.data.resize(static_cast<std::size_t>(semantic.size()));
  for (Index i = 0; i < semantic.size(); ++i) {
    const std::int32_t v = semantic.data()[i];
    if (v < 0 || v > 0xFFFF) throw Error(ErrorCode::kRangeError, "class id does not fit in 16 bits");
    map.data[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(v);
  }
  return map;
}

MapData<float> NormalsToMap(const ImageD& completed, const NormalMap& normals) {
  return PackChannels({&completed, &normals.nx, &normals.ny, &normals.nz});
}

}  // namespace rvpan::io
