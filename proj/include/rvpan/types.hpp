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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rvpan {

using Index = Eigen::Index;

/// Row-major H x W image of a single channel.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageD = Image<double>;
using ImageF = Image<float>;
using Mask = Image<std::uint8_t>;
using LabelImage = Image<std::int32_t>;

/// N x 2 embeddings, one row per point.
template <typename Scalar>
using Embedding2 = Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor>;

template <typename Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorCode {
  kEmptyInput,
  kDegeneratePoint,
  kShapeError,
  kInvalidWindow,
  kInvalidParams,
  kLabelError,
  kOracleScaleError,
  kEmptyScene,
  kFormatError,
  kIoError,
  kConsistencyError,
  kRangeError,
  kConfigError,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const { return code_; }
  /// The description without the code prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kDegeneratePoint: return "DegeneratePoint";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kInvalidWindow: return "InvalidWindow";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kLabelError: return "LabelError";
    case ErrorCode::kOracleScaleError: return "OracleScaleError";
    case ErrorCode::kEmptyScene: return "EmptyScene";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConsistencyError: return "ConsistencyError";
    case ErrorCode::kRangeError: return "RangeError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

struct PixelIndex {
  std::int32_t row = 0;
  std::int32_t col = 0;

  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Per-point ground truth or prediction: semantic class and instance id.
/// Instance id 0 means "no instance" (stuff or background).
struct PointLabel {
  std::int32_t semantic = 0;
  std::int32_t instance = 0;

  friend bool operator==(const PointLabel&, const PointLabel&) = default;
};

/// A LiDAR scan. `xyz` holds one point per row in meters; `remission` is
/// unitless in [0, 1]. Labels are optional and, when present, have N entries.
struct PointCloud {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> xyz;
  Eigen::VectorXd remission;
  std::optional<std::vector<PointLabel>> labels;

  Index size() const { return xyz.rows(); }
  bool empty() const { return xyz.rows() == 0; }
};

/// Thing/stuff split of the semantic classes. Class 0 is the ignore label.
struct ClassRegistry {
  int num_classes = 20;  // including the ignore class 0
  std::vector<std::int32_t> thing_classes;

  bool is_thing(std::int32_t c) const {
    for (auto t : thing_classes) {
      if (t == c) return true;
    }
    return false;
  }

  /// Nineteen evaluated classes, 1..8 things (car, bicycle, motorcycle,
  /// truck, other-vehicle, person, bicyclist, motorcyclist), 9..19 stuff.
  static ClassRegistry SemanticKitti() {
    ClassRegistry r;
    r.num_classes = 20;
    r.thing_classes = {1, 2, 3, 4, 5, 6, 7, 8};
    return r;
  }
};

namespace semantic_kitti {
inline constexpr std::int32_t kCar = 1;
inline constexpr std::int32_t kTruck = 4;
inline constexpr std::int32_t kPerson = 6;
inline constexpr std::int32_t kRoad = 9;
inline constexpr std::int32_t kBuilding = 13;
inline constexpr std::int32_t kPole = 18;
}  // namespace semantic_kitti

}  // namespace rvpan
