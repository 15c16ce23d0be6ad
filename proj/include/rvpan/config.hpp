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

// Flat `section.key = value` configuration. Blank lines and lines starting
// with '#' are skipped. A key may repeat; scalar lookups take the last value.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rvpan/depth_completion.hpp"
#include "rvpan/fusion.hpp"
#include "rvpan/instance.hpp"
#include "rvpan/losses.hpp"
#include "rvpan/projection.hpp"
#include "rvpan/synth.hpp"

namespace rvpan {

class KeyValueConfig {
 public:
  /// Throws ConfigError naming the offending line.
  static KeyValueConfig Parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueConfig Load(const std::filesystem::path& path);

  /// Replaces every value of `key` (command-line overrides).
  void Set(const std::string& key, const std::string& value);
  void Add(const std::string& key, const std::string& value, int line = 0);

  bool Has(const std::string& key) const;
  std::vector<std::string> GetAll(const std::string& key) const;
  std::vector<std::string> Keys() const;
  /// `source:line` of the last value of `key`, or "override" for values set
  /// programmatically.
  std::string Location(const std::string& key) const;

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  long long GetInt(const std::string& key, long long fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  [[noreturn]] void Fail(const std::string& key, const std::string& why) const;
  const Entry* Last(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::vector<Entry>> entries_;
};

struct StageToggles {
  bool normals = true;
  bool knn = true;
};

struct DataPaths {
  std::string scan;
  std::string labels;
  std::string semantics;
  std::string embeddings;
  std::string output;
};

struct PipelineConfig {
  ProjectionConfig projection;
  CompletionConfig completion;
  InstanceParams instance;
  KnnParams knn;
  loss::LossWeights loss_weights;
  DataPaths data;
  std::size_t eval_min_points = 0;
  StageToggles stages;
  ClassRegistry registry = ClassRegistry::SemanticKitti();

  /// Throws the component error for any invalid field.
  void Validate() const;
};

/// Unknown keys and unparsable values raise ConfigError with the line number.
PipelineConfig PipelineConfigFrom(const KeyValueConfig& kv);

/// `scene.*` keys; see README for the instance line syntax.
synth::SceneSpec SceneSpecFrom(const KeyValueConfig& kv);

}  // namespace rvpan
