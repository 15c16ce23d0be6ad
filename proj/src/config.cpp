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

#include "rvpan/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace rvpan {

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool ParseDouble(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool ParseInt(const std::string& s, long long& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

const std::set<std::string>& PipelineKeys() {
  static const std::set<std::string> keys = {
      "projection.height", "projection.width", "projection.fov_up", "projection.fov_down",
      "projection.preset", "completion.k", "completion.a", "completion.b",
      "completion.wrap_azimuth", "instance.grid_size", "instance.threshold", "instance.alpha",
      "knn.k", "knn.window", "knn.range_cutoff", "knn.sigma", "loss.beta1", "loss.beta2",
      "loss.beta3", "data.scan", "data.labels", "data.semantics", "data.embeddings",
      "data.output", "eval.min_points", "stages.normals", "stages.knn", "classes.things",
      "classes.count"};
  return keys;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(const std::string& text, const std::string& source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = Trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  source + ":" + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = Trim(s.substr(0, eq));
    const std::string value = Trim(s.substr(eq + 1));
    const bool key_ok = !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
    if (!key_ok) {
      throw Error(ErrorCode::kConfigError,
                  source + ":" + std::to_string(line) + ": malformed key '" + key + "'");
    }
    kv.Add(key, value, line);
  }
  return kv;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str(), path.string());
}

void KeyValueConfig::Set(const std::string& key, const std::string& value) {
  entries_[key] = {Entry{value, 0}};
}

void KeyValueConfig::Add(const std::string& key, const std::string& value, int line) {
  entries_[key].push_back({value, line});
}

bool KeyValueConfig::Has(const std::string& key) const { return entries_.count(key) > 0; }

std::vector<std::string> KeyValueConfig::GetAll(const std::string& key) const {
  std::vector<std::string> values;
  auto it = entries_.find(key);
  if (it == entries_.end()) return values;
  for (const auto& e : it->second) values.push_back(e.value);
  return values;
}

std::vector<std::string> KeyValueConfig::Keys() const {
  std::vector<std::string> keys;
  for (const auto& [k, v] : entries_) keys.push_back(k);
  return keys;
}

const KeyValueConfig::Entry* KeyValueConfig::Last(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.empty()) return nullptr;
  return &it->second.back();
}

std::string KeyValueConfig::Location(const std::string& key) const {
  const Entry* e = Last(key);
  return e && e->line > 0 ? source_ + ":" + std::to_string(e->line) : std::string("override");
}

void KeyValueConfig::Fail(const std::string& key, const std::string& why) const {
  throw Error(ErrorCode::kConfigError, Location(key) + ": " + key + ": " + why);
}

std::string KeyValueConfig::GetString(const std::string& key, const std::string& fallback) const {
  const Entry* e = Last(key);
  return e ? e->value : fallback;
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  const Entry* e = Last(key);
  if (!e) return fallback;
  double v = 0.0;
  if (!ParseDouble(e->value, v)) Fail(key, "expected a number, got '" + e->value + "'");
  return v;
}

long long KeyValueConfig::GetInt(const std::string& key, long long fallback) const {
  const Entry* e = Last(key);
  if (!e) return fallback;
  long long v = 0;
  if (!ParseInt(e->value, v)) Fail(key, "expected an integer, got '" + e->value + "'");
  return v;
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  const Entry* e = Last(key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "on") return true;
  if (e->value == "false" || e->value == "0" || e->value == "off") return false;
  Fail(key, "expected true/false, got '" + e->value + "'");
}

void PipelineConfig::Validate() const {
  projection.Validate();
  completion.Validate();
  instance.Validate();
  knn.Validate();
}

PipelineConfig PipelineConfigFrom(const KeyValueConfig& kv) {
  for (const auto& key : kv.Keys()) {
    if (key.rfind("scene.", 0) == 0) continue;
    if (!PipelineKeys().count(key)) {
      throw Error(ErrorCode::kConfigError,
                  kv.Location(key) + ": unknown configuration key '" + key + "'");
    }
  }
  PipelineConfig cfg;
  const std::string preset = kv.GetString("projection.preset", "64");
  if (preset == "32") {
    cfg.projection = ProjectionConfig::Beams32();
  } else if (preset != "64") {
    throw Error(ErrorCode::kConfigError, "projection.preset must be 64 or 32");
  }
  cfg.projection.height = static_cast<int>(kv.GetInt("projection.height", cfg.projection.height));
  cfg.projection.width = static_cast<int>(kv.GetInt("projection.width", cfg.projection.width));
  cfg.projection.fov_up = kv.GetDouble("projection.fov_up", cfg.projection.fov_up);
  cfg.projection.fov_down = kv.GetDouble("projection.fov_down", cfg.projection.fov_down);

  cfg.completion.k = static_cast<int>(kv.GetInt("completion.k", cfg.completion.k));
  cfg.completion.a = kv.GetDouble("completion.a", cfg.completion.a);
  cfg.completion.b = kv.GetDouble("completion.b", cfg.completion.b);
  cfg.completion.wrap_azimuth = kv.GetBool("completion.wrap_azimuth", cfg.completion.wrap_azimuth);

  cfg.instance.grid_size = kv.GetDouble("instance.grid_size", cfg.instance.grid_size);
  cfg.instance.threshold = kv.GetDouble("instance.threshold", cfg.instance.threshold);
  const std::string alpha = kv.GetString("instance.alpha", "derived");
  if (alpha == "derived") {
    cfg.instance.alpha_mode = DerivedAlpha{};
  } else {
    cfg.instance.alpha_mode = FixedAlpha{kv.GetDouble("instance.alpha", 2.5)};
  }

  cfg.knn.k = static_cast<int>(kv.GetInt("knn.k", cfg.knn.k));
  cfg.knn.window = static_cast<int>(kv.GetInt("knn.window", cfg.knn.window));
  cfg.knn.range_cutoff = kv.GetDouble("knn.range_cutoff", cfg.knn.range_cutoff);
  cfg.knn.sigma = kv.GetDouble("knn.sigma", cfg.knn.sigma);

  cfg.loss_weights.semantic = kv.GetDouble("loss.beta1", cfg.loss_weights.semantic);
  cfg.loss_weights.embedding = kv.GetDouble("loss.beta2", cfg.loss_weights.embedding);
  cfg.loss_weights.instance_seg = kv.GetDouble("loss.beta3", cfg.loss_weights.instance_seg);

  cfg.data.scan = kv.GetString("data.scan", "");
  cfg.data.labels = kv.GetString("data.labels", "");
  cfg.data.semantics = kv.GetString("data.semantics", "");
  cfg.data.embeddings = kv.GetString("data.embeddings", "");
  cfg.data.output = kv.GetString("data.output", "");

  const long long min_points = kv.GetInt("eval.min_points", 0);
  if (min_points < 0) throw Error(ErrorCode::kConfigError, "eval.min_points must be >= 0");
  cfg.eval_min_points = static_cast<std::size_t>(min_points);
  cfg.stages.normals = kv.GetBool("stages.normals", cfg.stages.normals);
  cfg.stages.knn = kv.GetBool("stages.knn", cfg.stages.knn);

  cfg.registry.num_classes = static_cast<int>(kv.GetInt("classes.count", cfg.registry.num_classes));
  if (kv.Has("classes.things")) {
    cfg.registry.thing_classes.clear();
    std::stringstream ss(kv.GetString("classes.things", ""));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      long long c = 0;
      if (!ParseInt(Trim(tok), c)) {
        throw Error(ErrorCode::kConfigError, "classes.things: bad class id '" + tok + "'");
      }
      cfg.registry.thing_classes.push_back(static_cast<std::int32_t>(c));
    }
  }

  try {
    cfg.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return cfg;
}

synth::SceneSpec SceneSpecFrom(const KeyValueConfig& kv) {
  synth::SceneSpec spec;
  if (kv.Has("scene.random_instances")) {
    synth::RandomSceneOptions opts;
    opts.min_instances = opts.max_instances = static_cast<int>(kv.GetInt("scene.random_instances", 10));
    opts.embedding_sigma = kv.GetDouble("scene.sigma", 0.0);
    spec = synth::RandomSceneSpec(static_cast<std::uint64_t>(kv.GetInt("scene.seed", 0)), opts);
  }
  spec.seed = static_cast<std::uint64_t>(kv.GetInt("scene.seed", static_cast<long long>(spec.seed)));
  spec.embedding_sigma = kv.GetDouble("scene.sigma", spec.embedding_sigma);
  spec.sensor.max_range = kv.GetDouble("scene.max_range", spec.sensor.max_range);
  spec.ground_class = static_cast<std::int32_t>(kv.GetInt("scene.ground_class", spec.ground_class));
  if (kv.GetString("scene.ground_z", "") == "none") {
    spec.ground_z.reset();
  } else {
    spec.ground_z = kv.GetDouble("scene.ground_z", spec.ground_z.value_or(-1.73));
  }

  // scene.instance = <box|cylinder|patch> class=<id> x= y= z= sx= sy= sz= yaw=
  for (const auto& line : kv.GetAll("scene.instance")) {
    std::istringstream in(line);
    std::string shape;
    in >> shape;
    synth::Blueprint b;
    if (shape == "box") {
      b.shape = synth::Shape::kBox;
    } else if (shape == "cylinder") {
      b.shape = synth::Shape::kCylinder;
    } else if (shape == "patch") {
      b.shape = synth::Shape::kPlanePatch;
    } else {
      throw Error(ErrorCode::kConfigError, "scene.instance: unknown shape '" + shape + "'");
    }
    std::string field;
    while (in >> field) {
      const auto eq = field.find('=');
      double v = 0.0;
      if (eq == std::string::npos || !ParseDouble(field.substr(eq + 1), v)) {
        throw Error(ErrorCode::kConfigError, "scene.instance: bad field '" + field + "'");
      }
      const std::string name = field.substr(0, eq);
      if (name == "class") b.semantic = static_cast<std::int32_t>(v);
      else if (name == "x") b.center.x() = v;
      else if (name == "y") b.center.y() = v;
      else if (name == "z") b.center.z() = v;
      else if (name == "sx") b.extent.x() = v;
      else if (name == "sy") b.extent.y() = v;
      else if (name == "sz") b.extent.z() = v;
      else if (name == "yaw") b.yaw = v;
      else throw Error(ErrorCode::kConfigError, "scene.instance: unknown field '" + name + "'");
    }
    spec.instances.push_back(b);
  }
  try {
    spec.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  return spec;
}

}  // namespace rvpan
