/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Versioned binary checkpoint container. Byte layout is documented in
// CHECKPOINT.md:
//
//   magic "PLYGRAPH" | u32 version | u64 header length | JSON header |
//   f64 target mean | f64 target scale | tensor values | Adam m | Adam v |
//   u64 Adam step counts
//
// All integers and doubles little-endian.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "playgraph/model.hpp"
#include "playgraph/state_io.hpp"

namespace playgraph {

inline constexpr std::array<char, 8> kCheckpointMagic{'P', 'L', 'Y', 'G', 'R', 'A', 'P', 'H'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// ---------------------------------------------------------------------------
// JSON forms shared with the service and reports

inline Json to_json(const FeatureSchema& s) {
  Json arr = Json::array();
  for (const auto& f : s.specs())
    arr.push_back({{"name", f.name},
                   {"unit", f.unit},
                   {"normalized", f.normalized},
                   {"mean", f.mean},
                   {"std", f.stddev}});
  return arr;
}

inline FeatureSchema schema_from_json(const Json& j) {
  if (!j.is_array()) throw CheckpointError("feature schema must be an array");
  std::vector<FeatureSpec> specs;
  for (const auto& f : j)
    specs.push_back({f.at("name").get<std::string>(), f.at("unit").get<std::string>(),
                     f.at("normalized").get<bool>(), f.at("mean").get<double>(),
                     f.at("std").get<double>()});
  return FeatureSchema(std::move(specs));
}

/// Maps a header string onto one of `names`; anything else is corruption.
template <class E>
E header_enum(const Json& j, const char* key,
              std::initializer_list<std::pair<const char*, E>> names) {
  const Json& v = j.at(key);
  if (v.is_string())
    for (const auto& [name, e] : names)
      if (v == name) return e;
  throw CheckpointError(std::string("corrupt checkpoint header: unknown ") + key + " " + v.dump());
}

inline Json position_json(const Position& p) { return Json::array({p[0], p[1], p[2]}); }

inline Json to_json(const FeaturizerConfig& c) {
  Json j;
  j["inverse_distance"] = to_string(c.inverse_distance);
  j["literal_epsilon"] = c.literal_epsilon;
  j["bombsite_a"] = c.bombsite_a ? position_json(*c.bombsite_a) : Json(nullptr);
  j["bombsite_b"] = c.bombsite_b ? position_json(*c.bombsite_b) : Json(nullptr);
  j["zone_count"] = c.zone_count;
  j["node_filter"] = to_string(c.node_filter);
  return j;
}

inline FeaturizerConfig featurizer_from_json(const Json& j) {
  FeaturizerConfig c;
  c.inverse_distance = header_enum<InverseDistance>(
      j, "inverse_distance",
      {{"one_plus", InverseDistance::one_plus}, {"literal", InverseDistance::literal}});
  c.literal_epsilon = j.at("literal_epsilon").get<double>();
  auto pos = [](const Json& p) -> std::optional<Position> {
    if (p.is_null()) return std::nullopt;
    return Position{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
  };
  c.bombsite_a = pos(j.at("bombsite_a"));
  c.bombsite_b = pos(j.at("bombsite_b"));
  c.zone_count = j.at("zone_count").get<std::size_t>();
  c.node_filter = header_enum<NodeFilter>(
      j, "node_filter",
      {{"all", NodeFilter::all}, {"carrier_and_defense", NodeFilter::carrier_and_defense}});
  return c;
}

inline Json to_json(const ModelSpec& s) {
  Json j;
  j["variant"] = to_string(s.variant);
  j["task"] = to_string(s.task);
  j["hidden_state"] = s.hidden_state;
  j["hidden_graph"] = s.hidden_graph;
  j["heads"] = s.heads;
  j["graph_layers"] = s.graph_layers;
  j["edge_mode"] = to_string(s.edge_mode);
  j["normalize_edges"] = s.normalize_edges;
  j["activation_slope"] = s.activation_slope;
  j["attention_slope"] = s.attention_slope;
  j["seed"] = s.seed;
  j["featurizer"] = to_json(s.featurizer);
  return j;
}

inline ModelSpec spec_from_json(const Json& j) {
  ModelSpec s;
  auto v = parse_variant(j.at("variant").get<std::string>());
  if (!v) throw CheckpointError("unknown model variant " + j.at("variant").dump());
  s.variant = *v;
  s.task = header_enum<Task>(
      j, "task", {{"regression", Task::regression}, {"classification", Task::classification}});
  s.hidden_state = j.at("hidden_state").get<std::size_t>();
  s.hidden_graph = j.at("hidden_graph").get<std::size_t>();
  s.heads = j.at("heads").get<std::size_t>();
  s.graph_layers = j.at("graph_layers").get<std::size_t>();
  s.edge_mode = header_enum<EdgeMode>(
      j, "edge_mode",
      {{"constant", EdgeMode::constant}, {"inverse_distance", EdgeMode::inverse_distance}});
  s.normalize_edges = j.at("normalize_edges").get<bool>();
  s.activation_slope = j.at("activation_slope").get<double>();
  s.attention_slope = j.at("attention_slope").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.featurizer = featurizer_from_json(j.at("featurizer"));
  return s;
}

// ---------------------------------------------------------------------------
// Binary container

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size())
      throw CheckpointError(std::string("truncated checkpoint while reading ") + what);
  }
  std::uint64_t u(int width, const char* what) {
    need(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u(8, what)); }
  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const Model& m) {
  Json header;
  header["format"] = "playgraph-checkpoint";
  header["spec"] = to_json(m.spec);
  header["node_schema"] = to_json(m.node_schema);
  header["state_schema"] = to_json(m.state_schema);
  header["target_mean"] = m.target_mean;
  header["target_scale"] = m.target_scale;
  Json table = Json::array();
  const auto params = m.parameters();
  for (const ParamTensor* p : params)
    table.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  header["tensors"] = table;
  const bool with_optimizer = m.optimizer.size() == params.size();
  header["optimizer"] = with_optimizer;
  const std::string h = header.dump();

  std::string out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u64(out, h.size());
  out += h;
  // target affine stored bitwise as well; the JSON copy is informational
  detail::put_f64(out, m.target_mean);
  detail::put_f64(out, m.target_scale);
  for (const ParamTensor* p : params)
    for (double v : p->value.values()) detail::put_f64(out, v);
  if (with_optimizer) {
    for (const AdamState& a : m.optimizer)
      for (double v : a.m.values()) detail::put_f64(out, v);
    for (const AdamState& a : m.optimizer)
      for (double v : a.v.values()) detail::put_f64(out, v);
    for (const AdamState& a : m.optimizer) detail::put_u64(out, a.step_count);
  }
  return out;
}

inline Model deserialize_checkpoint(const std::string& bytes) {
  detail::Reader r(bytes);
  const std::string magic = r.take(kCheckpointMagic.size(), "magic");
  if (magic != std::string(kCheckpointMagic.begin(), kCheckpointMagic.end()))
    throw CheckpointError("not a playgraph checkpoint: expected header \"PLYGRAPH\"");
  const auto version = static_cast<std::uint32_t>(r.u(4, "version"));
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint format version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  const std::uint64_t hlen = r.u(8, "header length");
  if (hlen > r.remaining()) throw CheckpointError("truncated checkpoint while reading header");
  Json header;
  try {
    header = Json::parse(r.take(static_cast<std::size_t>(hlen), "header"));
  } catch (const Json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  Model m;
  try {
    const ModelSpec spec = spec_from_json(header.at("spec"));
    m = build_model(spec, schema_from_json(header.at("node_schema")),
                    schema_from_json(header.at("state_schema")));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }
  auto params = m.parameters();
  const Json table = header.contains("tensors") ? header["tensors"] : Json();
  if (!table.is_array() || table.size() != params.size())
    throw CheckpointError("shape table lists " + std::to_string(table.is_array() ? table.size() : 0) +
                          " tensors but the model spec implies " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Json& t = table[i];
    const bool agrees = t.is_object() && t.value("name", "") == params[i]->name &&
                        t.value("rows", Json()) == params[i]->value.rows() &&
                        t.value("cols", Json()) == params[i]->value.cols();
    if (!agrees)
      throw CheckpointError("shape table entry " + std::to_string(i) + " (" + t.dump() +
                            ") disagrees with the model spec, expected '" + params[i]->name + "' " +
                            params[i]->value.shape());
  }
  m.target_mean = r.f64("target mean");
  m.target_scale = r.f64("target scale");
  for (ParamTensor* p : params)
    for (double& v : p->value.values()) v = r.f64("tensor values");
  if (header.value("optimizer", false)) {
    for (AdamState& a : m.optimizer)
      for (double& v : a.m.values()) v = r.f64("optimizer state");
    for (AdamState& a : m.optimizer)
      for (double& v : a.v.values()) v = r.f64("optimizer state");
    for (AdamState& a : m.optimizer) a.step_count = r.u(8, "optimizer step counts");
  }
  if (r.remaining() != 0)
    throw CheckpointError(std::to_string(r.remaining()) + " unexpected trailing bytes");
  return m;
}

inline void save_checkpoint(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write '" + path + "'");
  const std::string bytes = serialize_checkpoint(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing '" + path + "'");
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace playgraph
