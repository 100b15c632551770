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

// Run configuration. Sources, lowest precedence first: built-in defaults, a
// TOML-style file, PLAYGRAPH_* environment variables, command-line flags.
//
//   seed = 7
//   task = "rush"
//
//   [model]
//   variant = "gat_state"
//   heads = 2
//
// Keys inside a section are addressed as "section.key". The environment
// variable for a key is PLAYGRAPH_ plus the key upper-cased with dots turned
// into underscores (PLAYGRAPH_MODEL_HEADS); PLAYGRAPH_LOG sets log.level.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "playgraph/error.hpp"
#include "playgraph/model.hpp"
#include "playgraph/state_io.hpp"
#include "playgraph/synthetic.hpp"
#include "playgraph/training.hpp"

namespace playgraph {

struct RunConfig {
  std::uint64_t seed = 0;
  SyntheticTask task = SyntheticTask::rush;

  std::size_t data_n = 1000;
  double data_noise_std = 1.0;
  double data_interaction_strength = 1.0;

  Variant model_variant = Variant::gat_state;
  /// Empty means the variant's default edge mode.
  std::optional<EdgeMode> model_edge_mode;
  std::size_t model_heads = 1;
  std::size_t model_hidden_state = 64;
  std::size_t model_hidden_graph = 32;
  std::size_t model_graph_layers = 1;

  std::size_t train_max_epochs = 60;
  std::size_t train_patience = 10;
  std::size_t train_batch_size = 0;
  double train_lr = 1e-3;

  /// Unset means 30 for rush and 1 for round, where the large test split
  /// already gives low variance.
  std::optional<std::size_t> trials_n_trials;

  std::string service_bind = "127.0.0.1";
  int service_port = 8080;

  std::string log_level = "info";

  /// Where each key's value came from: default, file, env or flag.
  std::map<std::string, std::string> sources;

  std::size_t n_trials() const {
    return trials_n_trials.value_or(task == SyntheticTask::rush ? 30 : 1);
  }

  Task model_task() const { return task == SyntheticTask::rush ? Task::regression : Task::classification; }

  ModelSpec model_spec() const {
    ModelSpec s;
    s.variant = model_variant;
    s.task = model_task();
    s.edge_mode = model_edge_mode.value_or(edge_mode_for(model_variant));
    s.heads = model_heads;
    s.hidden_state = model_hidden_state;
    s.hidden_graph = model_hidden_graph;
    s.graph_layers = model_graph_layers;
    s.seed = seed;
    if (task == SyntheticTask::round) s.featurizer = synthetic_round_featurizer();
    return s;
  }

  SyntheticConfig synthetic() const {
    SyntheticConfig c;
    c.seed = seed;
    c.n_states = data_n;
    c.noise_std = data_noise_std;
    c.task = task;
    c.interaction_strength = data_interaction_strength;
    return c;
  }

  TrainConfig train() const {
    TrainConfig t;
    t.max_epochs = train_max_epochs;
    t.patience = train_patience;
    t.batch_size = train_batch_size;
    t.adam.lr = train_lr;
    return t;
  }
};

namespace detail {

template <class T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw DataError("expected a non-negative integer, got '" + v + "'", DataError::npos, key);
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw DataError("expected a number, got '" + v + "'", DataError::npos, key);
  return d;
}

struct ConfigKey {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<Json(const RunConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
  using C = RunConfig;
  static const std::vector<ConfigKey> keys{
      {"seed", [](C& c, const std::string& v) { c.seed = parse_unsigned<std::uint64_t>("seed", v); },
       [](const C& c) { return Json(c.seed); }},
      {"task",
       [](C& c, const std::string& v) {
         if (v == "rush") c.task = SyntheticTask::rush;
         else if (v == "round") c.task = SyntheticTask::round;
         else throw DataError("expected rush or round, got '" + v + "'", DataError::npos, "task");
       },
       [](const C& c) { return Json(to_string(c.task)); }},
      {"data.n", [](C& c, const std::string& v) { c.data_n = parse_unsigned<std::size_t>("data.n", v); },
       [](const C& c) { return Json(c.data_n); }},
      {"data.noise_std",
       [](C& c, const std::string& v) { c.data_noise_std = parse_real("data.noise_std", v); },
       [](const C& c) { return Json(c.data_noise_std); }},
      {"data.interaction_strength",
       [](C& c, const std::string& v) {
         c.data_interaction_strength = parse_real("data.interaction_strength", v);
       },
       [](const C& c) { return Json(c.data_interaction_strength); }},
      {"model.variant",
       [](C& c, const std::string& v) {
         auto var = parse_variant(v);
         if (!var)
           throw DataError("expected state, gcn, gat, gcn_state or gat_state, got '" + v + "'",
                           DataError::npos, "model.variant");
         c.model_variant = *var;
       },
       [](const C& c) { return Json(to_string(c.model_variant)); }},
      {"model.edge_mode",
       [](C& c, const std::string& v) {
         if (v == "constant") c.model_edge_mode = EdgeMode::constant;
         else if (v == "inverse_distance") c.model_edge_mode = EdgeMode::inverse_distance;
         else if (v == "auto") c.model_edge_mode.reset();
         else
           throw DataError("expected constant, inverse_distance or auto, got '" + v + "'",
                           DataError::npos, "model.edge_mode");
       },
       [](const C& c) {
         return c.model_edge_mode ? Json(to_string(*c.model_edge_mode)) : Json("auto");
       }},
      {"model.heads",
       [](C& c, const std::string& v) { c.model_heads = parse_unsigned<std::size_t>("model.heads", v); },
       [](const C& c) { return Json(c.model_heads); }},
      {"model.hidden_state",
       [](C& c, const std::string& v) {
         c.model_hidden_state = parse_unsigned<std::size_t>("model.hidden_state", v);
       },
       [](const C& c) { return Json(c.model_hidden_state); }},
      {"model.hidden_graph",
       [](C& c, const std::string& v) {
         c.model_hidden_graph = parse_unsigned<std::size_t>("model.hidden_graph", v);
       },
       [](const C& c) { return Json(c.model_hidden_graph); }},
      {"model.graph_layers",
       [](C& c, const std::string& v) {
         c.model_graph_layers = parse_unsigned<std::size_t>("model.graph_layers", v);
       },
       [](const C& c) { return Json(c.model_graph_layers); }},
      {"train.max_epochs",
       [](C& c, const std::string& v) {
         c.train_max_epochs = parse_unsigned<std::size_t>("train.max_epochs", v);
       },
       [](const C& c) { return Json(c.train_max_epochs); }},
      {"train.patience",
       [](C& c, const std::string& v) {
         c.train_patience = parse_unsigned<std::size_t>("train.patience", v);
       },
       [](const C& c) { return Json(c.train_patience); }},
      {"train.batch_size",
       [](C& c, const std::string& v) {
         c.train_batch_size = parse_unsigned<std::size_t>("train.batch_size", v);
       },
       [](const C& c) { return Json(c.train_batch_size); }},
      {"train.lr", [](C& c, const std::string& v) { c.train_lr = parse_real("train.lr", v); },
       [](const C& c) { return Json(c.train_lr); }},
      {"trials.n_trials",
       [](C& c, const std::string& v) {
         c.trials_n_trials = parse_unsigned<std::size_t>("trials.n_trials", v);
       },
       [](const C& c) { return Json(c.n_trials()); }},
      {"service.bind", [](C& c, const std::string& v) { c.service_bind = v; },
       [](const C& c) { return Json(c.service_bind); }},
      {"service.port",
       [](C& c, const std::string& v) {
         const auto p = parse_unsigned<unsigned>("service.port", v);
         if (p > 65535) throw DataError("port must be <= 65535", DataError::npos, "service.port");
         c.service_port = static_cast<int>(p);
       },
       [](const C& c) { return Json(c.service_port); }},
      {"log.level",
       [](C& c, const std::string& v) {
         if (v != "quiet" && v != "info" && v != "debug")
           throw DataError("expected quiet, info or debug, got '" + v + "'", DataError::npos,
                           "log.level");
         c.log_level = v;
       },
       [](const C& c) { return Json(c.log_level); }},
  };
  return keys;
}

inline std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

}  // namespace detail

/// Sets one key from its textual value and records the source.
inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value,
                             const std::string& source) {
  for (const auto& k : detail::config_keys()) {
    if (key == k.name) {
      k.set(c, value);
      c.sources[key] = source;
      return;
    }
  }
  throw DataError("unknown configuration key", DataError::npos, key);
}

/// Parses the TOML-style subset: [section] headers, key = value lines,
/// quoted or bare values, # comments.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    // strip comments outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError(where + "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(where + "expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw DataError(where + "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    out.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

inline void apply_config_text(RunConfig& c, const std::string& text, const std::string& source) {
  for (const auto& [k, v] : parse_config_text(text)) set_config_value(c, k, v, source);
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    apply_config_text(c, ss.str(), "file");
  } catch (const DataError& e) {
    throw e.with_prefix(path + ": ");
  }
}

inline std::string env_name_for(const std::string& key) {
  std::string out = "PLAYGRAPH_";
  for (char ch : key) out.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  return out;
}

/// Environment lookup, injectable for tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

inline void apply_environment(RunConfig& c, const EnvLookup& env) {
  for (const auto& k : detail::config_keys())
    if (auto v = env(env_name_for(k.name))) set_config_value(c, k.name, *v, "env");
  if (auto v = env("PLAYGRAPH_LOG")) set_config_value(c, "log.level", *v, "env");
}

/// Full precedence chain. `flags` are key/value pairs already mapped to
/// config keys; `config_flag` is the --config path if one was given.
inline RunConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& flags,
                                const std::optional<std::string>& config_flag,
                                const EnvLookup& env = process_env) {
  RunConfig c;
  for (const auto& k : detail::config_keys()) c.sources[k.name] = "default";
  std::optional<std::string> path = config_flag;
  if (!path) path = env("PLAYGRAPH_CONFIG");
  if (path) apply_config_file(c, *path);
  apply_environment(c, env);
  for (const auto& [k, v] : flags) set_config_value(c, k, v, "flag");
  return c;
}

inline Json to_json(const RunConfig& c) {
  Json j;
  for (const auto& k : detail::config_keys()) j[k.name] = k.get(c);
  return j;
}

}  // namespace playgraph
