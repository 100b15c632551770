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

// HTTP inference service. Routing and error mapping live in handle_request,
// a pure function of (model, method, path, body), so the endpoints are
// testable without sockets and the CLI shares the same payload builders.

#pragma once

#include <atomic>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <string>

#include "httplib.h"
#include "playgraph/checkpoint.hpp"
#include "playgraph/whatif.hpp"

namespace playgraph {

inline constexpr int kApiSchemaVersion = 1;
/// Largest grid /sweep accepts.
inline constexpr std::size_t kMaxSweepCells = 10000;

// ---------------------------------------------------------------------------
// Payloads shared by the CLI and the service

inline Json model_info_json(const Model& m) {
  Json j;
  j["schema_version"] = kApiSchemaVersion;
  j["task"] = to_string(m.spec.task);
  j["sport"] = m.spec.task == Task::regression ? "nfl" : "csgo";
  j["spec"] = to_json(m.spec);
  j["node_schema"] = to_json(m.node_schema);
  j["state_schema"] = to_json(m.state_schema);
  std::size_t n = 0;
  for (const ParamTensor* p : m.parameters()) n += p->value.size();
  j["parameter_count"] = n;
  j["attributes"] = editable_attributes();
  return j;
}

inline Json predict_json(const Model& m, const GameState& s) {
  require_compatible(m, s);
  const Prediction p = predict(m, s);
  Json j;
  j["schema_version"] = kApiSchemaVersion;
  j["prediction"] = to_json(p);
  j["attention_summary"] = p.attention.empty() ? Json(nullptr) : to_json(attention_summary(p));
  j["expected_end_line"] =
      sport_of(s) == Sport::nfl ? Json(ball_carrier(s).position[0] + p.value) : Json(nullptr);
  return j;
}

inline Json whatif_json(const Model& m, const GameState& s, const Perturbation& p,
                        bool check_bounds,
                        AttentionReduction reduction = AttentionReduction::column_mean) {
  PerturbOptions opt;
  if (check_bounds) opt.bounds = default_bounds(sport_of(s));
  const WhatIfResult w = what_if(m, s, p, opt);
  Json j;
  j["schema_version"] = kApiSchemaVersion;
  const Json r = to_json(w);
  for (auto it = r.begin(); it != r.end(); ++it) j[it.key()] = it.value();
  j["attention_summary"] =
      w.perturbed.attention.empty() ? Json(nullptr) : to_json(attention_summary(w.perturbed, reduction));
  return j;
}

inline Json sweep_json(const Model& m, const GameState& s, const std::string& player_id,
                       std::span<const Position> grid) {
  const auto cells = position_sweep(m, s, player_id, grid, default_bounds(sport_of(s)));
  Json j;
  j["schema_version"] = kApiSchemaVersion;
  j["player_id"] = player_id;
  Json arr = Json::array();
  for (const auto& c : cells) arr.push_back(to_json(c));
  j["cells"] = arr;
  return j;
}

// ---------------------------------------------------------------------------
// Request handling

struct HttpReply {
  int status = 200;
  Json body;
};

namespace detail {

inline Json error_body(const std::string& code, const std::string& message,
                       const std::string& field = {}) {
  Json e;
  e["code"] = code;
  e["message"] = message;
  if (!field.empty()) e["field"] = field;
  return {{"schema_version", kApiSchemaVersion}, {"error", e}};
}

inline std::string opaque_error_id() {
  static std::atomic<std::uint64_t> counter{0};
  static const std::uint64_t salt = std::random_device{}();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(derive_seed(salt, counter.fetch_add(1))));
  return buf;
}

inline const Json& require_member(const Json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end()) throw DataError("required field is missing", DataError::npos, key);
  return *it;
}

inline GameState state_member(const Json& body) {
  return state_from_json(require_member(body, "state"), DataError::npos, ParseOptions{true, {}, {}});
}

inline std::vector<Position> grid_from_json(const Json& body) {
  if (auto pts = body.find("points"); pts != body.end()) {
    if (!pts->is_array()) throw DataError("expected an array", DataError::npos, "points");
    std::vector<Position> out;
    for (const auto& p : *pts) {
      if (!p.is_array() || p.size() < 2 || p.size() > 3)
        throw DataError("expected [x, y] or [x, y, z]", DataError::npos, "points");
      Position q{0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!p[i].is_number()) throw DataError("expected a number", DataError::npos, "points");
        q[i] = p[i].get<double>();
      }
      out.push_back(q);
    }
    return out;
  }
  const Json& g = require_member(body, "grid");
  if (!g.is_object()) throw DataError("expected an object", DataError::npos, "grid");
  GridSpec spec;
  auto num = [&](const char* k) {
    auto it = g.find(k);
    if (it == g.end() || !it->is_number())
      throw DataError("expected a number", DataError::npos, std::string("grid.") + k);
    return it->get<double>();
  };
  auto count = [&](const char* k) {
    auto it = g.find(k);
    if (it == g.end() || !it->is_number_unsigned() || it->get<std::size_t>() == 0)
      throw DataError("expected a positive integer", DataError::npos, std::string("grid.") + k);
    return it->get<std::size_t>();
  };
  spec.x0 = num("x0");
  spec.x1 = num("x1");
  spec.y0 = num("y0");
  spec.y1 = num("y1");
  spec.nx = count("nx");
  spec.ny = count("ny");
  if (g.contains("z")) spec.z = num("z");
  if (spec.nx > kMaxSweepCells || spec.ny > kMaxSweepCells || spec.nx * spec.ny > kMaxSweepCells)
    throw DataError("grid has more than " + std::to_string(kMaxSweepCells) + " cells",
                    DataError::npos, "grid");
  return grid_points(spec);
}

}  // namespace detail

/// Routes one request. Never throws; failures become 4xx/5xx bodies and the
/// details of unexpected ones go to `log`.
inline HttpReply handle_request(const Model& m, const std::string& method, const std::string& path,
                                const std::string& body,
                                const std::function<void(const std::string&)>& log = {}) {
  try {
    if (path == "/health") {
      if (method != "GET") return {405, detail::error_body("method_not_allowed", "use GET")};
      return {200, {{"schema_version", kApiSchemaVersion}, {"status", "ok"}}};
    }
    if (path == "/model/info") {
      if (method != "GET") return {405, detail::error_body("method_not_allowed", "use GET")};
      return {200, model_info_json(m)};
    }
    if (path != "/predict" && path != "/whatif" && path != "/sweep")
      return {404, detail::error_body("not_found", "no route " + path)};
    if (method != "POST") return {405, detail::error_body("method_not_allowed", "use POST")};

    Json j;
    try {
      j = Json::parse(body);
    } catch (const Json::parse_error& e) {
      return {400, detail::error_body("malformed_json", e.what())};
    }
    if (!j.is_object()) return {400, detail::error_body("malformed_json", "body must be an object")};

    if (path == "/predict") {
      // the state itself, or {"state": ...}
      GameState s = j.contains("players") ? detail::state_member(Json{{"state", j}})
                                          : detail::state_member(j);
      return {200, predict_json(m, s)};
    }
    if (path == "/whatif") {
      const GameState s = detail::state_member(j);
      const Perturbation p = perturbation_from_json(detail::require_member(j, "perturbation"));
      bool check = false;
      if (auto it = j.find("check_bounds"); it != j.end()) {
        if (!it->is_boolean()) throw DataError("expected true or false", DataError::npos, "check_bounds");
        check = it->get<bool>();
      }
      return {200, whatif_json(m, s, p, check)};
    }
    const GameState s = detail::state_member(j);
    const Json& pid = detail::require_member(j, "player_id");
    if (!pid.is_string()) throw DataError("expected a string", DataError::npos, "player_id");
    const auto grid = detail::grid_from_json(j);
    return {200, sweep_json(m, s, pid.get<std::string>(), grid)};
  } catch (const ValidationError& e) {
    return {422, detail::error_body("validation_failed", e.what(), e.field())};
  } catch (const DataError& e) {
    return {400, detail::error_body("bad_request", e.what(), e.field())};
  } catch (const SchemaMismatch& e) {
    return {409, detail::error_body("schema_mismatch", e.what())};
  } catch (const ContractError& e) {
    return {400, detail::error_body("bad_request", e.what())};
  } catch (const std::exception& e) {
    const std::string id = detail::opaque_error_id();
    if (log) log("error " + id + ": " + e.what());
    return {500, detail::error_body("internal", "internal error " + id)};
  }
}

// ---------------------------------------------------------------------------
// Server

/// Binds the handlers to an httplib server. The model is shared read-only
/// across worker threads.
inline void install_routes(httplib::Server& server, std::shared_ptr<const Model> model,
                           std::function<void(const std::string&)> log = {}) {
  auto handler = [model, log](const httplib::Request& req, httplib::Response& res) {
    const HttpReply r = handle_request(*model, req.method, req.path, req.body, log);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
    if (log) log(req.method + " " + req.path + " " + std::to_string(r.status));
  };
  // every path and method goes through handle_request so 404 and 405 carry
  // the same JSON error body as other failures
  server.Get(R"(.*)", handler);
  server.Post(R"(.*)", handler);
  server.Put(R"(.*)", handler);
  server.Patch(R"(.*)", handler);
  server.Delete(R"(.*)", handler);
  // cross-origin access for a browser client served elsewhere
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

}  // namespace playgraph
