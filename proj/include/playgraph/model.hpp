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

// The five candidate predictors:
//
//   state       state vector -> dense -> dense -> output
//   gcn / gat   graph -> graph layer(s) -> global average pool -> output
//   *_state     both branches, concatenated [pool | state] -> output
//
// GCN layers consume inverse-distance edges row-normalised at forward time;
// GAT layers learn their coefficients over the constant-connectivity graph.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "playgraph/dense.hpp"
#include "playgraph/features.hpp"
#include "playgraph/graph_layers.hpp"
#include "playgraph/metrics.hpp"
#include "playgraph/optim.hpp"

namespace playgraph {

enum class Variant { state, gcn, gat, gcn_state, gat_state };
enum class Task { regression, classification };

inline constexpr Variant kAllVariants[] = {Variant::state, Variant::gcn, Variant::gat,
                                           Variant::gcn_state, Variant::gat_state};

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::state: return "state";
    case Variant::gcn: return "gcn";
    case Variant::gat: return "gat";
    case Variant::gcn_state: return "gcn_state";
    case Variant::gat_state: return "gat_state";
  }
  return "?";
}
inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : kAllVariants)
    if (to_string(v) == s) return v;
  return std::nullopt;
}
/// Label used in report tables ("GAT + State").
inline std::string display_name(Variant v) {
  switch (v) {
    case Variant::state: return "State";
    case Variant::gcn: return "GCN";
    case Variant::gat: return "GAT";
    case Variant::gcn_state: return "GCN + State";
    case Variant::gat_state: return "GAT + State";
  }
  return "?";
}
inline std::string to_string(Task t) {
  return t == Task::regression ? "regression" : "classification";
}

inline bool has_graph_branch(Variant v) { return v != Variant::state; }
inline bool has_state_branch(Variant v) {
  return v == Variant::state || v == Variant::gcn_state || v == Variant::gat_state;
}
inline bool uses_attention(Variant v) { return v == Variant::gat || v == Variant::gat_state; }
inline EdgeMode edge_mode_for(Variant v) {
  return uses_attention(v) ? EdgeMode::constant : EdgeMode::inverse_distance;
}

struct ModelSpec {
  Variant variant = Variant::gat_state;
  Task task = Task::regression;
  std::size_t hidden_state = 64;
  std::size_t hidden_graph = 32;
  std::size_t heads = 1;
  std::size_t graph_layers = 1;
  EdgeMode edge_mode = EdgeMode::constant;
  /// Row-normalise GCN edges (weighted average); false gives the raw weighted sum.
  bool normalize_edges = true;
  double activation_slope = kDefaultLeakySlope;
  double attention_slope = kDefaultLeakySlope;
  std::uint64_t seed = 0;
  FeaturizerConfig featurizer;

  /// Spec for `v` with the edge mode that variant requires.
  static ModelSpec for_variant(Variant v, Task task, std::uint64_t seed = 0) {
    ModelSpec s;
    s.variant = v;
    s.task = task;
    s.edge_mode = edge_mode_for(v);
    s.seed = seed;
    return s;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline void validate_spec(const ModelSpec& s) {
  auto fail = [](const std::string& m) { throw ContractError("ModelSpec: " + m); };
  if (s.heads == 0) fail("heads must be >= 1");
  if (has_state_branch(s.variant) && s.hidden_state == 0) fail("hidden_state must be >= 1");
  if (has_graph_branch(s.variant)) {
    if (s.hidden_graph == 0) fail("hidden_graph must be >= 1");
    if (s.graph_layers == 0) fail("graph_layers must be >= 1");
    if (s.edge_mode != edge_mode_for(s.variant))
      fail(to_string(s.variant) + " requires edge_mode " + to_string(edge_mode_for(s.variant)));
  }
  if (!(s.activation_slope > 0.0 && s.activation_slope < 1.0) ||
      !(s.attention_slope > 0.0 && s.attention_slope < 1.0))
    fail("LeakyReLU slopes must lie in (0,1)");
}

/// Normalised model input for one state.
struct ModelInput {
  Matrix nodes;  // [N x F], z-scored
  Matrix edges;  // [N x N], raw
  std::vector<double> state;
  std::vector<std::string> node_order;
  std::vector<Team> node_teams;
};

struct Prediction {
  double value = 0.0;
  /// Pre-output-activation scalar.
  double raw = 0.0;
  /// Per-head coefficients of the last GAT layer; empty for other variants.
  std::vector<Matrix> attention;
  std::vector<std::string> node_order;
  std::vector<Team> node_teams;
};

struct ForwardTape {
  std::vector<GcnTape> gcn;
  std::vector<GatTape> gat;
  Matrix gcn_edges;
  std::size_t n_nodes = 0;
  std::size_t pool_width = 0;
  DenseTape state1, state2, head;
};

class Model {
 public:
  ModelSpec spec;
  FeatureSchema node_schema;
  FeatureSchema state_schema;
  std::vector<GraphLayerParams> graph;
  ParamTensor state_w1, state_b1, state_w2, state_b2;
  ParamTensor head_w, head_b;
  /// Regression output is raw * target_scale + target_mean.
  double target_mean = 0.0;
  double target_scale = 1.0;
  std::vector<AdamState> optimizer;

  /// Trainable tensors in declared (checkpoint) order.
  std::vector<ParamTensor*> parameters() {
    std::vector<ParamTensor*> out;
    for (auto& layer : graph)
      for (ParamTensor* p : layer.parameters()) out.push_back(p);
    if (has_state_branch(spec.variant))
      for (ParamTensor* p : {&state_w1, &state_b1, &state_w2, &state_b2}) out.push_back(p);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
  }
  std::vector<const ParamTensor*> parameters() const {
    std::vector<const ParamTensor*> out;
    for (ParamTensor* p : const_cast<Model*>(this)->parameters()) out.push_back(p);
    return out;
  }

  std::size_t graph_width() const {
    return graph.empty() ? 0 : graph.back().out_features();
  }

  void zero_grad() {
    for (ParamTensor* p : parameters()) p->zero_grad();
  }

  void reset_optimizer(AdamConfig cfg = {}) {
    optimizer.clear();
    for (ParamTensor* p : parameters()) optimizer.emplace_back(*p, cfg);
  }
};

inline Model build_model(const ModelSpec& spec, const FeatureSchema& node_schema,
                         const FeatureSchema& state_schema) {
  validate_spec(spec);
  Model m;
  m.spec = spec;
  m.node_schema = node_schema;
  m.state_schema = state_schema;
  Rng rng(spec.seed);
  const Activation act = Activation::leaky(spec.activation_slope);

  std::size_t concat = 0;
  if (has_graph_branch(spec.variant)) {
    if (node_schema.size() == 0) throw ContractError("build_model: empty node schema");
    const GraphLayerKind kind =
        uses_attention(spec.variant) ? GraphLayerKind::gat : GraphLayerKind::gcn;
    // GCN layers share one fixed edge set, so extra heads only widen W
    const std::size_t heads = kind == GraphLayerKind::gat ? spec.heads : 1;
    std::size_t in = node_schema.size();
    for (std::size_t l = 0; l < spec.graph_layers; ++l) {
      m.graph.push_back(make_graph_layer(kind, in, spec.hidden_graph, heads, rng,
                                         "graph" + std::to_string(l), act,
                                         spec.attention_slope));
      in = m.graph.back().out_features();
    }
    concat += in;
  }
  if (has_state_branch(spec.variant)) {
    if (state_schema.size() == 0) throw ContractError("build_model: empty state schema");
    const std::size_t f = state_schema.size(), h = spec.hidden_state;
    m.state_w1 = ParamTensor("state.W1", xavier_uniform(f, h, rng));
    m.state_b1 = ParamTensor("state.b1", Matrix(1, h));
    m.state_w2 = ParamTensor("state.W2", xavier_uniform(h, h, rng));
    m.state_b2 = ParamTensor("state.b2", Matrix(1, h));
    concat += h;
  }
  m.head_w = ParamTensor("head.W", xavier_uniform(concat, 1, rng));
  m.head_b = ParamTensor("head.b", Matrix(1, 1));
  m.reset_optimizer();
  return m;
}

// ---------------------------------------------------------------------------
// Inputs

/// Featurizes and normalises `s` with the model's schemas. Refuses a state
/// whose features disagree with the schema names.
inline ModelInput prepare_input(const Model& m, const GameState& s) {
  ModelInput in;
  if (has_graph_branch(m.spec.variant)) {
    GameGraph g = build_graph(s, m.spec.edge_mode, m.spec.featurizer);
    const FeatureSchema expected = node_schema_for(sport_of(s), m.spec.featurizer);
    if (const std::string d = m.node_schema.diff(expected); !d.empty())
      throw SchemaMismatch("node features disagree with the model schema:\n" + d);
    in.nodes = m.node_schema.apply(g.node_features);
    in.edges = std::move(g.edge_weights);
    in.node_order = std::move(g.node_order);
    in.node_teams = std::move(g.node_teams);
  } else {
    for (const auto& p : s.players) {
      in.node_order.push_back(p.player_id);
      in.node_teams.push_back(p.team);
    }
  }
  if (has_state_branch(m.spec.variant)) {
    const FeatureSchema expected = state_schema_for(sport_of(s));
    if (const std::string d = m.state_schema.diff(expected); !d.empty())
      throw SchemaMismatch("state-vector features disagree with the model schema:\n" + d);
    in.state = m.state_schema.apply(featurize_state_vector(s));
  }
  return in;
}

// ---------------------------------------------------------------------------
// Forward / backward

inline Prediction forward(const Model& m, const ModelInput& in, ForwardTape* tape = nullptr) {
  const Activation act = Activation::leaky(m.spec.activation_slope);
  Prediction pred;
  pred.node_order = in.node_order;
  pred.node_teams = in.node_teams;
  Matrix concat(1, 0);

  if (has_graph_branch(m.spec.variant)) {
    if (in.nodes.cols() != m.node_schema.size())
      throw SchemaMismatch("forward: " + std::to_string(in.nodes.cols()) +
                           " node features for a schema of " +
                           std::to_string(m.node_schema.size()));
    Matrix h = in.nodes;
    const bool gat = uses_attention(m.spec.variant);
    Matrix edges;
    if (!gat) edges = m.spec.normalize_edges ? normalize_edges(in.edges) : in.edges;
    if (tape) {
      *tape = ForwardTape{};
      tape->n_nodes = h.rows();
      tape->gcn_edges = edges;
    }
    for (const GraphLayerParams& layer : m.graph) {
      if (gat) {
        GatTape* t = tape ? &tape->gat.emplace_back() : nullptr;
        GatOutput o = gat_forward(h, layer, t);
        h = std::move(o.nodes);
        pred.attention = std::move(o.attention);
      } else {
        GcnTape* t = tape ? &tape->gcn.emplace_back() : nullptr;
        h = gcn_forward(h, edges, layer, t);
      }
    }
    concat = global_average_pool(h);
    if (tape) tape->pool_width = concat.cols();
  } else if (tape) {
    *tape = ForwardTape{};
  }

  if (has_state_branch(m.spec.variant)) {
    if (in.state.size() != m.state_schema.size())
      throw SchemaMismatch("forward: " + std::to_string(in.state.size()) +
                           " state features for a schema of " +
                           std::to_string(m.state_schema.size()));
    const Matrix x = Matrix::row_vector(in.state);
    const Matrix s1 = dense_forward(x, m.state_w1, &m.state_b1, act, tape ? &tape->state1 : nullptr);
    const Matrix s2 = dense_forward(s1, m.state_w2, &m.state_b2, act, tape ? &tape->state2 : nullptr);
    concat = hconcat(concat, s2);
  }

  const Matrix out = dense_forward(concat, m.head_w, &m.head_b, Activation::identity(),
                                   tape ? &tape->head : nullptr);
  pred.raw = out(0, 0);
  pred.value = m.spec.task == Task::classification ? sigmoid(pred.raw)
                                                   : pred.raw * m.target_scale + m.target_mean;
  return pred;
}

/// Loss of one prediction: squared error (regression) or clamped BCE.
inline double example_loss(const Model& m, double value, double target) {
  if (m.spec.task == Task::regression) {
    const double d = value - target;
    return d * d;
  }
  const double p = clamp_probability(value);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

/// dLoss/dRaw for one example.
inline double loss_grad_raw(const Model& m, const Prediction& pred, double target) {
  if (m.spec.task == Task::regression)
    return 2.0 * (pred.value - target) * m.target_scale;
  if (pred.value < kProbabilityClamp || pred.value > 1.0 - kProbabilityClamp) return 0.0;
  return pred.value - target;
}

/// Accumulates d(scale * loss)/dparams for one example given its tape.
inline void backward(Model& m, const ForwardTape& tape, double grad_raw) {
  const Activation act = Activation::leaky(m.spec.activation_slope);
  Matrix g(1, 1, grad_raw);
  const Matrix dconcat = dense_backward(tape.head, g, m.head_w, &m.head_b, Activation::identity());

  std::size_t offset = 0;
  if (has_graph_branch(m.spec.variant)) {
    Matrix dh = global_average_pool_backward(column_slice(dconcat, 0, tape.pool_width), tape.n_nodes);
    const bool gat = uses_attention(m.spec.variant);
    for (std::size_t l = m.graph.size(); l-- > 0;) {
      dh = gat ? gat_backward(tape.gat[l], dh, m.graph[l]) : gcn_backward(tape.gcn[l], dh, m.graph[l]);
    }
    offset = tape.pool_width;
  }
  if (has_state_branch(m.spec.variant)) {
    const Matrix ds2 = column_slice(dconcat, offset, m.spec.hidden_state);
    const Matrix ds1 = dense_backward(tape.state2, ds2, m.state_w2, &m.state_b2, act);
    dense_backward(tape.state1, ds1, m.state_w1, &m.state_b1, act);
  }
}

struct Example {
  ModelInput input;
  double target = 0.0;
};

/// Mean loss over `batch` without touching gradients.
inline double batch_loss(const Model& m, std::span<const Example> batch) {
  if (batch.empty()) throw ContractError("batch_loss: empty batch");
  double total = 0.0;
  for (const Example& e : batch) total += example_loss(m, forward(m, e.input).value, e.target);
  return total / static_cast<double>(batch.size());
}

/// Adds the gradient of the mean batch loss to every grad buffer and returns
/// that loss.
inline double accumulate_gradients(Model& m, std::span<const Example> batch) {
  if (batch.empty()) throw ContractError("accumulate_gradients: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  ForwardTape tape;
  for (const Example& e : batch) {
    const Prediction p = forward(m, e.input, &tape);
    total += example_loss(m, p.value, e.target);
    backward(m, tape, inv * loss_grad_raw(m, p, e.target));
  }
  return total * inv;
}

/// One optimisation step on `batch`: zero grads, accumulate, Adam-update every
/// tensor, zero grads. Returns the pre-step mean loss.
inline double backward_step(Model& m, std::span<const Example> batch) {
  if (batch.empty()) throw ContractError("backward_step: empty batch");
  auto params = m.parameters();
  if (m.optimizer.size() != params.size()) m.reset_optimizer();
  m.zero_grad();
  const double loss = accumulate_gradients(m, batch);
  if (!std::isfinite(loss))
    throw DivergenceError("backward_step: non-finite loss " + std::to_string(loss) + " on a batch of " +
                          std::to_string(batch.size()));
  for (std::size_t i = 0; i < params.size(); ++i) adam_step(*params[i], m.optimizer[i]);
  m.zero_grad();
  return loss;
}

/// Refuses a model trained for another task.
inline void require_task(const Model& m, Task expected) {
  if (m.spec.task != expected)
    throw SchemaMismatch("model was trained for " + to_string(m.spec.task) + ", not " +
                         to_string(expected));
}

inline Prediction predict(const Model& m, const GameState& s) {
  return forward(m, prepare_input(m, s));
}

}  // namespace playgraph
