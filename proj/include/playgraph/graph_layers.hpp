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

// Graph operators over fully-connected player graphs.
//
// Both layer kinds compute, per head k,
//
//   h'_i = act( sum_j e^k_ij * (h_j W_k) )
//
// and concatenate the K head outputs along the feature axis. A GCN layer takes
// e_ij from a fixed (row-normalised) edge matrix; a GAT layer learns them as a
// row softmax over LeakyReLU(a_k^T [h_i W_k || h_j W_k]).
//
// Backward passes accumulate into the ParamTensor grad buffers and return the
// gradient with respect to the node matrix.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "playgraph/optim.hpp"
#include "playgraph/tensor.hpp"

namespace playgraph {

enum class GraphLayerKind { gcn, gat };

struct GraphLayerParams {
  GraphLayerKind kind = GraphLayerKind::gcn;
  std::size_t heads = 1;
  std::size_t in_features = 0;
  std::size_t out_per_head = 0;
  Activation activation = Activation::leaky();
  /// Negative slope of the LeakyReLU inside the attention logits.
  double attention_slope = kDefaultLeakySlope;
  std::vector<ParamTensor> weights;    // one [F x K'] per head
  std::vector<ParamTensor> attention;  // one [2K' x 1] per head, GAT only

  std::size_t out_features() const { return heads * out_per_head; }

  std::vector<ParamTensor*> parameters() {
    std::vector<ParamTensor*> out;
    for (auto& w : weights) out.push_back(&w);
    for (auto& a : attention) out.push_back(&a);
    return out;
  }
};

/// Xavier-initialised layer. `prefix` names the tensors ("<prefix>.W0", ...).
inline GraphLayerParams make_graph_layer(GraphLayerKind kind, std::size_t in_features,
                                         std::size_t out_per_head, std::size_t heads,
                                         Rng& rng, const std::string& prefix,
                                         Activation act = Activation::leaky(),
                                         double attention_slope = kDefaultLeakySlope) {
  if (heads == 0) throw ContractError("make_graph_layer: heads must be >= 1");
  GraphLayerParams p;
  p.kind = kind;
  p.heads = heads;
  p.in_features = in_features;
  p.out_per_head = out_per_head;
  p.activation = act;
  p.attention_slope = attention_slope;
  for (std::size_t k = 0; k < heads; ++k) {
    p.weights.emplace_back(prefix + ".W" + std::to_string(k),
                           xavier_uniform(in_features, out_per_head, rng));
    if (kind == GraphLayerKind::gat)
      p.attention.emplace_back(prefix + ".a" + std::to_string(k),
                               xavier_uniform(2 * out_per_head, 1, rng));
  }
  return p;
}

/// Divides each row by its sum.
inline Matrix normalize_edges(const Matrix& raw) {
  if (raw.rows() != raw.cols())
    throw ShapeError("normalize_edges: edge matrix must be square, got " + raw.shape());
  Matrix out = raw;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    double s = 0.0;
    for (double v : raw.row(i)) {
      if (v < 0.0) throw ContractError("normalize_edges: negative edge weight");
      s += v;
    }
    if (!(s > 0.0))
      throw ContractError("normalize_edges: row " + std::to_string(i) + " has zero sum");
    for (double& v : out.row(i)) v /= s;
  }
  return out;
}

namespace detail {

inline void check_layer_input(const Matrix& nodes, const GraphLayerParams& p,
                              const char* what) {
  if (nodes.rows() == 0) throw ShapeError(std::string(what) + ": empty graph");
  if (nodes.cols() != p.in_features)
    throw ShapeError(std::string(what) + ": node features " + nodes.shape() +
                     " but layer expects " + std::to_string(p.in_features) + " columns");
  if (p.weights.size() != p.heads)
    throw ContractError(std::string(what) + ": layer has " +
                        std::to_string(p.weights.size()) + " weight tensors for " +
                        std::to_string(p.heads) + " heads");
}

inline void write_head(Matrix& out, const Matrix& head, std::size_t k) {
  const std::size_t w = head.cols();
  for (std::size_t i = 0; i < head.rows(); ++i)
    for (std::size_t j = 0; j < w; ++j) out(i, k * w + j) = head(i, j);
}

/// s_i = a1 . z_i and t_j = a2 . z_j with a = [a1; a2].
inline void attention_scores(const Matrix& z, const Matrix& a, std::vector<double>& s,
                             std::vector<double>& t) {
  const std::size_t n = z.rows();
  const std::size_t w = z.cols();
  if (a.rows() != 2 * w || a.cols() != 1)
    throw ShapeError("gat: attention vector " + a.shape() + " but expected " +
                     Matrix::shape_string(2 * w, 1));
  s.assign(n, 0.0);
  t.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < w; ++c) {
      s[i] += a(c, 0) * z(i, c);
      t[i] += a(w + c, 0) * z(i, c);
    }
  }
}

/// Row softmax of LeakyReLU(s_i + t_j). `logit_pre` receives s_i + t_j.
inline Matrix attention_from_scores(const std::vector<double>& s,
                                    const std::vector<double>& t, double slope,
                                    Matrix* logit_pre = nullptr) {
  const std::size_t n = s.size();
  Matrix alpha(n, n);
  if (logit_pre) *logit_pre = Matrix(n, n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double pre = s[i] + t[j];
      if (logit_pre) (*logit_pre)(i, j) = pre;
      row[j] = leaky_relu(pre, slope);
    }
    const auto p = softmax(row);
    std::copy(p.begin(), p.end(), alpha.row(i).begin());
  }
  return alpha;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GCN

struct GcnTape {
  Matrix nodes;
  Matrix edges;
  std::vector<Matrix> transformed;  // H W_k
  std::vector<Matrix> aggregated;   // E H W_k (pre-activation)
};

/// act(E H W_k) for every head, concatenated. `edges` is used as given; apply
/// normalize_edges first for the weighted-average form.
inline Matrix gcn_forward(const Matrix& nodes, const Matrix& edges,
                          const GraphLayerParams& p, GcnTape* tape = nullptr) {
  detail::check_layer_input(nodes, p, "gcn_forward");
  if (edges.rows() != nodes.rows() || edges.cols() != nodes.rows())
    throw ShapeError("gcn_forward: edges " + edges.shape() + " for " +
                     std::to_string(nodes.rows()) + " nodes");
  Matrix out(nodes.rows(), p.out_features());
  if (tape) {
    tape->nodes = nodes;
    tape->edges = edges;
    tape->transformed.clear();
    tape->aggregated.clear();
  }
  for (std::size_t k = 0; k < p.heads; ++k) {
    Matrix z = matmul(nodes, p.weights[k].value);
    Matrix m = matmul(edges, z);
    detail::write_head(out, p.activation.apply(m), k);
    if (tape) {
      tape->transformed.push_back(std::move(z));
      tape->aggregated.push_back(std::move(m));
    }
  }
  return out;
}

inline Matrix gcn_backward(const GcnTape& tape, const Matrix& grad_out,
                           GraphLayerParams& p) {
  const std::size_t n = tape.nodes.rows();
  if (grad_out.rows() != n || grad_out.cols() != p.out_features())
    throw ShapeError("gcn_backward: gradient " + grad_out.shape());
  Matrix grad_nodes(n, p.in_features);
  for (std::size_t k = 0; k < p.heads; ++k) {
    const Matrix dm = p.activation.backward(
        tape.aggregated[k], column_slice(grad_out, k * p.out_per_head, p.out_per_head));
    const Matrix dz = matmul_tn(tape.edges, dm);
    p.weights[k].grad += matmul_tn(tape.nodes, dz);
    grad_nodes += matmul_nt(dz, p.weights[k].value);
  }
  return grad_nodes;
}

// ---------------------------------------------------------------------------
// GAT

/// Attention coefficients of one head: row i is the softmax over j of
/// LeakyReLU(a^T [h_i W || h_j W]), the weight of node j's features toward node i.
inline Matrix gat_attention(const Matrix& nodes, const GraphLayerParams& p,
                            std::size_t head) {
  detail::check_layer_input(nodes, p, "gat_attention");
  if (p.kind != GraphLayerKind::gat || head >= p.attention.size())
    throw ContractError("gat_attention: layer has no attention vector for head " +
                        std::to_string(head));
  const Matrix z = matmul(nodes, p.weights[head].value);
  std::vector<double> s, t;
  detail::attention_scores(z, p.attention[head].value, s, t);
  return detail::attention_from_scores(s, t, p.attention_slope);
}

struct GatTape {
  Matrix nodes;
  std::vector<Matrix> transformed;  // Z_k = H W_k
  std::vector<Matrix> logit_pre;    // s_i + t_j
  std::vector<Matrix> alpha;        // attention coefficients
  std::vector<Matrix> aggregated;   // alpha Z_k (pre-activation)
};

struct GatOutput {
  Matrix nodes;                    // [N x K*K']
  std::vector<Matrix> attention;   // one [N x N] per head
};

inline GatOutput gat_forward(const Matrix& nodes, const GraphLayerParams& p,
                             GatTape* tape = nullptr) {
  detail::check_layer_input(nodes, p, "gat_forward");
  if (p.kind != GraphLayerKind::gat || p.attention.size() != p.heads)
    throw ContractError("gat_forward: layer needs one attention vector per head");
  GatOutput out{Matrix(nodes.rows(), p.out_features()), {}};
  if (tape) {
    *tape = GatTape{};
    tape->nodes = nodes;
  }
  for (std::size_t k = 0; k < p.heads; ++k) {
    Matrix z = matmul(nodes, p.weights[k].value);
    std::vector<double> s, t;
    detail::attention_scores(z, p.attention[k].value, s, t);
    Matrix pre;
    Matrix alpha = detail::attention_from_scores(s, t, p.attention_slope, &pre);
    Matrix m = matmul(alpha, z);
    detail::write_head(out.nodes, p.activation.apply(m), k);
    out.attention.push_back(alpha);
    if (tape) {
      tape->transformed.push_back(std::move(z));
      tape->logit_pre.push_back(std::move(pre));
      tape->alpha.push_back(std::move(alpha));
      tape->aggregated.push_back(std::move(m));
    }
  }
  return out;
}

/// Propagates through both the aggregation and the attention coefficients.
inline Matrix gat_backward(const GatTape& tape, const Matrix& grad_out,
                           GraphLayerParams& p) {
  const std::size_t n = tape.nodes.rows();
  const std::size_t w = p.out_per_head;
  if (grad_out.rows() != n || grad_out.cols() != p.out_features())
    throw ShapeError("gat_backward: gradient " + grad_out.shape());
  Matrix grad_nodes(n, p.in_features);
  for (std::size_t k = 0; k < p.heads; ++k) {
    const Matrix& z = tape.transformed[k];
    const Matrix& alpha = tape.alpha[k];
    const Matrix& a = p.attention[k].value;
    const Matrix dm =
        p.activation.backward(tape.aggregated[k], column_slice(grad_out, k * w, w));

    // M = alpha Z
    Matrix dz = matmul_tn(alpha, dm);
    const Matrix dalpha = matmul_nt(dm, z);

    // row softmax, then LeakyReLU on s_i + t_j
    std::vector<double> ds(n, 0.0), dt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += alpha(i, j) * dalpha(i, j);
      for (std::size_t j = 0; j < n; ++j) {
        const double du = alpha(i, j) * (dalpha(i, j) - dot);
        const double dpre = du * leaky_relu_grad(tape.logit_pre[k](i, j), p.attention_slope);
        ds[i] += dpre;
        dt[j] += dpre;
      }
    }
    Matrix& da = p.attention[k].grad;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < w; ++c) {
        da(c, 0) += ds[i] * z(i, c);
        da(w + c, 0) += dt[i] * z(i, c);
        dz(i, c) += ds[i] * a(c, 0) + dt[i] * a(w + c, 0);
      }
    }
    p.weights[k].grad += matmul_tn(tape.nodes, dz);
    grad_nodes += matmul_nt(dz, p.weights[k].value);
  }
  return grad_nodes;
}

// ---------------------------------------------------------------------------
// Pooling

/// Column-wise mean over nodes, as a [1 x K] row.
inline Matrix global_average_pool(const Matrix& nodes) {
  if (nodes.rows() == 0) throw ShapeError("global_average_pool: empty graph");
  Matrix out(1, nodes.cols());
  for (std::size_t i = 0; i < nodes.rows(); ++i)
    for (std::size_t j = 0; j < nodes.cols(); ++j) out(0, j) += nodes(i, j);
  out *= 1.0 / static_cast<double>(nodes.rows());
  return out;
}

inline Matrix global_average_pool_backward(const Matrix& grad_pooled, std::size_t n_nodes) {
  Matrix out(n_nodes, grad_pooled.cols());
  const double inv = 1.0 / static_cast<double>(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (std::size_t j = 0; j < grad_pooled.cols(); ++j) out(i, j) = grad_pooled(0, j) * inv;
  return out;
}

}  // namespace playgraph
