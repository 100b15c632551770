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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"

namespace playgraph {
namespace {

using testing::attention_oracle;
using testing::gcn_oracle;
using testing::LayerCheck;
using testing::random_matrix;
using testing::row_stochastic;

GraphLayerParams layer(GraphLayerKind kind, std::size_t in, std::size_t out, std::size_t heads,
                       std::uint64_t seed, Activation act = Activation::leaky()) {
  Rng rng(seed);
  return make_graph_layer(kind, in, out, heads, rng, "g", act);
}

void expect_near(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_TRUE(a.same_shape(b)) << a.shape() << " vs " << b.shape();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], tol) << "entry " << i;
}

TEST(NormalizeEdges, Examples) {
  EXPECT_EQ(normalize_edges(Matrix::identity(4)), Matrix::identity(4));
  const Matrix u = normalize_edges(Matrix(5, 5, 1.0));
  for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 0.2);
  EXPECT_EQ(normalize_edges(Matrix{{1.0, 3.0}, {2.0, 2.0}}), (Matrix{{0.25, 0.75}, {0.5, 0.5}}));
}

TEST(NormalizeEdges, RowsSumToOne) {
  Rng rng(1);
  const Matrix e = row_stochastic(9, rng);
  for (std::size_t i = 0; i < 9; ++i) {
    double s = 0.0;
    for (double v : e.row(i)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(NormalizeEdges, ZeroRowIsAContractViolation) {
  EXPECT_THROW(normalize_edges(Matrix{{0.0, 0.0}, {1.0, 1.0}}), ContractError);
  EXPECT_THROW(normalize_edges(Matrix{{-1.0, 2.0}, {1.0, 1.0}}), ContractError);
}

TEST(Gcn, SingleNodeIdentityIsPassThrough) {
  auto p = layer(GraphLayerKind::gcn, 3, 3, 1, 0, Activation::identity());
  p.weights[0].value = Matrix::identity(3);
  const Matrix h{{1.5, -2.0, 0.25}};
  EXPECT_EQ(gcn_forward(h, Matrix(1, 1, 1.0), p), h);
}

TEST(Gcn, TwoNodesAverage) {
  auto p = layer(GraphLayerKind::gcn, 2, 2, 1, 0, Activation::identity());
  p.weights[0].value = Matrix::identity(2);
  const Matrix out = gcn_forward(Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix(2, 2, 0.5), p);
  EXPECT_EQ(out, (Matrix{{0.5, 0.5}, {0.5, 0.5}}));
}

TEST(Gcn, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto p = layer(GraphLayerKind::gcn, 4, 3, 1, seed);
    const Matrix h = random_matrix(5, 4, rng), e = row_stochastic(5, rng);
    expect_near(gcn_forward(h, e, p), gcn_oracle(h, e, p.weights[0].value, 0.2), 1e-12);
  }
}

TEST(GcnGat, RejectShapeMismatch) {
  const auto p = layer(GraphLayerKind::gcn, 4, 3, 1, 0);
  EXPECT_THROW(gcn_forward(Matrix(5, 3), Matrix(5, 5), p), ShapeError);
  EXPECT_THROW(gcn_forward(Matrix(5, 4), Matrix(4, 4), p), ShapeError);
  const auto g = layer(GraphLayerKind::gat, 4, 3, 1, 0);
  EXPECT_THROW(gat_forward(Matrix(2, 5), g), ShapeError);
  EXPECT_THROW(gat_forward(Matrix(0, 4), g), ShapeError);
}

TEST(GatAttention, SingleNodeIsOne) {
  const auto p = layer(GraphLayerKind::gat, 4, 3, 1, 2);
  Rng rng(3);
  EXPECT_EQ(gat_attention(random_matrix(1, 4, rng), p, 0), Matrix(1, 1, 1.0));
}

TEST(GatAttention, IdenticalNodesAreUniform) {
  const auto p = layer(GraphLayerKind::gat, 4, 3, 1, 4);
  Rng rng(5);
  const Matrix one = random_matrix(1, 4, rng);
  Matrix h(6, 4);
  for (std::size_t i = 0; i < 6; ++i) std::copy(one.row(0).begin(), one.row(0).end(), h.row(i).begin());
  const Matrix a = gat_attention(h, p, 0);
  for (double v : a.values()) EXPECT_NEAR(v, 1.0 / 6.0, 1e-15);
}

TEST(GatAttention, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed + 100);
    const auto p = layer(GraphLayerKind::gat, 3, 4, 2, seed);
    const Matrix h = random_matrix(4, 3, rng);
    for (std::size_t k = 0; k < 2; ++k)
      expect_near(gat_attention(h, p, k),
                  attention_oracle(h, p.weights[k].value, p.attention[k].value, 0.2), 1e-12);
  }
}

TEST(GatAttention, RowsAreDistributions) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.index(22);
    auto p = layer(GraphLayerKind::gat, 5, 4, 1, seed);
    // large weights push logits apart
    p.attention[0].value *= 10.0;
    const Matrix a = gat_attention(random_matrix(n, 5, rng, 3.0), p, 0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (double v : a.row(i)) {
        EXPECT_GE(v, 0.0);
        s += v;
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Gat, SingleHeadEqualsGcnOverAttentionEdges) {
  Rng rng(6);
  const auto g = layer(GraphLayerKind::gat, 4, 3, 1, 7);
  auto c = layer(GraphLayerKind::gcn, 4, 3, 1, 8);
  c.weights[0].value = g.weights[0].value;
  const Matrix h = random_matrix(5, 4, rng);
  const GatOutput o = gat_forward(h, g);
  expect_near(o.nodes, gcn_forward(h, o.attention[0], c), 1e-15);
}

TEST(Gat, DuplicatedHeadsConcatenate) {
  Rng rng(9);
  const auto one = layer(GraphLayerKind::gat, 4, 3, 1, 10);
  auto two = layer(GraphLayerKind::gat, 4, 3, 2, 11);
  for (std::size_t k = 0; k < 2; ++k) {
    two.weights[k].value = one.weights[0].value;
    two.attention[k].value = one.attention[0].value;
  }
  const Matrix h = random_matrix(5, 4, rng);
  const Matrix a = gat_forward(h, one).nodes, b = gat_forward(h, two).nodes;
  ASSERT_EQ(b.cols(), 6u);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(b(i, c), a(i, c));
      EXPECT_EQ(b(i, 3 + c), a(i, c));
    }
}

TEST(Gat, ZeroAttentionEqualsUniformGcn) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto g = layer(GraphLayerKind::gat, 4, 3, 1, seed);
    g.attention[0].value.fill(0.0);
    auto c = layer(GraphLayerKind::gcn, 4, 3, 1, seed);
    c.weights[0].value = g.weights[0].value;
    const std::size_t n = 1 + rng.index(10);
    const Matrix h = random_matrix(n, 4, rng);
    expect_near(gat_forward(h, g).nodes, gcn_forward(h, normalize_edges(Matrix(n, n, 1.0)), c), 1e-12);
  }
}

TEST(Pool, Examples) {
  EXPECT_EQ(global_average_pool(Matrix{{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}), (Matrix{{1.0, 2.0}}));
  EXPECT_EQ(global_average_pool(Matrix{{0.0, 2.0}, {4.0, 0.0}}), (Matrix{{2.0, 1.0}}));
  EXPECT_THROW(global_average_pool(Matrix(0, 3)), ShapeError);
}

std::vector<std::size_t> random_perm(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  rng.shuffle(p);
  return p;
}

TEST(Pool, PermutationInvariant) {
  Rng rng(12);
  const Matrix h = random_matrix(10, 4, rng);
  const Matrix ref = global_average_pool(h);
  for (int t = 0; t < 20; ++t) {
    const auto perm = random_perm(10, rng);
    Matrix q(10, 4);
    for (std::size_t i = 0; i < 10; ++i) std::copy(h.row(perm[i]).begin(), h.row(perm[i]).end(), q.row(i).begin());
    expect_near(global_average_pool(q), ref, 1e-12);
  }
}

TEST(Layers, PermutationEquivariant) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(20);
    const auto g = layer(GraphLayerKind::gat, 4, 3, 2, seed);
    const auto c = layer(GraphLayerKind::gcn, 4, 3, 1, seed);
    const Matrix h = random_matrix(n, 4, rng), e = row_stochastic(n, rng);
    const auto perm = random_perm(n, rng);
    Matrix hp(n, 4), ep(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(h.row(perm[i]).begin(), h.row(perm[i]).end(), hp.row(i).begin());
      for (std::size_t j = 0; j < n; ++j) ep(i, j) = e(perm[i], perm[j]);
    }
    const Matrix go = gat_forward(h, g).nodes, gp = gat_forward(hp, g).nodes;
    const Matrix co = gcn_forward(h, e, c), cp = gcn_forward(hp, ep, c);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < go.cols(); ++k) EXPECT_NEAR(gp(i, k), go(perm[i], k), 1e-9);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < co.cols(); ++k) EXPECT_NEAR(cp(i, k), co(perm[i], k), 1e-9);
  }
}

class LayerGradients : public ::testing::TestWithParam<std::size_t> {};

TEST_P(LayerGradients, GcnAndGatMatchFiniteDifferences) {
  const std::size_t n = GetParam();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto gcn = LayerCheck::run(GraphLayerKind::gcn, n, 1, seed);
    EXPECT_TRUE(gcn.passed) << "gcn n=" << n << " seed " << seed << ": " << gcn.message;
    for (std::size_t heads : {1u, 2u}) {
      const auto gat = LayerCheck::run(GraphLayerKind::gat, n, heads, seed);
      EXPECT_TRUE(gat.passed) << "gat n=" << n << " K=" << heads << " seed " << seed << ": " << gat.message;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(GraphSizes, LayerGradients, ::testing::Values(1, 2, 5, 10, 22));

}  // namespace
}  // namespace playgraph
