#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "synthetic.hpp"
#include "tenence/layers.hpp"

using namespace tenence;

namespace {

// Straight-line dense versions used as oracles.
Matrix dense_propagation(const Matrix& a) {
  const auto n = a.rows();
  Matrix ai = a + Matrix::Identity(n, n);
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = ai(i, j) / std::sqrt(ai.row(i).sum() * ai.row(j).sum());
  return out;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

GcnLayerParams random_affine(Eigen::Index in, Eigen::Index out, Rng& rng) {
  GcnLayerParams p{synth::random_matrix(in, out, rng), synth::random_matrix(1, out, rng)};
  return p;
}

GgruParams random_ggru(Eigen::Index in, Eigen::Index state, Rng& rng) {
  return {random_affine(in, state, rng),    random_affine(state, state, rng),
          random_affine(in, state, rng),    random_affine(state, state, rng),
          random_affine(in, state, rng),    random_affine(state, state, rng)};
}

Matrix permutation_matrix(const std::vector<std::size_t>& perm) {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) p(static_cast<Eigen::Index>(perm[i]), i) = 1.0;
  return p;
}

}  // namespace

TEST(TimeEncode, ZeroIsAllOnes) {
  EXPECT_TRUE(time_encode(0.0).isApprox(RowVector::Ones(100)));
}

TEST(TimeEncode, FirstFrequencyIsOne) {
  const RowVector e = time_encode(1.0);
  EXPECT_NEAR(e(0), std::cos(1.0), 1e-15);
  EXPECT_NEAR(e(0), 0.5403, 1e-4);
}

TEST(TimeEncode, FrequenciesStrictlyDecreasingWithDefaultAlphaBeta) {
  const TimeEncoder enc(100);
  const auto& w = enc.frequencies();
  EXPECT_DOUBLE_EQ(w(0), 1.0);
  for (Eigen::Index i = 1; i < w.size(); ++i) {
    EXPECT_LT(w(i), w(i - 1));
    EXPECT_NEAR(w(i), std::pow(10.0, -static_cast<double>(i) / 10.0), 1e-15);
  }
  for (double k : {0.0, 1.0, 3.0, 11.0}) {
    const RowVector e = enc.encode(k);
    EXPECT_LE(e.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_EQ(e, enc.encode(k));
  }
}

TEST(GcnLayer, NoEdgesReducesToAffine) {
  Rng rng(1);
  const Matrix x = synth::random_matrix(2, 3, rng);
  const auto p = random_affine(3, 2, rng);
  const Matrix h = gcn_layer(x, Matrix::Zero(2, 2), p, Activation::kNone);
  const Matrix expected = (x * p.weight).rowwise() + p.bias->row(0);
  EXPECT_TRUE(h.isApprox(expected, 1e-12));
}

TEST(GcnLayer, TwoNodeEdgeMixesEqually) {
  Matrix a(2, 2);
  a << 0, 1, 1, 0;
  GcnLayerParams p{Matrix::Identity(2, 2), Matrix::Zero(1, 2)};
  const Matrix h = gcn_layer(Matrix::Identity(2, 2), a, p, Activation::kNone);
  EXPECT_TRUE(h.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(GcnLayer, MatchesDenseOracleWithRelu) {
  Rng rng(2);
  const auto seq = synth::random_sequence(6, 1, 0.4, rng);
  const Matrix& a = seq.at(1).adjacency;
  const Matrix x = synth::random_matrix(6, 3, rng);
  const auto p = random_affine(3, 4, rng);
  const Matrix expected =
      ((dense_propagation(a) * x * p.weight).rowwise() + p.bias->row(0)).cwiseMax(0.0);
  EXPECT_TRUE(gcn_layer(x, a, p, Activation::kRelu).isApprox(expected, 1e-12));
}

TEST(GcnLayer, ShapeMismatchThrows) {
  GcnLayerParams p{Matrix::Identity(3, 2), std::nullopt};
  EXPECT_THROW(gcn_layer(Matrix::Zero(2, 2), Matrix::Zero(2, 2), p, Activation::kNone),
               ArgumentError);
  EXPECT_THROW(gcn_layer(Matrix::Zero(2, 3), Matrix::Zero(3, 3), p, Activation::kNone),
               ArgumentError);
}

TEST(Encoder, ZeroWeightsGiveBroadcastBias) {
  std::array<GcnLayerParams, 3> layers{
      GcnLayerParams{Matrix::Zero(3, 4), Matrix::Zero(1, 4)},
      GcnLayerParams{Matrix::Zero(4, 4), Matrix::Zero(1, 4)},
      GcnLayerParams{Matrix::Zero(4, 2), Matrix(RowVector::LinSpaced(2, 1.0, 2.0))}};
  Rng rng(3);
  const Matrix z = encoder_forward(synth::random_matrix(5, 3, rng),
                                   synth::random_sequence(5, 1, 0.5, rng).at(1).adjacency, layers);
  for (Eigen::Index i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(z(i, 0), 1.0);
    EXPECT_DOUBLE_EQ(z(i, 1), 2.0);
  }
}

TEST(Encoder, MatchesStraightLineOracle) {
  Rng rng(4);
  const Matrix a = synth::random_sequence(4, 1, 0.6, rng).at(1).adjacency;
  const Matrix x = synth::random_matrix(4, 3, rng);
  std::array<GcnLayerParams, 3> layers{random_affine(3, 5, rng), random_affine(5, 5, rng),
                                       random_affine(5, 2, rng)};
  const Matrix p = dense_propagation(a);
  Matrix h = x;
  for (int layer = 0; layer < 3; ++layer) {
    h = (p * h * layers[layer].weight).rowwise() + layers[layer].bias->row(0);
    if (layer < 2) h = h.cwiseMax(0.0);
  }
  EXPECT_TRUE(encoder_forward(x, a, layers).isApprox(h, 1e-12));
}

// Property: f(PX, PAP^T) = P f(X, A) over random graphs and permutations.
TEST(Encoder, PermutationEquivariance) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 7);
    const Matrix a = synth::random_sequence(n, 1, 0.4, rng).at(1).adjacency;
    const Matrix x = synth::random_matrix(static_cast<Eigen::Index>(n), 3, rng);
    std::array<GcnLayerParams, 3> layers{random_affine(3, 4, rng), random_affine(4, 4, rng),
                                         random_affine(4, 3, rng)};
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);
    const Matrix p = permutation_matrix(perm);
    const Matrix lhs = encoder_forward(p * x, p * a * p.transpose(), layers);
    const Matrix rhs = p * encoder_forward(x, a, layers);
    EXPECT_TRUE(lhs.isApprox(rhs, 1e-10)) << "trial " << trial;
    const Matrix g1 = gcn_layer(p * x, p * a * p.transpose(), layers[0], Activation::kRelu);
    EXPECT_TRUE(g1.isApprox(p * gcn_layer(x, a, layers[0], Activation::kRelu), 1e-10));
  }
}

TEST(Ggru, ZeroParametersAndInputsGiveZeroState) {
  GgruParams p;
  for (auto* a : {&p.reset_input, &p.update_input, &p.candidate_input}) {
    *a = GcnLayerParams{Matrix::Zero(5, 3), Matrix::Zero(1, 3)};
  }
  for (auto* a : {&p.reset_state, &p.update_state, &p.candidate_state}) {
    *a = GcnLayerParams{Matrix::Zero(3, 3), Matrix::Zero(1, 3)};
  }
  Matrix a(4, 4);
  a << 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0;
  const Matrix s = ggru_step(Matrix::Zero(4, 5), a, Matrix::Zero(4, 3), p);
  EXPECT_EQ(s, Matrix::Zero(4, 3));
}

TEST(Ggru, LargeUpdateBiasCarriesState) {
  Rng rng(6);
  auto p = random_ggru(5, 3, rng);
  p.update_input.bias = Matrix::Constant(1, 3, 60.0);
  const Matrix prev = synth::random_matrix(4, 3, rng);
  const Matrix a = synth::random_sequence(4, 1, 0.5, rng).at(1).adjacency;
  const Matrix s = ggru_step(synth::random_matrix(4, 5, rng, 0.1), a, prev, p);
  EXPECT_TRUE(s.isApprox(prev, 1e-12));
}

TEST(Ggru, MatchesScalarRecomputation) {
  Rng rng(7);
  const Eigen::Index n = 3, din = 4, ds = 2;
  const auto p = random_ggru(din, ds, rng);
  const Matrix a = synth::random_sequence(3, 1, 0.7, rng).at(1).adjacency;
  const Matrix z = synth::random_matrix(n, din, rng);
  const Matrix prev = synth::random_matrix(n, ds, rng);
  const Matrix prop = dense_propagation(a);

  auto conv = [&](const Matrix& x, const GcnLayerParams& w, Eigen::Index i, Eigen::Index c) {
    double acc = (*w.bias)(0, c);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index f = 0; f < x.cols(); ++f) acc += prop(i, j) * x(j, f) * w.weight(f, c);
    return acc;
  };
  const Matrix got = ggru_step(z, a, prev, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < ds; ++c) {
      const double r = sig(conv(z, p.reset_input, i, c) + conv(prev, p.reset_state, i, c));
      const double u = sig(conv(z, p.update_input, i, c) + conv(prev, p.update_state, i, c));
      const double cand =
          std::tanh(conv(z, p.candidate_input, i, c) + r * conv(prev, p.candidate_state, i, c));
      EXPECT_NEAR(got(i, c), (1 - u) * cand + u * prev(i, c), 1e-12);
    }
  }
}

// Property: states in [-1, 1] stay in [-1, 1].
TEST(Ggru, OutputStaysBounded) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_ggru(3, 4, rng);
    const std::size_t n = 2 + uniform_index(rng, 6);
    const Matrix a = synth::random_sequence(n, 1, 0.5, rng).at(1).adjacency;
    const auto rows = static_cast<Eigen::Index>(n);
    Matrix s = synth::random_matrix(rows, 4, rng);
    for (int step = 0; step < 5; ++step) {
      s = ggru_step(synth::random_matrix(rows, 3, rng, 5.0), a, s, p);
      EXPECT_LE(s.cwiseAbs().maxCoeff(), 1.0);
    }
  }
}

TEST(Readout, ColumnMeans) {
  Matrix s(2, 2);
  s << 1, 0, 0, 1;
  EXPECT_TRUE(readout(s).isApprox(RowVector::Constant(2, 0.5)));
  Rng rng(9);
  const Matrix m = synth::random_matrix(5, 3, rng);
  const RowVector r = readout(m);
  for (Eigen::Index c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) acc += m(i, c);
    EXPECT_NEAR(r(c), acc / 5.0, 1e-15);
  }
  EXPECT_THROW(readout(Matrix(0, 3)), ArgumentError);
}
