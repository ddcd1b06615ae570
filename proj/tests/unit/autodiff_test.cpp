#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "synthetic.hpp"
#include "tenence/autodiff.hpp"
#include "tenence/layers.hpp"
#include "tenence/random.hpp"

using namespace tenence;
using ad::Tape;

namespace {

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Reduces any output to a scalar by a fixed random projection, then compares
// tape gradients to central differences for every input entry.
double max_rel_error(const std::vector<Matrix>& inputs, const Builder& build,
                     std::uint64_t seed = 1, double h = 1e-6) {
  Rng rng(seed);
  Matrix projection;
  auto scalar = [&](Tape& tape, const std::vector<Matrix>& values, std::vector<Var>* vars) {
    std::vector<Var> v;
    for (const auto& m : values) v.push_back(tape.variable(m));
    if (vars) *vars = v;
    Var out = build(tape, v);
    if (projection.size() == 0) projection = synth::random_matrix(out.rows(), out.cols(), rng);
    Var r = tape.constant(projection);
    Var left = tape.constant(Matrix::Ones(1, out.rows()));
    Var right = tape.constant(Matrix::Ones(out.cols(), 1));
    return ad::matmul(ad::matmul(left, ad::hadamard(out, r)), right);
  };

  Tape tape;
  std::vector<Var> vars;
  Var s = scalar(tape, inputs, &vars);
  tape.backward(s);

  double worst = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (Eigen::Index i = 0; i < inputs[t].size(); ++i) {
      auto up = inputs, down = inputs;
      up[t].data()[i] += h;
      down[t].data()[i] -= h;
      Tape tu(false), td(false);
      const double fd =
          (scalar(tu, up, nullptr).scalar() - scalar(td, down, nullptr).scalar()) / (2 * h);
      const Matrix& g = vars[t].grad();
      const double a = g.size() == 0 ? 0.0 : g.data()[i];
      worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
    }
  }
  return worst;
}

Matrix rnd(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  return synth::random_matrix(r, c, rng);
}

constexpr double kTol = 1e-6;

}  // namespace

TEST(Autodiff, MatmulAndAdd) {
  EXPECT_LT(max_rel_error({rnd(3, 4, 1), rnd(4, 2, 2)},
                          [](Tape&, const std::vector<Var>& v) { return ad::matmul(v[0], v[1]); }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(3, 2, 3), rnd(3, 2, 4)},
                          [](Tape&, const std::vector<Var>& v) {
                            return ad::sub(ad::add(v[0], v[1]), ad::scale(v[1], 3.0));
                          }),
            kTol);
}

TEST(Autodiff, ElementwiseNonlinearities) {
  const Builder chain = [](Tape&, const std::vector<Var>& v) {
    return ad::hadamard(ad::sigmoid(v[0]), ad::one_minus(ad::tanh(v[1])));
  };
  EXPECT_LT(max_rel_error({rnd(4, 3, 5), rnd(4, 3, 6)}, chain), kTol);
  // keep inputs away from the ReLU kink
  Matrix x = rnd(4, 3, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.3;
  EXPECT_LT(max_rel_error({x}, [](Tape&, const std::vector<Var>& v) { return ad::relu(v[0]); }),
            kTol);
}

TEST(Autodiff, BroadcastConcatMeanAndBlocks) {
  EXPECT_LT(max_rel_error({rnd(4, 3, 8), rnd(1, 3, 9)},
                          [](Tape&, const std::vector<Var>& v) { return ad::add_row(v[0], v[1]); }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(4, 3, 10), rnd(1, 2, 11)},
                          [](Tape&, const std::vector<Var>& v) {
                            return ad::concat_broadcast_row(v[0], v[1]);
                          }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(4, 3, 12), rnd(4, 2, 13)},
                          [](Tape&, const std::vector<Var>& v) {
                            return ad::mean_rows(ad::concat_cols(v[0], v[1]));
                          }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(5, 3, 14)},
                          [](Tape&, const std::vector<Var>& v) { return ad::row_block(v[0], 1, 3); }),
            kTol);
}

TEST(Autodiff, AffineAndGraphConv) {
  Rng rng(15);
  Matrix adj = synth::random_sequence(5, 1, 0.5, rng).at(1).adjacency;
  const SparseMatrix prop = normalized_adjacency(adj);
  EXPECT_LT(max_rel_error({rnd(5, 3, 16), rnd(3, 2, 17), rnd(1, 2, 18)},
                          [](Tape&, const std::vector<Var>& v) {
                            return ad::affine(v[0], v[1], v[2]);
                          }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(5, 3, 19), rnd(3, 2, 20), rnd(1, 2, 21)},
                          [&](Tape&, const std::vector<Var>& v) {
                            return ad::graph_conv(&prop, v[0], v[1], v[2]);
                          }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(5, 2, 22)},
                          [&](Tape&, const std::vector<Var>& v) {
                            return ad::graph_conv_identity(&prop, v[0], std::nullopt);
                          }),
            kTol);
}

TEST(Autodiff, InnerProductSigmoidAndSums) {
  EXPECT_LT(max_rel_error({rnd(4, 3, 23)},
                          [](Tape&, const std::vector<Var>& v) {
                            return ad::inner_product_sigmoid(v[0]);
                          }),
            kTol);
  EXPECT_LT(max_rel_error({rnd(1, 1, 24), rnd(1, 1, 25)},
                          [](Tape&, const std::vector<Var>& v) {
                            const double w[] = {2.0, -0.5};
                            return ad::add(ad::weighted_sum(v, w), ad::sum(v));
                          }),
            kTol);
}

TEST(Autodiff, BceUpperGradient) {
  Rng rng(26);
  const Matrix target = synth::random_sequence(5, 1, 0.4, rng).at(1).adjacency;
  EXPECT_LT(max_rel_error({rnd(5, 2, 27)},
                          [&](Tape&, const std::vector<Var>& v) {
                            return ad::bce_upper(ad::inner_product_sigmoid(v[0]), &target, 2.5,
                                                 1e-7);
                          }),
            kTol);
}

TEST(Autodiff, InfoNceGradient) {
  const std::vector<std::vector<ad::RowRef>> negatives = {
      {{1, 0}, {0, 1}}, {{1, 2}, {0, 0}, {1, 1}}, {{0, 1}}};
  EXPECT_LT(max_rel_error({rnd(3, 2, 28), rnd(3, 2, 29), rnd(3, 2, 30)},
                          [&](Tape&, const std::vector<Var>& v) {
                            const Var targets[] = {v[1], v[2]};
                            return ad::info_nce_rows(v[0], targets, 0, negatives);
                          }),
            kTol);
}

TEST(Autodiff, InfoNceValueMatchesScalarSoftmax) {
  Tape tape;
  const Matrix p = rnd(2, 3, 31), z0 = rnd(2, 3, 32), z1 = rnd(2, 3, 33);
  Var pred = tape.variable(p);
  const Var targets[] = {tape.constant(z0), tape.constant(z1)};
  const std::vector<std::vector<ad::RowRef>> neg = {{{1, 0}, {0, 1}}, {{1, 1}, {1, 0}}};
  const double got = ad::info_nce_rows(pred, targets, 0, neg).scalar();

  const Matrix* tbl[] = {&z0, &z1};
  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double pos = std::exp(p.row(i).dot(z0.row(i)));
    double denom = pos;
    for (const auto& r : neg[i]) denom += std::exp(p.row(i).dot(tbl[r.target]->row(r.row)));
    expected += -std::log(pos / denom);
  }
  EXPECT_NEAR(got, expected / 2.0, 1e-12);
}

TEST(Autodiff, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.variable(Matrix::Zero(2, 3));
  Var b = tape.variable(Matrix::Zero(2, 3));
  EXPECT_THROW(ad::matmul(a, b), std::invalid_argument);
  EXPECT_THROW(ad::add(a, tape.variable(Matrix::Zero(3, 2))), std::invalid_argument);
}

TEST(Autodiff, ConstantsReceiveNoGradient) {
  Tape tape;
  Var a = tape.variable(Matrix::Ones(1, 1));
  Var c = tape.constant(Matrix::Constant(1, 1, 3.0));
  tape.backward(ad::hadamard(a, c));
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 3.0);
  EXPECT_EQ(c.grad().size(), 0);
}

TEST(Autodiff, GradientsAccumulateOverFanOut) {
  Tape tape;
  Var x = tape.variable(Matrix::Constant(1, 1, 2.0));
  tape.backward(ad::add(ad::hadamard(x, x), x));  // x^2 + x
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 5.0);
}
