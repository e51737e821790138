// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "pcnn/model.hpp"
#include "pcnn/rng.hpp"

using namespace pcnn;

namespace {

// Straight-line re-implementation of the forward pass for one sample,
// independent of the Eigen batch path.
std::vector<double> plain_forward(const Mlp& net, const std::vector<double>& x) {
  std::vector<double> act = x;
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    const auto& W = net.weights()[l];
    const auto& b = net.biases()[l];
    std::vector<double> next(static_cast<std::size_t>(W.cols()), 0.0);
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      double acc = b(j);
      for (Eigen::Index i = 0; i < W.rows(); ++i)
        acc += act[static_cast<std::size_t>(i)] * W(i, j);
      next[static_cast<std::size_t>(j)] =
          (l + 1 < net.n_layers()) ? std::max(0.0, acc) : acc;
    }
    act = std::move(next);
  }
  return act;
}

OrthonormalBasis low_basis(int d, int p) {
  std::vector<UnivariateBasis> fams;
  for (int k = 0; k < d; ++k)
    fams.push_back(apc_univariate(analytic_moments(Family::Normal, 2 * p), p));
  return tensor_basis(std::move(fams), p);
}

}  // namespace

TEST_SUITE_BEGIN("mlp");

TEST_CASE("zero network maps everything to zero") {
  AdaptivePceModel aux;
  aux.basis = low_basis(2, 1);
  aux.net = Mlp({2, 4, static_cast<int>(aux.basis.size())});

  const auto out = aux.forward(Eigen::Vector2d(0.3, -1.2));
  CHECK(out.coeffs.norm() == 0.0);
  CHECK(out.prediction == 0.0);
}

TEST_CASE("output bias e1 yields the constant prediction 1") {
  AdaptivePceModel aux;
  aux.basis = low_basis(2, 1);
  aux.net = Mlp({2, 4, static_cast<int>(aux.basis.size())});
  aux.net.biases().back()(0) = 1.0;

  Xoshiro256 rng(1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector2d xi(4.0 * rng.next_unit() - 2.0, 4.0 * rng.next_unit() - 2.0);
    const auto out = aux.forward(xi);
    CHECK(out.prediction == 1.0);  // coeff e1 against the normalized constant
  }
}

TEST_CASE("batch forward agrees with the straight-line re-implementation") {
  Mlp net = Mlp::uniform_init({3, 8, 5, 4}, 97);
  Xoshiro256 rng(98);
  Eigen::MatrixXd x(6, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 2.0 * rng.next_unit() - 1.0;

  const Eigen::MatrixXd out = net.forward(x);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const std::vector<double> row = {x(r, 0), x(r, 1), x(r, 2)};
    const auto want = plain_forward(net, row);
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      CHECK(out(r, j) ==
            doctest::Approx(want[static_cast<std::size_t>(j)]).epsilon(1e-12));
  }
}

TEST_CASE("backward gradients match central finite differences") {
  Mlp net = Mlp::uniform_init({3, 6, 5, 4}, 1001);
  Xoshiro256 rng(1002);
  Eigen::MatrixXd x(7, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 2.0 * rng.next_unit() - 1.0;
  Eigen::MatrixXd g(7, 4);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = 2.0 * rng.next_unit() - 1.0;

  const auto loss = [&](const Mlp& m) {
    return (m.forward(x).array() * g.array()).sum();
  };

  Mlp::Cache cache;
  net.forward(x, cache);
  const Eigen::VectorXd analytic = net.pack(net.backward(cache, g));

  Eigen::VectorXd params = net.pack_params();
  const double h = 1e-5;
  Xoshiro256 pick(5);
  int checked = 0;
  while (checked < 50) {
    const auto idx =
        static_cast<Eigen::Index>(pick.next() % static_cast<std::uint64_t>(params.size()));
    Eigen::VectorXd up = params, dn = params;
    up(idx) += h;
    dn(idx) -= h;
    Mlp net_up = net, net_dn = net;
    net_up.set_params(up);
    net_dn.set_params(dn);
    const double fd = (loss(net_up) - loss(net_dn)) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic(idx)), 1e-8});
    CHECK(std::abs(fd - analytic(idx)) / denom < 1e-5);
    ++checked;
  }
}

TEST_CASE("single linear layer reproduces the hand derivative") {
  // One affine layer, one sample: y_hat = w x + b, L = (y_hat - y)^2.
  Mlp net({1, 1});
  net.weights()[0](0, 0) = 0.7;
  net.biases()[0](0) = -0.2;
  const double x = 1.3, y = 2.0;

  Eigen::MatrixXd input(1, 1);
  input(0, 0) = x;
  Mlp::Cache cache;
  const double y_hat = net.forward(input, cache)(0, 0);
  Eigen::MatrixXd g(1, 1);
  g(0, 0) = 2.0 * (y_hat - y);
  const auto grads = net.backward(cache, g);
  CHECK(grads.d_weights[0](0, 0) ==
        doctest::Approx(2.0 * (y_hat - y) * x).epsilon(1e-14));
  CHECK(grads.d_biases[0](0) == doctest::Approx(2.0 * (y_hat - y)).epsilon(1e-14));
}

TEST_CASE("zero upstream gradient gives exactly zero parameter gradients") {
  Mlp net = Mlp::uniform_init({3, 6, 4}, 2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  Mlp::Cache cache;
  net.forward(x, cache);
  const auto grads = net.backward(cache, Eigen::MatrixXd::Zero(5, 4));
  CHECK(net.pack(grads).norm() == 0.0);
}

TEST_CASE("backward without a forward cache is a usage error") {
  Mlp net = Mlp::uniform_init({2, 3, 2}, 3);
  Mlp::Cache cache;
  CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Zero(1, 2)), UsageError);
}

TEST_CASE("layer chains are validated") {
  CHECK_THROWS_AS(Mlp({5}), ValidationError);
  CHECK_THROWS_AS(Mlp({3, 0, 2}), ValidationError);
  Mlp net({2, 3});
  CHECK_THROWS_AS(net.set_params(Eigen::VectorXd::Zero(4)), ValidationError);
  CHECK_THROWS_AS(net.forward(Eigen::MatrixXd::Zero(4, 3)), ValidationError);
}

TEST_CASE("non-finite parameters surface as numeric errors") {
  Mlp net({2, 2});
  net.weights()[0](0, 0) = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(net.forward(x), NumericError);
}

TEST_CASE("uniform initialization is seeded, bounded and bias-free") {
  const Mlp a = Mlp::uniform_init({4, 8, 3}, 42);
  const Mlp b = Mlp::uniform_init({4, 8, 3}, 42);
  const Mlp c = Mlp::uniform_init({4, 8, 3}, 43);
  CHECK(a.pack_params() == b.pack_params());
  CHECK(a.pack_params() != c.pack_params());
  for (std::size_t l = 0; l < a.n_layers(); ++l) {
    const auto& W = a.weights()[l];
    const double r = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    CHECK(W.cwiseAbs().maxCoeff() <= r);
    CHECK(a.biases()[l].norm() == 0.0);
  }
}

TEST_CASE("adam first-step magnitude and invariances") {
  SUBCASE("hand-computed first update") {
    // g = 4: m_hat = 4, v_hat = 16, step = -eta * 4 / (4 + eps).
    Adam adam(AdamParams{}, 1);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd g(1);
    g(0) = 4.0;
    adam.step(p, g);
    const double want = -1e-3 * 4.0 / (4.0 + 1e-8);
    CHECK(p(0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(p(0) + 1e-3) < 1e-10);
  }
  SUBCASE("zero gradients never move parameters") {
    Adam adam(AdamParams{}, 3);
    Eigen::VectorXd p(3);
    p << 1.0, -2.0, 0.5;
    const Eigen::VectorXd before = p;
    for (int i = 0; i < 10; ++i) adam.step(p, Eigen::VectorXd::Zero(3));
    CHECK(p == before);  // bit-identical
  }
  SUBCASE("constant gradient keeps the step bounded") {
    Adam adam(AdamParams{}, 1);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd g(1);
    g(0) = 2.5;
    adam.step(p, g);
    const double first = std::abs(p(0));
    const double before = p(0);
    adam.step(p, g);
    const double second = std::abs(p(0) - before);
    CHECK(second <= first + 1e-12);
  }
  SUBCASE("non-finite gradient aborts without touching state") {
    Adam adam(AdamParams{}, 2);
    Eigen::VectorXd p(2);
    p << 1.0, 2.0;
    Eigen::VectorXd g(2);
    g << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam.step(p, g), NumericError);
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 2.0);
    CHECK(adam.t() == 0);
  }
}

TEST_CASE("adaptive model validates net/basis agreement") {
  AdaptivePceModel aux;
  aux.basis = low_basis(2, 2);  // M = 6
  aux.net = Mlp({2, 4, 5});     // wrong output width
  CHECK_THROWS_AS(aux.validate(), ValidationError);
  aux.net = Mlp({3, 4, 6});  // wrong input width
  CHECK_THROWS_AS(aux.validate(), ValidationError);
  aux.net = Mlp({2, 4, 6});
  CHECK_NOTHROW(aux.validate());
}

TEST_SUITE_END();
