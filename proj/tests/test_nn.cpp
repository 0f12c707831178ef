#include <doctest.h>

#include <random>

#include "ayss/dqn.hpp"
#include "ayss/nn.hpp"

using namespace ayss;
using namespace ayss::rl;

TEST_SUITE("nn") {
  TEST_CASE("network shapes") {
    DuelingNet net(3, 21);
    CHECK(net.feature().dims() == std::vector<int>{3, 256, 256});
    CHECK(net.feature().relu_output());
    CHECK(net.value().dims() == std::vector<int>{256, 256, 256, 1});
    CHECK(net.advantage().dims() == std::vector<int>{256, 256, 256, 21});
    CHECK(net.obs_dim() == 3);
    CHECK(net.action_count() == 21);
    const std::size_t expected = (3 * 256 + 256) + (256 * 256 + 256) +
                                 2 * ((256 * 256 + 256) + (256 * 256 + 256)) + (256 + 1) + (256 * 21 + 21);
    CHECK(net.parameter_count() == expected);
  }

  TEST_CASE("dueling aggregation") {
    Matrix v(1, 1);
    v << 2.0;
    Matrix a(3, 1);
    a << 1.0, 3.0, 5.0;
    const Matrix q = DuelingNet::aggregate(v, a);
    CHECK(q(0, 0) == 0.0);
    CHECK(q(1, 0) == 2.0);
    CHECK(q(2, 0) == 4.0);
    Matrix flat = Matrix::Constant(4, 1, 7.0);
    const Matrix q2 = DuelingNet::aggregate(v, flat);
    for (int i = 0; i < 4; ++i) CHECK(q2(i, 0) == 2.0);
  }

  TEST_CASE("zero weights give zero Q") {
    DuelingNet net(4, 42, 16);
    net.set_zero();
    const Matrix q = net.q_values(Matrix::Random(4, 5));
    CHECK(q.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("constant shift of the advantage head leaves Q unchanged") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      DuelingNet net(3, 21, 32);
      net.init(rng);
      const Matrix x = Matrix::Random(3, 8);
      const Matrix q = net.q_values(x);
      DuelingNet shifted = net;
      shifted.advantage().layers().back().b.array() += uniform(rng, -50.0, 50.0);
      CHECK((shifted.q_values(x) - q).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("seeded initialization is reproducible and fan-in scaled") {
    Rng a(9), b(9);
    DuelingNet n1(3, 21, 64), n2(3, 21, 64);
    n1.init(a);
    n2.init(b);
    const auto t1 = n1.tensors();
    const auto t2 = n2.tensors();
    for (std::size_t i = 0; i < t1.size(); ++i) CHECK(*t1[i] == *t2[i]);
    const double bound = std::sqrt(6.0 / 3.0);
    CHECK(n1.feature().layers()[0].W.cwiseAbs().maxCoeff() <= bound);
  }

  TEST_CASE("linear net gradient equals the closed form") {
    Rng rng(1);
    Mlp net({3, 2}, false);
    net.init_kaiming(rng);
    const Matrix x = Matrix::Random(3, 6);
    const Matrix y = Matrix::Random(2, 6);
    Mlp::Cache cache;
    const Matrix f = net.forward(x, cache);
    Mlp grads = net;
    grads.set_zero();
    net.backward(cache, 2.0 * (f - y), grads);
    const Matrix r = f - y;
    const Matrix gW = 2.0 * r * x.transpose();
    const Matrix gb = 2.0 * r.rowwise().sum();
    CHECK((grads.layers()[0].W - gW).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((grads.layers()[0].b - gb).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("finite differences agree with backpropagation") {
    Rng rng(17);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      DuelingNet net(trial % 2 == 0 ? 3 : 4, 5, 8);
      net.init(rng);
      const int batch = 6;
      const Matrix obs = Matrix::Random(net.obs_dim(), batch).cwiseAbs();
      std::vector<int> actions(batch);
      std::vector<double> targets(batch), weights(batch);
      for (int k = 0; k < batch; ++k) {
        actions[k] = static_cast<int>(uniform_index(rng, 5));
        targets[k] = uniform(rng, -5.0, 5.0);
        weights[k] = uniform(rng, 0.1, 1.0);
      }
      const GradCheckResult r = gradient_check(net, obs, actions, targets, weights);
      CHECK(r.checked > 0);
      worst = std::max(worst, r.max_rel_error);
    }
    CHECK(worst < 1e-4);

    Mlp mlp({4, 8, 8, 3}, false);
    mlp.init_kaiming(rng);
    const GradCheckResult r = gradient_check(mlp, Matrix::Random(4, 5), Matrix::Random(3, 5));
    CHECK(r.max_rel_error < 1e-5);
  }

  TEST_CASE("parameters on a ReLU kink are excluded") {
    Mlp mlp({2, 3, 1}, false);
    mlp.set_zero();
    mlp.layers()[1].W.setOnes();
    // Zero input and zero bias: every hidden pre-activation sits exactly at 0.
    const GradCheckResult r = gradient_check(mlp, Matrix::Zero(2, 1), Matrix::Ones(1, 1));
    CHECK(r.excluded_kinks > 0);
    CHECK(r.max_rel_error < 1e-5);
  }

  TEST_CASE("Adam first step moves each parameter by lr against the gradient sign") {
    Rng rng(2);
    DuelingNet net(3, 2, 4);
    net.init(rng);
    DuelingNet grads = net;
    grads.set_zero();
    grads.value().layers().back().b(0, 0) = 0.5;
    grads.advantage().layers().back().W(1, 2) = -2.0;
    const DuelingNet before = net;
    Adam adam(1e-3);
    adam.step(net, grads);
    CHECK(net.value().layers().back().b(0, 0) ==
          doctest::Approx(before.value().layers().back().b(0, 0) - 1e-3).epsilon(1e-6));
    CHECK(net.advantage().layers().back().W(1, 2) ==
          doctest::Approx(before.advantage().layers().back().W(1, 2) + 1e-3).epsilon(1e-6));
    CHECK(net.feature().layers()[0].W == before.feature().layers()[0].W);
    CHECK(adam.steps() == 1);
  }
}
