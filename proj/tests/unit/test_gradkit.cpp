#include <cmath>
#include <stdexcept>

#include "codicon/gradkit/finite_diff.hpp"
#include "codicon/gradkit/matrix.hpp"
#include "codicon/gradkit/mlp.hpp"
#include "codicon/gradkit/optim.hpp"
#include "codicon/gradkit/rng.hpp"
#include "codicon/gradkit/sampling.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace codicon;
using codicon::testing::random_vector;
using codicon::testing::rel_error;

namespace {

// Layer-by-layer recomputation from the public weight/bias accessors.
std::vector<double> reference_forward(const Mlp& net, std::vector<double> x) {
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    const Matrix w = net.weight(l);
    const auto b = net.bias(l);
    std::vector<double> y(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
      double acc = b[r];
      for (std::size_t c = 0; c < w.cols; ++c) acc += w(r, c) * x[c];
      y[r] = l + 1 < net.num_weight_layers() ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace

TEST_CASE("rng streams are reproducible and uniform lies in [0, 1)") {
  Rng a(5), b(5), c(6);
  for (int k = 0; k < 100; ++k) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.next_u64() != c.next_u64());
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("matrix basics") {
  const Matrix id = Matrix::identity(3);
  CHECK(id(1, 1) == 1.0);
  CHECK(id(0, 1) == 0.0);
  const std::vector<double> x{1, 2, 3};
  CHECK(matvec(id, x) == x);
  Matrix m(1, 1, std::nan(""));
  CHECK_FALSE(m.all_finite());
}

TEST_CASE("forward: zero, identity and reference nets") {
  Mlp zero({3, 4, 2});
  CHECK(zero.parameter_count() == (3 + 1) * 4 + (4 + 1) * 2);
  for (double v : zero.forward(std::vector<double>{1.0, -2.0, 0.5})) CHECK(v == 0.0);

  Mlp id({2, 2});
  id.set_weight(0, Matrix::identity(2));
  CHECK(id.forward(std::vector<double>{1.0, 2.0}) == std::vector<double>{1.0, 2.0});

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = Mlp::init_uniform({5, 7, 6, 3}, rng);
    const auto x = random_vector(5, rng);
    CHECK(rel_error(net.forward(x), reference_forward(net, x)) < 1e-14);
  }

  CHECK_THROWS_AS(id.forward(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("init_uniform respects the fan-in bound") {
  Rng rng(9);
  Mlp net = Mlp::init_uniform({16, 8, 2}, rng);
  const Matrix w0 = net.weight(0);
  for (double v : w0.data) CHECK(std::abs(v) <= 0.25);
  for (double v : net.bias(1)) CHECK(std::abs(v) <= 1.0 / std::sqrt(8.0));
}

TEST_CASE("flatten then unflatten is the identity") {
  Rng rng(4);
  Mlp net = Mlp::init_uniform({3, 5, 2}, rng);
  const auto flat = net.flatten();
  Mlp other({3, 5, 2});
  other.unflatten(flat);
  CHECK(other.flatten() == flat);
  CHECK_THROWS_AS(other.unflatten(std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("backward: linear and zero seeds") {
  Mlp lin({1, 1});
  lin.params()[0] = 0.7;  // w
  const FlatGrad g = lin.backward(std::vector<double>{2.0}, std::vector<double>{1.0});
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 1.0);

  Rng rng(1);
  Mlp net = Mlp::init_uniform({4, 6, 3}, rng);
  const FlatGrad z = net.backward(random_vector(4, rng), std::vector<double>(3, 0.0));
  for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("backward matches central differences on 20 random nets") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    Mlp net = Mlp::init_uniform({6, 8, 5, 4}, rng);
    const auto x = random_vector(6, rng);
    const auto seed = random_vector(4, rng);
    const FlatGrad analytic = net.backward(x, seed);
    const FlatGrad fd = finite_diff_grad(
        [&](std::span<const double> p) {
          Mlp probe = net;
          probe.unflatten(p);
          const auto y = probe.forward(x);
          double s = 0.0;
          for (std::size_t k = 0; k < y.size(); ++k) s += seed[k] * y[k];
          return s;
        },
        net.params(), 1e-5);
    CHECK(rel_error(analytic.values, fd.values) < 1e-4);
  }
}

TEST_CASE("backward_accumulate adds scaled gradients") {
  Rng rng(8);
  Mlp net = Mlp::init_uniform({3, 4, 2}, rng);
  const auto x = random_vector(3, rng);
  const auto seed = random_vector(2, rng);
  const FlatGrad g = net.backward(x, seed);
  MlpTape tape;
  net.forward(x, tape);
  FlatGrad acc(net.parameter_count());
  net.backward_accumulate(tape, seed, acc.span(), 0.5);
  net.backward_accumulate(tape, seed, acc.span(), 1.5);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(acc[k] == doctest::Approx(2.0 * g[k]).epsilon(1e-14));
}

TEST_CASE("jvp equals the gradient dotted with the direction") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = Mlp::init_uniform({5, 6, 4, 3}, rng);
    const auto x = random_vector(5, rng);
    const auto dir = random_vector(net.parameter_count(), rng);
    MlpTape tape;
    net.forward(x, tape);
    const auto tangent = net.jvp(tape, dir);
    REQUIRE(tangent.size() == 3);
    for (std::size_t o = 0; o < 3; ++o) {
      std::vector<double> e(3, 0.0);
      e[o] = 1.0;
      const FlatGrad g = net.backward(x, e);
      double expect = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) expect += g[k] * dir[k];
      CHECK(tangent[o] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("softmax is a stable probability simplex point") {
  for (const std::vector<double>& logits :
       {std::vector<double>{0, 0, 0, 0, 0}, std::vector<double>{1000, 0}, std::vector<double>{-1000, 1000, 3},
        std::vector<double>{0.3, -2.0, 7.5}}) {
    const auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  for (double v : softmax(std::vector<double>(5, 0.0))) CHECK(v == doctest::Approx(0.2));
  CHECK(softmax(std::vector<double>{1000, 0})[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(softmax(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("softmax_sample frequencies follow the analytic probabilities") {
  Rng rng(77);
  const std::vector<double> logits{std::log(2.0), 0.0};
  int zeros = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const ActionSample s = softmax_sample(logits, rng);
    CHECK(s.log_prob == doctest::Approx(s.action == 0 ? std::log(2.0 / 3.0) : std::log(1.0 / 3.0)));
    zeros += s.action == 0;
  }
  CHECK(std::abs(zeros / static_cast<double>(n) - 2.0 / 3.0) < 0.01);

  Rng r2(1);
  const ActionSample sure = softmax_sample(std::vector<double>{1000, 0}, r2);
  CHECK(sure.action == 0);
  CHECK(sure.log_prob == doctest::Approx(0.0));
}

TEST_CASE("sgd_step arithmetic") {
  std::vector<double> p{1.0};
  CHECK(sgd_step(p, FlatGrad(std::vector<double>{2.0}), 0.1, Direction::kAscent));
  CHECK(p[0] == doctest::Approx(1.2));
  sgd_step(p, FlatGrad(std::vector<double>{2.0}), 0.1, Direction::kDescent);
  CHECK(p[0] == doctest::Approx(1.0));
  sgd_step(p, FlatGrad(std::vector<double>{5.0}), 0.0, Direction::kAscent);
  CHECK(p[0] == 1.0);

  std::vector<double> a{0.5, -0.5}, b{0.5, -0.5};
  const FlatGrad g1(std::vector<double>{0.25, 1.0}), g2(std::vector<double>{-0.75, 0.5});
  sgd_step(a, g1, 0.5, Direction::kAscent);
  sgd_step(a, g2, 0.5, Direction::kAscent);
  sgd_step(b, FlatGrad(std::vector<double>{-0.5, 1.5}), 0.5, Direction::kAscent);
  CHECK(a == b);

  std::vector<double> q{1.0, 2.0};
  const UpdateStatus st = sgd_step(q, FlatGrad(std::vector<double>{1.0, std::nan("")}), 0.1, Direction::kAscent);
  CHECK_FALSE(st.applied);
  CHECK_FALSE(st.diagnostic.empty());
  CHECK(q == std::vector<double>{1.0, 2.0});
}

TEST_CASE("adam_step behaviour") {
  std::vector<double> p{0.0, 0.0};
  AdamState st(2);
  adam_step(p, st, FlatGrad(std::vector<double>{3.0, -0.01}), 0.1);
  CHECK(p[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(0.1).epsilon(1e-4));

  std::vector<double> fixed{0.3};
  AdamState zs(1);
  for (int k = 0; k < 50; ++k) adam_step(fixed, zs, FlatGrad(std::vector<double>{0.0}), 0.1);
  CHECK(fixed[0] == 0.3);

  std::vector<double> x{1.0};
  AdamState xs(1);
  for (int k = 0; k < 100; ++k) adam_step(x, xs, FlatGrad(std::vector<double>{2.0 * x[0]}), 0.1);
  CHECK(std::abs(x[0]) < 0.05);
}

TEST_CASE("finite_diff_grad on a quadratic") {
  const std::vector<double> x{1.0, -2.0};
  const FlatGrad g = finite_diff_grad(
      [](std::span<const double> p) { return p[0] * p[0] + 3.0 * p[1]; }, x, 1e-5);
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(3.0));
}

TEST_CASE("updates are bit-deterministic") {
  auto run = [] {
    Rng rng(21);
    Mlp net = Mlp::init_uniform({4, 8, 2}, rng);
    AdamState st(net.parameter_count());
    for (int k = 0; k < 10; ++k) {
      const auto x = random_vector(4, rng);
      FlatGrad g = net.backward(x, std::vector<double>{1.0, -1.0});
      adam_step(net.params(), st, g, 0.01);
      sgd_step(net.params(), g, 0.01, Direction::kAscent);
    }
    return net.flatten();
  };
  CHECK(run() == run());
}
