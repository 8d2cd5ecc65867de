#include <cmath>
#include <fstream>
#include <cstdio>
#include <cstring>

#include "autodiff/checkpoint.hpp"
#include "autodiff/dists.hpp"
#include "autodiff/ops.hpp"
#include "autodiff/optim.hpp"
#include "autodiff/tape.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "doctest.h"
#include "fd.hpp"

using namespace racelab;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int> shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  double* d = t.mutable_data();
  for (int i = 0; i < t.size(); ++i) d[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("matmul forward basics") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor y = matmul(eye, a);
  CHECK(y.at({0, 0}) == 1.0);
  CHECK(y.at({0, 1}) == 2.0);
  CHECK(y.at({1, 0}) == 3.0);
  CHECK(y.at({1, 1}) == 4.0);

  Tensor row({1, 2}, {1, 2});
  Tensor col({2, 1}, {3, 4});
  CHECK(matmul(row, col).item() == 11.0);

  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({4, 5})), DimensionError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(7);
  Tensor a0 = random_tensor(rng, {3, 4});
  Tensor b0 = random_tensor(rng, {4, 2});

  Tape tape;
  Tensor a = tape.leaf(a0);
  Tensor b = tape.leaf(b0);
  Tensor loss = sum(matmul(a, b));
  auto grads = tape.backward(loss);

  auto f_a = [&](const std::vector<double>& x) {
    return sum(matmul(Tensor({3, 4}, x), b0)).item();
  };
  auto f_b = [&](const std::vector<double>& x) {
    return sum(matmul(a0, Tensor({4, 2}, x))).item();
  };
  std::vector<double> ga(grads.at(a).begin(), grads.at(a).end());
  std::vector<double> gb(grads.at(b).begin(), grads.at(b).end());
  CHECK(fd::max_rel_err(ga, fd::gradient(f_a, fd::to_vec(a0))) < 1e-6);
  CHECK(fd::max_rel_err(gb, fd::gradient(f_b, fd::to_vec(b0))) < 1e-6);
}

TEST_CASE("conv2d forward shapes and values") {
  Tensor x = Tensor::full({1, 3, 3}, 1.0);
  Tensor k = Tensor::full({1, 1, 3, 3}, 1.0);
  Tensor y = conv2d(x, k, 1);
  CHECK(y.shape() == std::vector<int>{1, 1, 1});
  CHECK(y.item() == 9.0);

  Tensor x2 = Tensor::full({1, 4, 4}, 1.0);
  Tensor k2 = Tensor::full({1, 1, 2, 2}, 1.0);
  CHECK(conv2d(x2, k2, 2).shape() == std::vector<int>{1, 2, 2});

  CHECK_THROWS_AS(conv2d(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), 1), DimensionError);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(11);
  Tensor x0 = random_tensor(rng, {2, 8, 8});
  Tensor k0 = random_tensor(rng, {3, 2, 3, 3});
  int stride = 2;

  Tape tape;
  Tensor x = tape.leaf(x0);
  Tensor k = tape.leaf(k0);
  auto grads = tape.backward(sum(conv2d(x, k, stride)));

  auto f_k = [&](const std::vector<double>& v) {
    return sum(conv2d(x0, Tensor({3, 2, 3, 3}, v), stride)).item();
  };
  auto f_x = [&](const std::vector<double>& v) {
    return sum(conv2d(Tensor({2, 8, 8}, v), k0, stride)).item();
  };
  std::vector<double> gk(grads.at(k).begin(), grads.at(k).end());
  std::vector<double> gx(grads.at(x).begin(), grads.at(x).end());
  CHECK(fd::max_rel_err(gk, fd::gradient(f_k, fd::to_vec(k0))) < 1e-6);
  CHECK(fd::max_rel_err(gx, fd::gradient(f_x, fd::to_vec(x0))) < 1e-6);
}

TEST_CASE("conv2d_transpose inverts conv2d shapes and is the exact adjoint") {
  // Shape inversion for stride 2, kernel 2 on even input sizes.
  Tensor x = Tensor::zeros({1, 8, 6});
  Tensor k = Tensor::zeros({2, 1, 2, 2});
  Tensor y = conv2d(x, k, 2);
  CHECK(y.shape() == std::vector<int>{2, 4, 3});
  CHECK(conv2d_transpose(y, k, 2).shape() == std::vector<int>{1, 8, 6});

  // <conv(x,K), y> == <x, conv_transpose(y,K)> for random operands.
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor xr = random_tensor(rng, {2, 8, 8});
    Tensor kr = random_tensor(rng, {3, 2, 2, 2});
    Tensor yr = random_tensor(rng, {3, 4, 4});
    Tensor cx = conv2d(xr, kr, 2);
    Tensor ty = conv2d_transpose(yr, kr, 2);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < cx.size(); ++i) lhs += cx[i] * yr[i];
    for (int i = 0; i < ty.size(); ++i) rhs += ty[i] * xr[i];
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("conv2d_transpose gradients match finite differences") {
  Rng rng(17);
  Tensor y0 = random_tensor(rng, {3, 4, 4});
  Tensor k0 = random_tensor(rng, {3, 2, 2, 2});

  Tape tape;
  Tensor y = tape.leaf(y0);
  Tensor k = tape.leaf(k0);
  auto grads = tape.backward(sum(conv2d_transpose(y, k, 2)));

  auto f_y = [&](const std::vector<double>& v) {
    return sum(conv2d_transpose(Tensor({3, 4, 4}, v), k0, 2)).item();
  };
  auto f_k = [&](const std::vector<double>& v) {
    return sum(conv2d_transpose(y0, Tensor({3, 2, 2, 2}, v), 2)).item();
  };
  std::vector<double> gy(grads.at(y).begin(), grads.at(y).end());
  std::vector<double> gk(grads.at(k).begin(), grads.at(k).end());
  CHECK(fd::max_rel_err(gy, fd::gradient(f_y, fd::to_vec(y0))) < 1e-6);
  CHECK(fd::max_rel_err(gk, fd::gradient(f_k, fd::to_vec(k0))) < 1e-6);
}

TEST_CASE("elementwise forward values") {
  CHECK(tanh(Tensor::scalar(0.0)).item() == 0.0);
  CHECK(softplus(Tensor::scalar(0.0)).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(log(Tensor::scalar(-1.0)), DomainError);
  CHECK_THROWS_AS(log(Tensor::scalar(0.0)), DomainError);
  CHECK_THROWS_AS(add(Tensor({2}), Tensor({3})), DimensionError);
  CHECK_THROWS_AS(div(Tensor::scalar(1.0), Tensor::scalar(0.0)), DomainError);
}

TEST_CASE("every elementwise op passes finite-difference checks at random points") {
  Rng rng(23);
  const int n = 64;

  auto check_unary = [&](const char* name, Tensor (*op)(const Tensor&), double lo,
                         double hi, bool avoid_zero) {
    CAPTURE(name);
    Tensor x0(std::vector<int>{n});
    {
      double* d = x0.mutable_data();
      for (int i = 0; i < n; ++i) {
        d[i] = rng.uniform(lo, hi);
        if (avoid_zero && std::abs(d[i]) < 1e-2) d[i] += d[i] >= 0 ? 2e-2 : -2e-2;
      }
    }
    Tape tape;
    Tensor x = tape.leaf(x0);
    auto grads = tape.backward(sum(op(x)));
    auto f = [&](const std::vector<double>& v) {
      return sum(op(Tensor(std::vector<int>{n}, v))).item();
    };
    std::vector<double> g(grads.at(x).begin(), grads.at(x).end());
    CHECK(fd::max_rel_err(g, fd::gradient(f, fd::to_vec(x0))) < 1e-6);
  };

  check_unary("tanh", &racelab::tanh, -3, 3, false);
  check_unary("relu", &racelab::relu, -2, 2, true);  // keep clear of the kink
  check_unary("softplus", &racelab::softplus, -5, 5, false);
  check_unary("exp", &racelab::exp, -2, 2, false);
  check_unary("log", &racelab::log, 0.1, 4.0, false);
  check_unary("sigmoid", &racelab::sigmoid, -4, 4, false);
  check_unary("neg", &racelab::neg, -2, 2, false);
  check_unary("square", &racelab::square, -2, 2, false);

  auto check_binary = [&](const char* name,
                          Tensor (*op)(const Tensor&, const Tensor&), double lo,
                          double hi) {
    CAPTURE(name);
    Tensor a0 = random_tensor(rng, {n}, lo, hi);
    Tensor b0 = random_tensor(rng, {n}, lo, hi);
    Tape tape;
    Tensor a = tape.leaf(a0);
    Tensor b = tape.leaf(b0);
    auto grads = tape.backward(sum(op(a, b)));
    auto f_a = [&](const std::vector<double>& v) {
      return sum(op(Tensor(std::vector<int>{n}, v), b0)).item();
    };
    auto f_b = [&](const std::vector<double>& v) {
      return sum(op(a0, Tensor(std::vector<int>{n}, v))).item();
    };
    std::vector<double> ga(grads.at(a).begin(), grads.at(a).end());
    std::vector<double> gb(grads.at(b).begin(), grads.at(b).end());
    CHECK(fd::max_rel_err(ga, fd::gradient(f_a, fd::to_vec(a0))) < 1e-6);
    CHECK(fd::max_rel_err(gb, fd::gradient(f_b, fd::to_vec(b0))) < 1e-6);
  };

  check_binary("add", &racelab::add, -2, 2);
  check_binary("sub", &racelab::sub, -2, 2);
  check_binary("mul", &racelab::mul, -2, 2);
  check_binary("div", &racelab::div, 0.5, 3.0);

  // affine-scale
  {
    Tensor x0 = random_tensor(rng, {n});
    Tape tape;
    Tensor x = tape.leaf(x0);
    auto grads = tape.backward(sum(affine(x, 2.5, -0.75)));
    auto f = [&](const std::vector<double>& v) {
      return sum(affine(Tensor(std::vector<int>{n}, v), 2.5, -0.75)).item();
    };
    std::vector<double> g(grads.at(x).begin(), grads.at(x).end());
    CHECK(fd::max_rel_err(g, fd::gradient(f, fd::to_vec(x0))) < 1e-6);
  }

  // scalar <-> tensor broadcast gradient
  {
    Tensor a0 = random_tensor(rng, {n});
    Tensor s0 = Tensor::scalar(0.7);
    Tape tape;
    Tensor a = tape.leaf(a0);
    Tensor s = tape.leaf(s0);
    auto grads = tape.backward(sum(mul(a, s)));
    auto f_s = [&](const std::vector<double>& v) {
      return sum(mul(a0, Tensor({1}, v))).item();
    };
    std::vector<double> gs(grads.at(s).begin(), grads.at(s).end());
    CHECK(fd::max_rel_err(gs, fd::gradient(f_s, fd::to_vec(s0))) < 1e-6);
  }
}

TEST_CASE("structural ops propagate gradients") {
  Rng rng(29);
  Tensor a0 = random_tensor(rng, {3, 2});
  Tensor b0 = random_tensor(rng, {3, 4});
  Tensor v0 = random_tensor(rng, {6});

  Tape tape;
  Tensor a = tape.leaf(a0);
  Tensor b = tape.leaf(b0);
  Tensor v = tape.leaf(v0);
  Tensor cat = concat_cols({a, b});
  CHECK(cat.shape() == std::vector<int>{3, 6});
  Tensor biased = add_rowvec(cat, v);
  Tensor part = slice_cols(biased, 1, 5);
  Tensor flat = reshape(part, {12});
  auto grads = tape.backward(sum(mul(flat, flat)));

  auto rebuild = [&](const Tensor& aa, const Tensor& bb, const Tensor& vv) {
    Tensor c = concat_cols({aa, bb});
    Tensor bi = add_rowvec(c, vv);
    Tensor pp = slice_cols(bi, 1, 5);
    Tensor ff = reshape(pp, {12});
    return sum(mul(ff, ff)).item();
  };
  auto f_a = [&](const std::vector<double>& x) { return rebuild(Tensor({3, 2}, x), b0, v0); };
  auto f_b = [&](const std::vector<double>& x) { return rebuild(a0, Tensor({3, 4}, x), v0); };
  auto f_v = [&](const std::vector<double>& x) { return rebuild(a0, b0, Tensor({6}, x)); };

  std::vector<double> ga(grads.at(a).begin(), grads.at(a).end());
  std::vector<double> gb(grads.at(b).begin(), grads.at(b).end());
  std::vector<double> gv(grads.at(v).begin(), grads.at(v).end());
  CHECK(fd::max_rel_err(ga, fd::gradient(f_a, fd::to_vec(a0))) < 1e-6);
  CHECK(fd::max_rel_err(gb, fd::gradient(f_b, fd::to_vec(b0))) < 1e-6);
  CHECK(fd::max_rel_err(gv, fd::gradient(f_v, fd::to_vec(v0))) < 1e-6);
}

TEST_CASE("reparameterize") {
  DiagGaussian d{Tensor::from({1.0, -2.0}), Tensor::from({0.5, 1.5})};
  Tensor zero_noise = Tensor::zeros({2});
  Tensor out = reparameterize(d, zero_noise);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == -2.0);

  DiagGaussian unit{Tensor::from({0.0}), Tensor::from({1.0})};
  CHECK(reparameterize(unit, Tensor::from({1.5})).item() == 1.5);

  DiagGaussian bad{Tensor::from({0.0}), Tensor::from({0.0})};
  CHECK_THROWS_AS(reparameterize(bad, Tensor::from({0.0})), DomainError);

  // d(output)/d(stddev) == noise
  Rng rng(31);
  Tensor mean0 = random_tensor(rng, {4});
  Tensor std0 = random_tensor(rng, {4}, 0.2, 2.0);
  Tensor noise = random_tensor(rng, {4});
  Tape tape;
  Tensor m = tape.leaf(mean0);
  Tensor s = tape.leaf(std0);
  auto grads = tape.backward(sum(reparameterize({m, s}, noise)));
  auto f_s = [&](const std::vector<double>& v) {
    return sum(reparameterize({mean0, Tensor({4}, v)}, noise)).item();
  };
  std::vector<double> gs(grads.at(s).begin(), grads.at(s).end());
  CHECK(fd::max_rel_err(gs, fd::gradient(f_s, fd::to_vec(std0))) < 1e-6);
  for (int i = 0; i < 4; ++i) CHECK(gs[i] == doctest::Approx(noise[i]).epsilon(1e-12));
  // gradient flows to mean, never to noise
  std::vector<double> gm(grads.at(m).begin(), grads.at(m).end());
  for (int i = 0; i < 4; ++i) CHECK(gm[i] == 1.0);
}

TEST_CASE("gaussian_kl closed form and quadrature oracle") {
  DiagGaussian p{Tensor::from({0.3, -0.7}), Tensor::from({1.1, 0.4})};
  CHECK(gaussian_kl(p, p).item() == doctest::Approx(0.0).epsilon(1e-15));

  DiagGaussian a{Tensor::from({1.0}), Tensor::from({1.0})};
  DiagGaussian b{Tensor::from({0.0}), Tensor::from({1.0})};
  CHECK(gaussian_kl(a, b).item() == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(gaussian_kl(a, DiagGaussian{Tensor::from({0.0}), Tensor::from({-1.0})}),
                  DomainError);
  CHECK_THROWS_AS(
      gaussian_kl(a, DiagGaussian{Tensor::from({0.0, 0.0}), Tensor::from({1.0, 1.0})}),
      DimensionError);

  // Numerical integration of p * log(p/q) on 20 random 1-D cases.
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    double mp = rng.uniform(-3, 3), sp = rng.uniform(0.3, 2.5);
    double mq = rng.uniform(-3, 3), sq = rng.uniform(0.3, 2.5);
    DiagGaussian post{Tensor::from({mp}), Tensor::from({sp})};
    DiagGaussian prior{Tensor::from({mq}), Tensor::from({sq})};
    double analytic = gaussian_kl(post, prior).item();

    double smax = std::max(sp, sq);
    double lo = std::min(mp, mq) - 14 * smax, hi = std::max(mp, mq) + 14 * smax;
    const int steps = 40000;  // Simpson, even count
    double h = (hi - lo) / steps;
    auto integrand = [&](double x) {
      double lp = -0.5 * std::pow((x - mp) / sp, 2) - std::log(sp * std::sqrt(2 * M_PI));
      double lq = -0.5 * std::pow((x - mq) / sq, 2) - std::log(sq * std::sqrt(2 * M_PI));
      return std::exp(lp) * (lp - lq);
    };
    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < steps; ++i) acc += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    double numeric = acc * h / 3.0;
    CHECK(std::abs(analytic - numeric) < 1e-6);
  }
}

TEST_CASE("gaussian_kl is nonnegative and zero only at equality") {
  Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    int n = rng.uniform_int(1, 5);
    Tensor mp = random_tensor(rng, {n}, -2, 2);
    Tensor sp = random_tensor(rng, {n}, 0.1, 3.0);
    Tensor mq = random_tensor(rng, {n}, -2, 2);
    Tensor sq = random_tensor(rng, {n}, 0.1, 3.0);
    double kl = gaussian_kl({mp, sp}, {mq, sq}).item();
    CHECK(kl >= -1e-12);
  }
  Tensor m = Tensor::from({0.25, -1.5});
  Tensor s = Tensor::from({0.8, 1.2});
  CHECK(std::abs(gaussian_kl({m, s}, {m, s}).item()) <= 1e-12);
}

TEST_CASE("gaussian_nll closed form and gradient") {
  Tensor t1 = Tensor::from({0.5});
  CHECK(gaussian_nll(t1, t1, 1.0).item() ==
        doctest::Approx(0.5 * std::log(2 * M_PI)).epsilon(1e-12));

  Tensor mean = Tensor::from({2.5});
  Tensor target = Tensor::from({0.5});
  CHECK(gaussian_nll(target, mean, 1.0).item() ==
        doctest::Approx(2.0 + 0.9189385332046727).epsilon(1e-9));

  CHECK_THROWS_AS(gaussian_nll(Tensor({2}), Tensor({3}), 1.0), DimensionError);

  Rng rng(43);
  Tensor tgt = random_tensor(rng, {5});
  Tensor mu0 = random_tensor(rng, {5});
  Tape tape;
  Tensor mu = tape.leaf(mu0);
  auto grads = tape.backward(gaussian_nll(tgt, mu, 1.0));
  auto f = [&](const std::vector<double>& v) {
    return gaussian_nll(tgt, Tensor({5}, v), 1.0).item();
  };
  std::vector<double> g(grads.at(mu).begin(), grads.at(mu).end());
  CHECK(fd::max_rel_err(g, fd::gradient(f, fd::to_vec(mu0))) < 1e-6);
  // gradient wrt mean equals (mean - target) for unit variance
  for (int i = 0; i < 5; ++i)
    CHECK(g[i] == doctest::Approx(mu0[i] - tgt[i]).epsilon(1e-12));
}

TEST_CASE("bernoulli_nll stability and gradient") {
  CHECK(bernoulli_nll(Tensor::from({1.0}), Tensor::from({30.0})).item() <= 1e-12);
  CHECK(bernoulli_nll(Tensor::from({1.0}), Tensor::from({0.0})).item() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // No overflow for very large logits.
  CHECK(std::isfinite(bernoulli_nll(Tensor::from({0.0}), Tensor::from({1e4})).item()));
  CHECK_THROWS_AS(bernoulli_nll(Tensor::from({0.5}), Tensor::from({0.0})), DomainError);

  Rng rng(47);
  Tensor target({6}, {1, 0, 1, 1, 0, 0});
  Tensor l0 = random_tensor(rng, {6}, -4, 4);
  Tape tape;
  Tensor l = tape.leaf(l0);
  auto grads = tape.backward(bernoulli_nll(target, l));
  auto f = [&](const std::vector<double>& v) {
    return bernoulli_nll(target, Tensor({6}, v)).item();
  };
  std::vector<double> g(grads.at(l).begin(), grads.at(l).end());
  CHECK(fd::max_rel_err(g, fd::gradient(f, fd::to_vec(l0))) < 1e-6);
  for (int i = 0; i < 6; ++i) {
    double sig = 1.0 / (1.0 + std::exp(-l0[i]));
    CHECK(g[i] == doctest::Approx(sig - target[i]).epsilon(1e-9));
  }
}

TEST_CASE("backward basics and tape state rules") {
  Rng rng(53);
  Tensor w0 = random_tensor(rng, {2, 3});
  {
    Tape tape;
    Tensor w = tape.leaf(w0);
    auto grads = tape.backward(sum(w));
    for (double g : grads.at(w)) CHECK(g == 1.0);
  }
  {
    Tape tape;
    Tensor w = tape.leaf(Tensor::from({3.0}));
    auto grads = tape.backward(sum(mul(w, w)));
    CHECK(grads.at(w)[0] == 6.0);
  }
  {
    Tape tape;
    Tensor w = tape.leaf(w0);
    Tensor loss_vec = mul(w, w);
    CHECK_THROWS_AS(tape.backward(loss_vec), ContractError);  // non-scalar
  }
  {
    Tape tape;
    Tensor w = tape.leaf(w0);
    Tensor loss = sum(w);
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), StateError);  // consumed
  }
  {
    // Detached tensors act as constants and never receive gradient.
    Tape tape;
    Tensor w = tape.leaf(w0);
    Tensor c = random_tensor(rng, {2, 3});
    Tensor loss = sum(mul(w, c));
    auto grads = tape.backward(loss);
    CHECK(grads.has(w));
  }
}

TEST_CASE("composite backward through matmul, tanh and conv2d") {
  Rng rng(59);
  Tensor x0 = random_tensor(rng, {1, 2, 6, 6});
  Tensor k0 = random_tensor(rng, {2, 2, 2, 2});
  Tensor w0 = random_tensor(rng, {18, 4});

  auto forward = [&](const Tensor& x, const Tensor& k, const Tensor& w) {
    Tensor c = conv2d(x, k, 2);              // [1,2,3,3]
    Tensor flat = reshape(c, {1, 18});
    Tensor h = racelab::tanh(matmul(flat, w));
    return sum(h);
  };

  Tape tape;
  Tensor x = tape.leaf(x0);
  Tensor k = tape.leaf(k0);
  Tensor w = tape.leaf(w0);
  auto grads = tape.backward(forward(x, k, w));

  auto f_x = [&](const std::vector<double>& v) {
    return forward(Tensor({1, 2, 6, 6}, v), k0, w0).item();
  };
  auto f_k = [&](const std::vector<double>& v) {
    return forward(x0, Tensor({2, 2, 2, 2}, v), w0).item();
  };
  auto f_w = [&](const std::vector<double>& v) {
    return forward(x0, k0, Tensor({18, 4}, v)).item();
  };
  std::vector<double> gx(grads.at(x).begin(), grads.at(x).end());
  std::vector<double> gk(grads.at(k).begin(), grads.at(k).end());
  std::vector<double> gw(grads.at(w).begin(), grads.at(w).end());
  CHECK(fd::max_rel_err(gx, fd::gradient(f_x, fd::to_vec(x0))) < 1e-5);
  CHECK(fd::max_rel_err(gk, fd::gradient(f_k, fd::to_vec(k0))) < 1e-5);
  CHECK(fd::max_rel_err(gw, fd::gradient(f_w, fd::to_vec(w0))) < 1e-5);
}

TEST_CASE("backward is bit-exact across repeated identical passes") {
  Rng rng(61);
  Tensor x0 = random_tensor(rng, {1, 2, 6, 6});
  Tensor k0 = random_tensor(rng, {2, 2, 2, 2});

  auto run = [&]() {
    Tape tape;
    Tensor x = tape.leaf(x0);
    Tensor k = tape.leaf(k0);
    Tensor loss = sum(racelab::tanh(conv2d(x, k, 2)));
    auto grads = tape.backward(loss);
    std::vector<double> out(grads.at(x).begin(), grads.at(x).end());
    auto gk = grads.at(k);
    out.insert(out.end(), gk.begin(), gk.end());
    return out;
  };
  auto g1 = run();
  auto g2 = run();
  REQUIRE(g1.size() == g2.size());
  CHECK(std::memcmp(g1.data(), g2.data(), g1.size() * sizeof(double)) == 0);
}

TEST_CASE("adam_step properties") {
  // Zero gradient leaves parameters unchanged.
  std::vector<double> p{1.0, -2.0}, g{0.0, 0.0}, m(2, 0.0), v(2, 0.0);
  adam_step(p, g, m, v, 1, 0.1, 0.9, 0.999, 1e-7);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -2.0);

  // First step moves by ~ -lr * sign(g) regardless of magnitude.
  for (double mag : {1e-4, 1.0, 1e4}) {
    std::vector<double> pp{0.0}, gg{mag}, mm(1, 0.0), vv(1, 0.0);
    adam_step(pp, gg, mm, vv, 1, 0.01, 0.9, 0.999, 1e-7);
    CHECK(pp[0] == doctest::Approx(-0.01).epsilon(1e-3));
  }

  // 100 steps on f(w) = (w-3)^2 from w=0 with lr=0.1 approaches 3; the same
  // recursion run directly is the oracle.
  auto run_adam = [](double w0, int steps) {
    double w = w0, m1 = 0, v1 = 0;
    for (int t = 1; t <= steps; ++t) {
      double grad = 2.0 * (w - 3.0);
      m1 = 0.9 * m1 + 0.1 * grad;
      v1 = 0.999 * v1 + 0.001 * grad * grad;
      double mhat = m1 / (1 - std::pow(0.9, t));
      double vhat = v1 / (1 - std::pow(0.999, t));
      w -= 0.1 * mhat / (std::sqrt(vhat) + 1e-7);
    }
    return w;
  };
  double oracle_w = run_adam(0.0, 100);
  CHECK(std::abs(oracle_w - 3.0) < 0.5);

  std::vector<double> w{0.0}, ms(1, 0.0), vs(1, 0.0);
  for (int t = 1; t <= 100; ++t) {
    std::vector<double> grad{2.0 * (w[0] - 3.0)};
    adam_step(w, grad, ms, vs, t, 0.1, 0.9, 0.999, 1e-7);
  }
  CHECK(w[0] == doctest::Approx(oracle_w).epsilon(1e-12));
  CHECK(std::abs(w[0] - 3.0) < 0.5);
}

TEST_CASE("Adam optimizer over Variables with shared use") {
  Rng rng(67);
  Variable w("w", random_tensor(rng, {3}));
  Adam opt({&w}, {.lr = 0.05, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-7, .clip_norm = 0});
  // Minimize sum((w - t)^2); w referenced twice in the loss to exercise the
  // single-leaf-per-tape path.
  Tensor target = Tensor::from({1.0, -1.0, 0.5});
  for (int it = 0; it < 400; ++it) {
    Tape tape;
    Tensor wt = w.use(tape);
    Tensor wt2 = w.use(tape);
    Tensor diff = sub(affine(add(wt, wt2), 0.5, 0.0), target);
    auto grads = tape.backward(sum(mul(diff, diff)));
    opt.step(grads);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(w.value()[i] == doctest::Approx(target[i]).epsilon(1e-3));
}

TEST_CASE("checkpoint container round-trips and rejects bad files") {
  Rng rng(71);
  Checkpoint ckpt;
  ckpt.meta["variant"] = "multimodal_poe";
  ckpt.meta["note"] = "unit test";
  ckpt.tensors.emplace_back("a/weight", random_tensor(rng, {3, 4}));
  ckpt.tensors.emplace_back("b/bias", random_tensor(rng, {7}));

  std::string path = "test_ckpt.drck";
  save_checkpoint(path, ckpt);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.meta.at("variant") == "multimodal_poe");
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensors[0].first == "a/weight");
  CHECK(back.tensors[0].second.shape() == std::vector<int>{3, 4});
  for (int i = 0; i < 12; ++i)
    CHECK(back.tensors[0].second[i] == ckpt.tensors[0].second[i]);

  // Unknown version is rejected.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write("DRCK", 4);
    uint32_t bad = 999;
    out.write(reinterpret_cast<const char*>(&bad), 4);
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write("NOPE", 4);
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  std::remove(path.c_str());
}
