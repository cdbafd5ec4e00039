#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "optnet/math/activation.hpp"
#include "optnet/math/errors.hpp"
#include "optnet/math/init.hpp"
#include "optnet/math/matrix.hpp"
#include "optnet/math/normal.hpp"
#include "optnet/math/parallel.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/oracle/oracles.hpp"

using namespace optnet;

namespace {

double mean_of(const Mat& m) {
  return std::accumulate(m.values().begin(), m.values().end(), 0.0) / static_cast<double>(m.size());
}

double variance_of(const Mat& m) {
  const double mu = mean_of(m);
  double s = 0.0;
  for (double v : m.values()) s += (v - mu) * (v - mu);
  return s / static_cast<double>(m.size() - 1);
}

}  // namespace

TEST_CASE("activation examples") {
  CHECK(apply_activation(Activation::Sigmoid, Vec{0.0})[0] == 0.5);
  CHECK(apply_activation(Activation::ReLU, Vec{-2.0, 3.0}) == Vec{0.0, 3.0});
  CHECK(apply_activation(Activation::GELU, Vec{0.0})[0] == 0.0);
  const Vec sm = apply_activation(Activation::Softmax, Vec{1.0, 1.0, 1.0});
  for (double v : sm) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK(activation_derivative(Activation::Sigmoid, Vec{0.0})[0] == 0.25);
  CHECK(activation_derivative(Activation::Tanh, Vec{0.0})[0] == 1.0);
  CHECK(activation_derivative(Activation::ReLU, Vec{0.0})[0] == 0.0);
}

TEST_CASE("activation errors") {
  CHECK_THROWS_AS(activation_derivative(Activation::Softmax, Vec{1.0}), UnsupportedError);
  CHECK_THROWS_AS(apply_activation(Activation::Tanh, Vec{NAN}), DomainError);
  CHECK_THROWS_AS(apply_activation(Activation::Softmax, Vec{1.0, INFINITY}), DomainError);
  CHECK_THROWS_AS(parse_activation("swish"), UsageError);
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::ReLU, Activation::GELU,
                 Activation::Softmax, Activation::Identity}) {
    CHECK(parse_activation(to_string(a)) == a);
  }
}

TEST_CASE("activation ranges") {
  RngStream rng(5);
  Vec x(1000);
  for (double& v : x) v = 40.0 * rng.uniform() - 20.0;
  for (double v : apply_activation(Activation::Sigmoid, x)) CHECK((v >= 0.0 && v <= 1.0));
  for (double v : apply_activation(Activation::Tanh, x)) CHECK((v >= -1.0 && v <= 1.0));
  for (double v : apply_activation(Activation::ReLU, x)) CHECK(v >= 0.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec z(7);
    for (double& v : z) v = 1000.0 * rng.normal();
    const Vec s = apply_activation(Activation::Softmax, z);
    CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) <= 1e-12);
  }
  // Interior values stay strictly inside the open ranges.
  CHECK(apply_activation(Activation::Sigmoid, Vec{3.0})[0] < 1.0);
  CHECK(apply_activation(Activation::Tanh, Vec{-3.0})[0] > -1.0);
}

TEST_CASE("activation derivatives match finite differences") {
  RngStream rng(9);
  for (auto a : {Activation::Sigmoid, Activation::Tanh, Activation::ReLU, Activation::GELU,
                 Activation::Identity}) {
    for (int i = 0; i < 100; ++i) {
      double x = 8.0 * rng.uniform() - 4.0;
      if (a == Activation::ReLU && std::abs(x) < 1e-3) x = 0.5;
      const double h = 1e-5;
      const double fd = (activate(a, x + h) - activate(a, x - h)) / (2 * h);
      const double d = activate_derivative(a, x);
      const double rel = std::abs(fd - d) / std::max({std::abs(fd), std::abs(d), 1e-12});
      CHECK(rel <= 1e-6);
    }
  }
}

TEST_CASE("std_normal_cdf") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  const double ref = static_cast<double>(oracle::normal_cdf(1.959963985L));
  CHECK(std::abs(std_normal_cdf(1.959963985) - ref) <= 1e-9);
  CHECK(std::abs(std_normal_cdf(1.959963985) - 0.975) <= 1e-9);
  const double tail = std_normal_cdf(-8.0);
  CHECK(tail <= 1e-15);
  CHECK(tail == doctest::Approx(static_cast<double>(oracle::normal_cdf(-8.0L))).epsilon(1e-12));

  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = -6.0 + 12.0 * i / 1000.0;
    const double p = std_normal_cdf(x);
    CHECK(p > prev);
    prev = p;
    CHECK(std::abs(p + std_normal_cdf(-x) - 1.0) <= 1e-14);
  }
}

TEST_CASE("erf oracle is self-consistent") {
  for (long double x : {0.5L, 1.0L, 2.0L, 3.0L, 3.5L}) {
    const long double cf = oracle::erfc_continued_fraction(x);
    const long double series = 1.0L - oracle::erf_series(x);
    CHECK(static_cast<double>(std::fabs(cf - series)) <= 1e-15);
  }
  CHECK(static_cast<double>(oracle::erf_series(0.0L)) == 0.0);
}

TEST_CASE("initializers") {
  RngStream a(1);
  const Mat one = init_glorot(1, 1, a);
  CHECK(one.rows() == 1);
  CHECK(one.cols() == 1);
  CHECK(std::isfinite(one(0, 0)));
  RngStream b(1);
  CHECK(init_he(1, 1, b).size() == 1);

  RngStream g(3);
  const Mat gl = init_glorot(100, 100, g);
  CHECK(gl.rows() == 100);
  CHECK(std::abs(variance_of(gl) - 0.01) <= 0.15 * 0.01);

  RngStream h(3);
  const Mat he = init_he(200, 50, h);
  CHECK(he.rows() == 50);
  CHECK(he.cols() == 200);
  CHECK(std::abs(variance_of(he) - 0.01) <= 0.15 * 0.01);

  RngStream x(8), y(8);
  CHECK(init_glorot(30, 20, x) == init_glorot(30, 20, y));
  RngStream u(8), v(8);
  CHECK(init_he(30, 20, u) == init_he(30, 20, v));

  for (auto init : {Initializer::GlorotNormal, Initializer::HeNormal}) {
    RngStream r(17);
    const Mat big = init_weights(init, 500, 500, r);
    const double se = std::sqrt(variance_of(big) / static_cast<double>(big.size()));
    CHECK(std::abs(mean_of(big)) <= 3.0 * se);
  }

  RngStream z(1);
  CHECK_THROWS_AS(init_glorot(0, 3, z), DimensionError);
  CHECK_THROWS_AS(init_he(3, 0, z), DimensionError);
}

TEST_CASE("affine") {
  CHECK(affine(Mat::identity(2), Vec{1, 2}, Vec{0, 0}) == Vec{1, 2});
  CHECK(affine(Mat(1, 3), Vec{5, -2, 7}, Vec{3}) == Vec{3});
  CHECK(affine(Mat(2, 2, Vec{1, 2, 3, 4}), Vec{1, 1}, Vec{1, 1}) == Vec{4, 8});
  CHECK_THROWS_AS(affine(Mat(2, 2), Vec{1, 1, 1}, Vec{0, 0}), DimensionError);
  CHECK_THROWS_AS(affine(Mat(2, 2), Vec{1, 1}, Vec{0}), DimensionError);
  CHECK_THROWS_AS(Mat(2, 2, Vec{1, 2, 3}), DimensionError);
}

TEST_CASE("rng streams") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  // Draw k is splitmix64(seed + (k + 1) * golden).
  RngStream c(7);
  CHECK(c.next_u64() == splitmix64(7 + 0x9E3779B97F4A7C15ULL));
  CHECK(c.next_u64() == splitmix64(7 + 2 * 0x9E3779B97F4A7C15ULL));

  RngStream d(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = d.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(d.uniform_open() > 0.0);
    CHECK(d.below(10) < 10);
  }
  CHECK(RngStream(1).child(3).next_u64() == RngStream(1).child(3).next_u64());
  CHECK(RngStream(1).child(3).next_u64() != RngStream(1).child(4).next_u64());
  CHECK(derive_seed(5, "test") != derive_seed(5, "resample"));
  CHECK(derive_seed(5, "test") == derive_seed(5, "test"));

  std::vector<int> items(50);
  std::iota(items.begin(), items.end(), 0);
  RngStream s(2);
  s.shuffle(std::span<int>(items));
  std::vector<int> sorted = items;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, 4);
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw DomainError("boom");
  }, 3), DomainError);
}
