#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ccmp/gaussian.hpp"
#include "oracles.hpp"

using namespace ccmp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

oracle::Moments quad_moments(const Gaussian1D& g, double lo, double hi,
                             double tol = 1e-12) {
  return oracle::moments_by_quadrature([&](double x) { return g.pdf(x); }, lo,
                                       hi, g.mean(), g.sd(), tol);
}
}  // namespace

TEST_CASE("construction validates and floors", "[gaussian]") {
  CHECK_THROWS_AS(Gaussian1D(0.0, 0.0), ModelError);
  CHECK_THROWS_AS(Gaussian1D(0.0, -1.0), ModelError);
  CHECK_THROWS_AS(Gaussian1D(std::nan(""), 1.0), ModelError);
  CHECK_THROWS_AS(Gaussian1D(0.0, kInf), ModelError);
  CHECK(Gaussian1D(0.0, 1e-20).variance() == kVarianceFloor);
}

TEST_CASE("canonical/moment round trip", "[gaussian]") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mean_dist(-50.0, 50.0);
  std::uniform_real_distribution<double> log_var(-6.0 * std::log(10.0),
                                                 6.0 * std::log(10.0));
  for (int i = 0; i < 2000; ++i) {
    const Gaussian1D g(mean_dist(rng), std::exp(log_var(rng)));
    const Gaussian1D back =
        Gaussian1D::from_canonical(g.precision(), g.weighted_mean());
    CHECK(back.mean() == Catch::Approx(g.mean()).epsilon(1e-14).margin(1e-300));
    CHECK(back.variance() == Catch::Approx(g.variance()).epsilon(1e-14));
  }
}

TEST_CASE("multiply matches closed forms", "[gaussian]") {
  const Gaussian1D standard_product = multiply(Gaussian1D(0, 1), Gaussian1D(0, 1));
  CHECK(standard_product.mean() == Catch::Approx(0.0).margin(1e-15));
  CHECK(standard_product.variance() == Catch::Approx(0.5));

  const Gaussian1D midpoint = multiply(Gaussian1D(1, 2), Gaussian1D(3, 2));
  CHECK(midpoint.mean() == Catch::Approx(2.0));
  CHECK(midpoint.variance() == Catch::Approx(1.0));
}

TEST_CASE("multiply matches the quadrature-normalized product", "[gaussian]") {
  const Gaussian1D a(0.3, 0.7);
  const Gaussian1D b(-1.1, 2.5);
  const Gaussian1D product = multiply(a, b);
  const auto m = oracle::moments_by_quadrature(
      [&](double x) { return a.pdf(x) * b.pdf(x); }, -oracle::kInf,
      oracle::kInf, product.mean(), product.sd(), 1e-14);
  CHECK(product.mean() == Catch::Approx(m.mean).margin(1e-12));
  CHECK(product.variance() == Catch::Approx(m.variance).margin(1e-12));
}

TEST_CASE("multiply is commutative and associative", "[gaussian]") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> mean_dist(-10.0, 10.0);
  std::uniform_real_distribution<double> log_var(std::log(1e-6), std::log(1e6));
  for (int i = 0; i < 1000; ++i) {
    const Gaussian1D a(mean_dist(rng), std::exp(log_var(rng)));
    const Gaussian1D b(mean_dist(rng), std::exp(log_var(rng)));
    const Gaussian1D c(mean_dist(rng), std::exp(log_var(rng)));
    const Gaussian1D ab = multiply(a, b);
    const Gaussian1D ba = multiply(b, a);
    CHECK(ab.mean() == Catch::Approx(ba.mean()).epsilon(1e-12).margin(1e-12));
    CHECK(ab.variance() == Catch::Approx(ba.variance()).epsilon(1e-12));
    const Gaussian1D left = multiply(ab, c);
    const Gaussian1D right = multiply(a, multiply(b, c));
    CHECK(left.mean() ==
          Catch::Approx(right.mean()).epsilon(1e-12).margin(1e-12));
    CHECK(left.variance() == Catch::Approx(right.variance()).epsilon(1e-12));
  }
}

TEST_CASE("divide inverts multiply", "[gaussian]") {
  const Gaussian1D a(0.4, 1.3);
  const Gaussian1D b(-2.0, 0.6);
  const CanonicalGaussian q = divide(multiply(a, b), b);
  REQUIRE(q.is_proper());
  const Gaussian1D back = q.to_gaussian();
  CHECK(back.mean() == Catch::Approx(a.mean()).epsilon(1e-12));
  CHECK(back.variance() == Catch::Approx(a.variance()).epsilon(1e-12));

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> mean_dist(-10.0, 10.0);
  std::uniform_real_distribution<double> log_var(std::log(1e-3), std::log(1e3));
  for (int i = 0; i < 1000; ++i) {
    const Gaussian1D x(mean_dist(rng), std::exp(log_var(rng)));
    const Gaussian1D y(mean_dist(rng), std::exp(log_var(rng)));
    const CanonicalGaussian r = divide(multiply(x, y), y);
    REQUIRE(r.is_proper());
    const Gaussian1D rx = r.to_gaussian();
    CHECK(rx.mean() == Catch::Approx(x.mean()).epsilon(1e-10).margin(1e-10));
    CHECK(rx.variance() == Catch::Approx(x.variance()).epsilon(1e-10));
  }
}

TEST_CASE("self-division is flat, excess precision is an improper carrier",
          "[gaussian]") {
  const Gaussian1D g(2.0, 1.0);
  CHECK(divide(g, g).is_flat());

  const CanonicalGaussian improper = divide(Gaussian1D(0, 0.5), Gaussian1D(0, 0.4));
  CHECK_FALSE(improper.is_proper());
  CHECK(improper.precision == Catch::Approx(2.0 - 2.5));
  CHECK_THROWS_AS(improper.to_gaussian(), InferenceError);
}

TEST_CASE("mode of a Gaussian product", "[gaussian]") {
  CHECK(mode_of_product(Gaussian1D(1, 1), Gaussian1D(1, 1)) == Catch::Approx(1.0));
  CHECK(mode_of_product(Gaussian1D(0, 0.5), Gaussian1D(2, 0.5)) == Catch::Approx(1.0));
  // A vague prior barely moves the informative factor.
  CHECK(mode_of_product(Gaussian1D(0, 1e12), Gaussian1D(-0.8, 0.2)) ==
        Catch::Approx(-0.8).margin(1e-6));
}

TEST_CASE("truncated moments: closed forms", "[gaussian]") {
  SECTION("no truncation") {
    const auto m = truncated_moments(Gaussian1D(0, 1), -kInf, kInf);
    CHECK(m.mass == 1.0);
    CHECK(m.mean == 0.0);
    CHECK(m.variance == 1.0);
    CHECK_FALSE(m.underflow);
  }
  SECTION("half-normal") {
    const auto m = truncated_moments(Gaussian1D(0, 1), 0.0, kInf);
    CHECK(m.mass == Catch::Approx(0.5).margin(1e-15));
    CHECK(m.mean == Catch::Approx(std::sqrt(2.0 / M_PI)).margin(1e-12));
    CHECK(m.variance == Catch::Approx(1.0 - 2.0 / M_PI).margin(1e-12));
  }
  SECTION("one standard deviation below the mean") {
    const auto m = truncated_moments(Gaussian1D(3, 1), 2.0, kInf);
    CHECK(m.mass == Catch::Approx(0.8413447).margin(5e-8));
  }
}

TEST_CASE("truncated moments match quadrature on random cases", "[gaussian]") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> mean_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> log_var(std::log(0.05), std::log(20.0));
  std::uniform_real_distribution<double> offset(-4.0, 4.0);
  std::uniform_int_distribution<int> shape(0, 2);  // two-sided, lower, upper
  for (int i = 0; i < 1000; ++i) {
    const Gaussian1D g(mean_dist(rng), std::exp(log_var(rng)));
    double lo = g.mean() + offset(rng) * g.sd();
    double hi = g.mean() + offset(rng) * g.sd();
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-3) hi = lo + 1e-3;
    switch (shape(rng)) {
      case 1: lo = -kInf; break;
      case 2: hi = kInf; break;
      default: break;
    }
    const auto got = truncated_moments(g, lo, hi);
    const auto want = quad_moments(g, lo, hi, 1e-13);
    CHECK(got.mass == Catch::Approx(want.mass).margin(1e-8));
    CHECK(got.mean == Catch::Approx(want.mean).margin(1e-8));
    CHECK(got.variance == Catch::Approx(want.variance).margin(1e-8));
    CHECK(got.variance <= g.variance() * (1.0 + 1e-12));
  }
}

TEST_CASE("truncated moments: tails and underflow", "[gaussian]") {
  SECTION("deep one-sided tails stay finite and consistent") {
    for (double z : {10.0, 20.0, 30.0, 36.0}) {
      const auto m = truncated_moments(Gaussian1D(0, 1), z, kInf);
      INFO("z = " << z);
      CHECK_FALSE(m.underflow);
      CHECK(m.mass > 0.0);
      CHECK(std::isfinite(m.mean));
      CHECK(m.mean >= z);
      // Far-tail conditional mean approaches the bound plus its Mills ratio.
      CHECK(m.mean == Catch::Approx(z + 1.0 / z).margin(0.01 / z));
      CHECK(m.variance >= 0.0);
      CHECK(m.variance <= 1.0);
    }
  }
  SECTION("mass below 1e-300 underflows with a clamped mean") {
    const auto m = truncated_moments(Gaussian1D(0, 1), 40.0, kInf);
    CHECK(m.underflow);
    CHECK(m.mass == 0.0);
    CHECK(m.mean == 40.0);
    CHECK(m.variance == 0.0);
  }
  SECTION("invalid intervals are rejected") {
    CHECK_THROWS_AS(truncated_moments(Gaussian1D(0, 1), 1.0, 1.0), ModelError);
    CHECK_THROWS_AS(truncated_moments(Gaussian1D(0, 1), 2.0, -2.0), ModelError);
    CHECK_THROWS_AS(truncated_moments(Gaussian1D(0, 1), std::nan(""), 1.0),
                    ModelError);
  }
}

TEST_CASE("normal quantile inverts the normal CDF", "[gaussian]") {
  CHECK(standard_normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(standard_normal_quantile(0.99) ==
        Catch::Approx(2.3263478740408408).margin(1e-12));
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
  for (int i = 0; i < 2000; ++i) {
    const double p = u(rng);
    CHECK(normal_cdf(standard_normal_quantile(p)) ==
          Catch::Approx(p).epsilon(1e-13).margin(1e-14));
  }
  CHECK_THROWS_AS(standard_normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(standard_normal_quantile(1.0), std::domain_error);
}
