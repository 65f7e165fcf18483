#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "evoq/transform.hpp"
#include "test_util.hpp"

using namespace evoq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

TEST_CASE("frequency layout", "[transform]") {
  TimeGrid even(0.0, 8.0, 8);
  auto xi = frequencies(even);
  const double base = 2 * kPi / 8.0;
  CHECK(xi[0] == 0.0);
  CHECK_THAT(xi[1], WithinRel(base, 1e-15));
  // Nyquist on the positive branch
  CHECK_THAT(xi[4], WithinRel(kPi, 1e-15));
  CHECK_THAT(xi[5], WithinRel(-3 * base, 1e-15));
  TimeGrid odd(0.0, 7.0, 7);
  auto xo = frequencies(odd);
  CHECK_THAT(xo[3], WithinRel(3 * 2 * kPi / 7.0, 1e-15));
  CHECK_THAT(xo[4], WithinRel(-3 * 2 * kPi / 7.0, 1e-15));
}

TEST_CASE("Parseval and inversion", "[transform][property]") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {16u, 45u, 128u}) {
    TimeGrid g(-3.0, 5.0, n);
    auto f = testutil::random_signal(g, 0.8, 3, rng);
    Spectrum s = fourier_laplace(f);
    CHECK_THAT(s.norm(), WithinRel(f.norm(), 1e-13));
    auto back = inverse_fourier_laplace(s);
    CHECK((back - f).norm() <= 1e-13 * f.norm());
  }
}

TEST_CASE("constant flat signal sits in the zero bin", "[transform]") {
  TimeGrid g(-2.0, 2.0, 32);
  WeightedSignal one(g, 1.5, CMatrix::Ones(32, 1));
  Spectrum s = fourier_laplace(one);
  // dt/sqrt(2 pi) * n = (t_max - t_min)/sqrt(2 pi)
  CHECK_THAT(std::abs(s.hat(0, 0)), WithinRel(4.0 / std::sqrt(2 * kPi), 1e-14));
  CHECK(s.hat.bottomRows(31).norm() < 1e-13);
}

TEST_CASE("spectrum matches the continuous transform of a gaussian", "[transform]") {
  // phi(t) = exp(-t^2/2) has transform exp(-xi^2/2) under the unitary convention
  TimeGrid g(-20.0, 20.0, 400);
  WeightedSignal f = WeightedSignal::sample(g, 0.0, 1, [](double t) { return CVector::Constant(1, std::exp(-t * t / 2)); });
  Spectrum s = fourier_laplace(f);
  auto xi = frequencies(g);
  for (std::size_t k = 0; k < xi.size(); k += 17)
    CHECK(std::abs(s.hat(static_cast<Eigen::Index>(k), 0) - std::exp(-xi[k] * xi[k] / 2)) < 1e-12);
}

TEST_CASE("padding lengths", "[transform]") {
  for (std::size_t n : {7u, 64u, 100u, 1000u, 8192u}) {
    Padding p = padding_for(n, 0.25);
    CHECK(p.left == p.right);
    CHECK(4 * p.left >= n);
    std::size_t total = n + 2 * p.left;
    for (std::size_t q : {2u, 3u, 5u})
      while (total % q == 0) total /= q;
    CHECK(total == 1);
  }
  CHECK(padding_for(64, 0.0).left == 0);
  CHECK_THROWS_AS(padding_for(64, -0.1), Error);
}

TEST_CASE("grid frequencies are eigenfunctions of the derivative", "[transform]") {
  TimeGrid g(-4.0, 4.0, 64);
  const double nu = 0.7;
  const double w = frequencies(g)[5];
  WeightedSignal f(g, nu, CMatrix::Zero(64, 1));
  CMatrix flat(64, 1);
  for (Eigen::Index j = 0; j < 64; ++j) flat(j, 0) = std::polar(1.0, w * g.time(static_cast<std::size_t>(j)));
  f = WeightedSignal(g, nu, flat);
  auto d = time_derivative(f, SpectralOptions{0.0});
  CHECK((d - f * Complex(nu, w)).norm() < 1e-12 * f.norm());
}

TEST_CASE("derivative of a smooth bump matches its formula", "[transform]") {
  TimeGrid g(-6.0, 6.0, 512);
  const double nu = 1.1;
  auto val = [](double t) { return std::exp(-t * t); };
  auto der = [](double t) { return -2 * t * std::exp(-t * t); };
  auto f = WeightedSignal::sample(g, nu, 1, [&](double t) { return CVector::Constant(1, val(t)); });
  auto want = WeightedSignal::sample(g, nu, 1, [&](double t) { return CVector::Constant(1, der(t)); });
  CHECK((time_derivative(f) - want).norm() < 1e-10 * want.norm());
}

TEST_CASE("identity symbol leaves the signal alone", "[transform]") {
  std::mt19937_64 rng(4);
  TimeGrid g(0.0, 3.0, 30);
  auto f = testutil::random_signal(g, 0.3, 2, rng);
  auto out = spectral_multiplier(f, [](double) -> CMatrix { return CMatrix::Identity(2, 2); });
  CHECK((out - f).norm() < 1e-13 * f.norm());
}

TEST_CASE("non-finite symbol is rejected", "[transform]") {
  TimeGrid g(0.0, 3.0, 30);
  auto f = WeightedSignal::zero(g, 0.3, 1);
  auto bad = [](double xi) -> CMatrix { return CMatrix::Constant(1, 1, xi == 0.0 ? Complex(1.0 / 0.0) : Complex(1.0)); };
  CHECK_THROWS_AS(spectral_multiplier(f, bad), Error);
}

TEST_CASE("antiderivative of an indicator is a ramp", "[transform]") {
  TimeGrid g(-2.0, 3.0, 500);
  const double h = g.dt();
  auto f = WeightedSignal::sample(g, 0.9, 1, [](double t) { return CVector::Constant(1, t >= 0 && t < 1 ? 1.0 : 0.0); });
  auto F = antiderivative(f).values();
  for (std::size_t j = 0; j < g.size(); ++j) {
    double t = g.time(j);
    double ramp = std::min(std::max(t, 0.0), 1.0);
    // each jump costs half a cell under the trapezoidal rule
    CHECK(std::abs(F(static_cast<Eigen::Index>(j), 0).real() - ramp) <= 0.5 * h + 1e-12);
  }
  CHECK(support_begin(antiderivative(f)) == support_begin(f));
}

TEST_CASE("anticausal antiderivative for negative weight", "[transform]") {
  TimeGrid g(-3.0, 3.0, 600);
  auto f = WeightedSignal::sample(g, -0.8, 1, [](double t) { return CVector::Constant(1, std::exp(-t * t)); });
  auto F = antiderivative(f).values();
  for (std::size_t j = 0; j < g.size(); j += 37) {
    double t = g.time(j);
    // -int_t^inf exp(-s^2) ds
    double want = -0.5 * std::sqrt(kPi) * std::erfc(t);
    CHECK(std::abs(F(static_cast<Eigen::Index>(j), 0).real() - want) < 1e-4);
  }
  CHECK(support_end(antiderivative(restrict_to(f, SupportWindow::at_most(0.5)))) ==
        support_end(restrict_to(f, SupportWindow::at_most(0.5))));
  CHECK_THROWS_AS(antiderivative(WeightedSignal::zero(g, 0.0, 1)), Error);
}

TEST_CASE("quadrature and spectral inverses of the derivative agree", "[transform]") {
  for (double nu : {2.0, -2.0}) {
    double previous = 0.0;
    for (std::size_t n : {2048u, 4096u}) {
      std::mt19937_64 rng(17);
      TimeGrid g(-8.0, 8.0, n);
      auto f = WeightedSignal::from_values(g, nu, testutil::gaussian_values(g, 2, 0.0, 1.0, rng));
      auto quad = antiderivative(f);
      auto spec = spectral_multiplier_padded(
          f, [nu](double xi) -> CMatrix { return CMatrix::Identity(2, 2) / Complex(nu, xi); });
      double wrap = nu > 0 ? spec.left_leakage() : spec.right_leakage();
      double diff = (quad - spec.interior()).norm() / quad.norm();
      INFO("nu " << nu << " n " << n << " diff " << diff << " wrap " << wrap);
      CHECK(wrap < 1e-9);
      // the trapezoidal rule sets the gap, at second order
      CHECK(diff < 4e-5);
      if (previous > 0.0) CHECK(previous / diff > 3.0);
      previous = diff;
    }
  }
}

TEST_CASE("reversal conjugates the derivative", "[transform][property]") {
  std::mt19937_64 rng(12);
  TimeGrid g(-8.0, 8.0, 480);
  for (int trial = 0; trial < 5; ++trial) {
    const double nu = 0.5 + trial * 0.3;
    auto f = WeightedSignal::from_values(g, nu, testutil::gaussian_values(g, 2, 0.0, 0.7, rng));
    auto lhs = time_reverse(time_derivative(f));
    auto rhs = time_derivative(time_reverse(f)) * -1.0;
    CHECK((lhs - rhs).norm() < 1e-8 * lhs.norm());
  }
}

TEST_CASE("derivative is the nu-adjoint of minus the reversed-weight derivative", "[transform][property]") {
  std::mt19937_64 rng(13);
  TimeGrid g(-5.0, 5.0, 200);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testutil::random_signal(g, 1.2, 2, rng);
    auto h = testutil::random_signal(g, -1.2, 2, rng);
    Complex lhs = nu_product(time_derivative(f), h);
    Complex rhs = -nu_product(f, time_derivative(h));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * f.norm() * h.norm() * 100);
  }
}
