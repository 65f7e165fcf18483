#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "evoq/signal.hpp"
#include "evoq/signal_io.hpp"
#include "test_util.hpp"

using namespace evoq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid layout and index lookup", "[signal]") {
  TimeGrid g(-2.0, 2.0, 8);
  CHECK(g.dt() == 0.5);
  CHECK(g.time(0) == -2.0);
  CHECK(g.time(7) == 1.5);
  CHECK(g.symmetric());
  CHECK(g.first_index_at_or_after(0.0) == 4);
  CHECK(g.first_index_at_or_after(0.1) == 5);
  CHECK(g.first_index_at_or_after(2.0) == 8);
  CHECK_THROWS_AS(g.first_index_at_or_after(2.5), Error);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 1), Error);
  CHECK_THROWS_AS(TimeGrid(1.0, 0.0, 4), Error);
  CHECK_FALSE(TimeGrid(-1.0, 2.0, 4).symmetric());
}

TEST_CASE("weighted norm of a gaussian against a direct sum", "[signal]") {
  TimeGrid g(-4.0, 4.0, 64);
  auto f = WeightedSignal::sample(g, 0.5, 1, [](double t) { return CVector::Constant(1, std::exp(-t * t)); });
  // dt * sum exp(-2 nu t) f^2, evaluated independently in double precision
  CHECK_THAT(f.norm(), WithinRel(1.1917176577972772, 1e-14));
}

TEST_CASE("nu-product against a direct sum", "[signal]") {
  TimeGrid g(-4.0, 4.0, 64);
  auto f = WeightedSignal::sample(g, 0.5, 1, [](double t) { return CVector::Constant(1, std::exp(-t * t)); });
  auto h = WeightedSignal::sample(g, -0.5, 1, [](double t) {
    return CVector::Constant(1, Complex(std::cos(t), std::sin(2 * t)));
  });
  Complex p = nu_product(f, h);
  CHECK_THAT(p.real(), WithinAbs(1.3803884639739277, 1e-13));
  CHECK_THAT(p.imag(), WithinAbs(-1.3917200390609385e-08, 1e-13));
}

TEST_CASE("pairing preconditions", "[signal]") {
  TimeGrid g(-1.0, 1.0, 16);
  auto f = WeightedSignal::zero(g, 1.0, 2);
  CHECK_THROWS_AS(nu_product(f, f), Error);
  CHECK_THROWS_AS(nu_product(f, WeightedSignal::zero(TimeGrid(-1.0, 1.0, 32), -1.0, 2)), Error);
  CHECK_THROWS_AS(nu_product(f, WeightedSignal::zero(g, -1.0, 3)), Error);
  CHECK_NOTHROW(nu_product(f, weight_flip(f)));
}

TEST_CASE("pairing is sesquilinear and conjugate symmetric across the flip", "[signal][property]") {
  std::mt19937_64 rng(11);
  TimeGrid g(-3.0, 3.0, 40);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = testutil::random_signal(g, 0.7, 3, rng);
    auto h = testutil::random_signal(g, -0.7, 3, rng);
    auto k = testutil::random_signal(g, -0.7, 3, rng);
    Complex a(0.3, -1.2);
    Complex lhs = nu_product(f, h * a + k);
    Complex rhs = a * nu_product(f, h) + nu_product(f, k);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
    CHECK(std::abs(nu_product(f * a, h) - std::conj(a) * nu_product(f, h)) <= 1e-12 * (1 + std::abs(lhs)));
    CHECK(std::abs(nu_product(h, f) - std::conj(nu_product(f, h))) <= 1e-12 * (1 + std::abs(lhs)));
    // |<f, h>| <= |f| |h|
    CHECK(std::abs(nu_product(f, h)) <= f.norm() * h.norm() * (1 + 1e-12));
  }
}

TEST_CASE("weight flip and time reversal are involutions", "[signal][property]") {
  std::mt19937_64 rng(5);
  TimeGrid g(-2.5, 2.5, 50);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testutil::random_signal(g, 1.3, 2, rng);
    auto h = testutil::random_signal(g, -1.3, 2, rng);
    CHECK(weight_flip(weight_flip(f)).flat() == f.flat());
    CHECK(weight_flip(f).nu() == -1.3);
    CHECK(time_reverse(time_reverse(f)).flat() == f.flat());
    CHECK(time_reverse(f).nu() == -f.nu());
    // T is unitary between L2_nu and L2_{-nu}
    CHECK(std::abs(time_reverse(f).norm() - f.norm()) <= 1e-13 * f.norm());
    Complex p = nu_product(f, h);
    CHECK(std::abs(nu_product(time_reverse(f), time_reverse(h)) - p) <= 1e-12 * (1 + std::abs(p)));
  }
  CHECK_THROWS_AS(time_reverse(WeightedSignal::zero(TimeGrid(0.0, 1.0, 8), 1.0, 1)), Error);
}

TEST_CASE("reversal maps sample t_j to -t_{j+1}", "[signal]") {
  TimeGrid g(-2.0, 2.0, 8);
  auto f = WeightedSignal::sample(g, 0.0, 1, [](double t) { return CVector::Constant(1, t); });
  auto r = time_reverse(f);
  for (std::size_t j = 0; j < 8; ++j)
    CHECK(r.flat()(static_cast<Eigen::Index>(j), 0).real() == -(g.time(j) + g.dt()));
}

TEST_CASE("restrictions split the identity", "[signal][property]") {
  std::mt19937_64 rng(9);
  TimeGrid g(-1.0, 3.0, 37);
  auto f = testutil::random_signal(g, 0.4, 2, rng);
  for (double T : {-1.0, -0.3, 0.0, 1.234, 2.9, 3.0}) {
    auto hi = restrict_to(f, SupportWindow::at_least(T));
    auto lo = restrict_to(f, SupportWindow::at_most(T));
    CHECK((hi + lo).flat() == f.flat());
    CHECK(support_leakage(hi, SupportWindow::at_least(T)) == 0.0);
    CHECK(support_leakage(lo, SupportWindow::at_most(T)) == 0.0);
  }
  // T at the right end keeps nothing
  CHECK(restrict_to(f, SupportWindow::at_least(3.0)).norm() == 0.0);
  CHECK_THROWS_AS(restrict_to(f, SupportWindow::at_least(3.5)), Error);
}

TEST_CASE("leakage of an indicator", "[signal]") {
  TimeGrid g(0.0, 4.0, 40);
  auto f = WeightedSignal::sample(g, 0.0, 1, [](double t) { return CVector::Constant(1, t >= 1.0 && t < 3.0 ? 1.0 : 0.0); });
  CHECK(support_leakage(f, SupportWindow::at_least(1.0)) == 0.0);
  // half of the 20 unit samples sit before t = 2
  CHECK_THAT(support_leakage(f, SupportWindow::at_least(2.0)), WithinRel(std::sqrt(0.5), 1e-14));
  CHECK(support_begin(f) == 10);
  CHECK(support_end(f) == 30);
  CHECK(support_leakage(WeightedSignal::zero(g, 0.0, 1), SupportWindow::at_least(2.0)) == 0.0);
}

TEST_CASE("reversal intertwines restrictions at grid times", "[signal][property]") {
  std::mt19937_64 rng(3);
  TimeGrid g(-2.0, 2.0, 40);
  auto f = testutil::random_signal(g, 0.9, 2, rng);
  for (std::size_t j : {0u, 7u, 20u, 33u}) {
    double T = g.time(j);
    auto lhs = time_reverse(restrict_to(f, SupportWindow::at_least(T)));
    auto rhs = restrict_to(time_reverse(f), SupportWindow::at_most(-T));
    CHECK(lhs.flat() == rhs.flat());
  }
}

TEST_CASE("unweighting guard", "[signal]") {
  TimeGrid g(-10.0, 10.0, 16);
  CHECK_NOTHROW(WeightedSignal::zero(g, 2.0, 1).values());
  CHECK_THROWS_AS(WeightedSignal::zero(g, 4.0, 1).values(), Error);
}

TEST_CASE("edge mass flags slow decay", "[signal]") {
  TimeGrid g(-5.0, 5.0, 200);
  auto fast = WeightedSignal::sample(g, 0.0, 1, [](double t) { return CVector::Constant(1, std::exp(-4 * t * t)); });
  auto slow = WeightedSignal::sample(g, 0.0, 1, [](double t) { return CVector::Constant(1, 1.0 / (1 + t * t)); });
  CHECK(edge_mass(fast) < 1e-12);
  CHECK(edge_mass(slow) > 1e-2);
}

TEST_CASE("vectorize round trip", "[signal]") {
  std::mt19937_64 rng(2);
  TimeGrid g(0.0, 1.0, 12);
  auto f = testutil::random_signal(g, 0.2, 3, rng);
  CVector v = vectorize(f);
  CHECK(v(2 * 12 + 5) == f.flat()(5, 2));
  CHECK(unvectorize(g, 0.2, 3, v).flat() == f.flat());
}

TEST_CASE("csv round trip is lossless", "[signal][io]") {
  std::mt19937_64 rng(8);
  TimeGrid g(-1.5, 2.25, 33);
  auto f = testutil::random_signal(g, -0.75, 2, rng);
  auto dir = std::filesystem::temp_directory_path() / "evoq_io_test";
  std::filesystem::create_directories(dir);
  write_signal(dir / "sig", f);
  auto back = read_signal(dir / "sig");
  CHECK(back.grid() == f.grid());
  CHECK(back.nu() == f.nu());
  CHECK(back.flat() == f.flat());
  CHECK_THROWS_AS(read_signal(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}
