#include <catch_amalgamated.hpp>

#include <random>

#include <Eigen/Eigenvalues>

#include "evoq/spatial.hpp"
#include "test_util.hpp"

using namespace evoq;
using Catch::Matchers::WithinRel;

namespace {

CMatrix random_hpd(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix X = testutil::random_matrix(n, n, rng);
  return X * X.adjoint() / static_cast<double>(n) + CMatrix::Identity(n, n);
}

double lambda_min_inverse(const CMatrix& T) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(T);
  return 1.0 / es.eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("skew check", "[spatial]") {
  CMatrix R(2, 2);
  R << 0.0, -1.0, 1.0, 0.0;
  CHECK_NOTHROW(check_skew(R));
  CMatrix P = CMatrix::Zero(2, 2);
  P(0, 0) = 1.0;
  try {
    check_skew(P);
    FAIL("expected a not-skew error");
  } catch (const NotSkewError& e) {
    CHECK(e.row() == 0);
    CHECK(e.col() == 0);
    CHECK(e.defect() == 2.0);
  }
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix D = testutil::random_matrix(6, 6, rng);
    CHECK_NOTHROW(check_skew(D - D.adjoint()));
  }
  CHECK_THROWS_AS(check_skew(CMatrix::Zero(2, 3)), Error);
}

TEST_CASE("single-cell heat stencil", "[spatial]") {
  auto s = build_heat_block(1, CMatrix::Identity(1, 1));
  CMatrix D = forward_difference(1, 1.0);
  CHECK(D(0, 0) == Complex(-1.0));
  CHECK(D(0, 1) == Complex(1.0));
  CMatrix want = CMatrix::Zero(3, 3);
  want(0, 2) = 1.0;
  want(1, 2) = -1.0;
  want(2, 0) = -1.0;
  want(2, 1) = 1.0;
  CHECK(s.A.matrix() == want);
  CHECK((s.A.matrix() + s.A.matrix().adjoint()).norm() == 0.0);
  CHECK(s.first_block == 2);
}

TEST_CASE("heat certificate tracks the conductivity", "[spatial]") {
  TimeGrid g(-4.0, 4.0, 128);
  auto s = build_heat_block(4, 2.0 * CMatrix::Identity(4, 4));
  for (double nu : {0.25, 1.0}) CHECK_THAT(coercivity(s.law, nu, g).c_est, WithinRel(std::min(nu, 0.5), 1e-12));

  std::mt19937_64 rng(4);
  CMatrix a = random_hpd(8, rng);
  auto big = build_heat_block(8, a);
  CHECK_NOTHROW(check_skew(big.A.matrix()));
  CHECK(big.A.dim() == 17);
  double lam = lambda_min_hermitian(hermitian_part(a.inverse()));
  CHECK_THAT(coercivity(big.law, 3.0, g).c_est, WithinRel(std::min(3.0, lam), 1e-10));

  CHECK_THROWS_AS(build_heat_block(2, -CMatrix::Identity(2, 2)), Error);
  try {
    build_heat_block(2, CMatrix::Zero(2, 2));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Definiteness);
  }
}

TEST_CASE("wave block", "[spatial]") {
  auto s = build_wave_block(2, CMatrix::Identity(3, 3));
  CMatrix D0 = clamped_difference(2, 1.0);
  CMatrix want(3, 2);
  want << 1.0, 0.0, -1.0, 1.0, 0.0, -1.0;
  CHECK(D0 == want);
  CHECK(s.A.dim() == 5);
  CHECK(s.law.order() == 0);

  std::mt19937_64 rng(6);
  TimeGrid g(-4.0, 4.0, 64);
  for (int trial = 0; trial < 5; ++trial) {
    CMatrix T = random_hpd(5, rng);
    auto w = build_wave_block(4, T);
    CHECK_NOTHROW(check_skew(w.A.matrix()));
    for (double nu : {0.5, 2.0})
      CHECK_THAT(coercivity(w.law, nu, g).c_est, WithinRel(nu * std::min(1.0, lambda_min_inverse(T)), 1e-10));
  }
  CMatrix bad = CMatrix::Identity(3, 3);
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(build_wave_block(2, bad), Error);
}

TEST_CASE("maxwell block", "[spatial]") {
  const std::size_t k = 4;
  auto I = [](Eigen::Index n) { return CMatrix::Identity(n, n); };
  auto plain = build_maxwell_block(k, I(4), I(5), CMatrix::Zero(4, 4), 1.5);
  CHECK_THAT(plain.certificate.c_est, WithinRel(1.5, 1e-14));
  // conductivity lifts the electric block to nu + 1; mu = 2 keeps the magnetic block above it
  auto lossy = build_maxwell_block(k, I(4), 2.0 * I(5), I(4), 1.0);
  CHECK_THAT(lossy.certificate.c_est, WithinRel(2.0, 1e-14));
  auto unit_mu = build_maxwell_block(k, I(4), I(5), I(4), 1.0);
  CHECK_THAT(unit_mu.certificate.c_est, WithinRel(1.0, 1e-14));

  std::mt19937_64 rng(7);
  auto r = build_maxwell_block(k, random_hpd(4, rng), random_hpd(5, rng), testutil::random_matrix(4, 4, rng) * 0.1, 2.0);
  CHECK_NOTHROW(check_skew(r.system.A.matrix()));
  CHECK(r.certificate.c_est > 0.0);

  CHECK_THROWS_AS(build_maxwell_block(k, I(4), I(5), -10.0 * I(4), 1.0), NonCoerciveError);
}

TEST_CASE("negated operator stays skew", "[spatial]") {
  auto s = build_heat_block(3, CMatrix::Identity(3, 3));
  auto n = negate(s.A);
  CHECK((n.matrix() + s.A.matrix()).norm() == 0.0);
}

TEST_CASE("lifted skew operator pairs with its negative", "[spatial][property]") {
  std::mt19937_64 rng(12);
  TimeGrid g(-2.0, 2.0, 50);
  auto s = build_wave_block(3, random_hpd(4, rng));
  const CMatrix& A = s.A.matrix();
  for (int trial = 0; trial < 10; ++trial) {
    auto f = testutil::random_signal(g, 1.0, 7, rng);
    auto h = testutil::random_signal(g, -1.0, 7, rng);
    WeightedSignal Af(g, 1.0, f.flat() * A.transpose());
    WeightedSignal Ah(g, -1.0, -(h.flat() * A.transpose()));
    Complex lhs = nu_product(Af, h), rhs = nu_product(f, Ah);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * f.norm() * h.norm() * A.norm());
  }
}
