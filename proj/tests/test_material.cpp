#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "evoq/material.hpp"
#include "test_util.hpp"

using namespace evoq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

MaterialLaw random_law(Eigen::Index m, std::size_t order, std::mt19937_64& rng) {
  std::vector<CMatrix> c;
  for (std::size_t k = 0; k <= order; ++k) c.push_back(testutil::random_matrix(m, m, rng));
  return MaterialLaw::finite_sum(std::move(c));
}

// Coercive two-term law: M_0 Hermitian positive definite plus a small M_1.
MaterialLaw coercive_law(Eigen::Index m, std::mt19937_64& rng) {
  CMatrix X = testutil::random_matrix(m, m, rng);
  CMatrix M0 = X * X.adjoint() + CMatrix::Identity(m, m);
  CMatrix M1 = 0.2 * testutil::random_matrix(m, m, rng);
  return MaterialLaw::finite_sum({M0, M1});
}

}  // namespace

TEST_CASE("constant law evaluates to itself", "[material]") {
  auto M = MaterialLaw::finite_sum({CMatrix::Identity(3, 3)});
  CHECK(M(Complex(0.3, -7.0)).isApprox(CMatrix::Identity(3, 3)));
  CHECK(M(Complex(0.0)).isApprox(CMatrix::Identity(3, 3)));
  CHECK(M.order() == 0);
}

TEST_CASE("two-term law at z = 2", "[material]") {
  CMatrix M0 = CMatrix::Zero(2, 2), M1 = CMatrix::Zero(2, 2);
  M0(0, 0) = 1.0;
  M1(1, 1) = 2.0;
  auto M = MaterialLaw::finite_sum({M0, M1});
  CHECK((eval_law(M, Complex(2.0)) - CMatrix::Identity(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS(eval_law(M, Complex(0.0)), Error);
  try {
    eval_law(M, Complex(0.0));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Pole);
  }
}

TEST_CASE("Horner matches the power sum", "[material][property]") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    auto M = random_law(4, 3, rng);
    Complex z(0.5 + std::abs(N(rng)), N(rng));
    CMatrix naive = CMatrix::Zero(4, 4);
    for (std::size_t k = 0; k < M.coefficients().size(); ++k)
      naive += std::pow(z, -static_cast<double>(k)) * M.coefficients()[k];
    CHECK((M(z) - naive).cwiseAbs().maxCoeff() < 1e-14 * (1.0 + naive.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("adjoint law", "[material]") {
  CMatrix N = CMatrix::Zero(2, 2);
  N(0, 1) = 1.0;
  auto adj = adjoint_law(MaterialLaw::finite_sum({N}));
  CHECK(adj.coefficients()[0](1, 0) == Complex(1.0));
  CHECK(adj.coefficients()[0](0, 1) == Complex(0.0));

  std::mt19937_64 rng(8);
  CMatrix X = testutil::random_matrix(3, 3, rng);
  CMatrix H = X + X.adjoint();
  auto herm = MaterialLaw::finite_sum({H});
  CHECK(adjoint_law(herm)(Complex(1.0, 2.0)) == herm(Complex(1.0, 2.0)));

  for (int trial = 0; trial < 10; ++trial) {
    auto M = random_law(3, 2, rng);
    Complex z(1.0 + trial * 0.1, 0.7 * trial - 3.0);
    CHECK((adjoint_law(M)(z) - M(z).adjoint()).norm() < 1e-14 * M(z).norm());
    CHECK((adjoint_law(adjoint_law(M))(z) - M(z)).norm() == 0.0);
    CHECK((reversed_dual_law(M)(z) - M(std::conj(z)).adjoint()).norm() < 1e-14 * M(z).norm());
  }
}

TEST_CASE("adjoint of a sampled law", "[material]") {
  auto M = MaterialLaw::sampled(
      1, [](Complex z) -> CMatrix { return CMatrix::Constant(1, 1, 1.0 / (z + 1.0)); }, 0.5);
  auto adj = adjoint_law(M);
  Complex z(1.0, 3.0);
  CHECK(std::abs(adj(z)(0, 0) - std::conj(1.0 / (z + 1.0))) < 1e-15);
  CHECK(adj.nu0() == 0.5);
  CHECK_THROWS_AS(M(Complex(0.1, 0.0)), Error);
}

TEST_CASE("coercivity of the identity law is nu", "[material]") {
  TimeGrid g(-4.0, 4.0, 128);
  auto M = MaterialLaw::finite_sum({CMatrix::Identity(2, 2)});
  for (double nu : {0.3, 1.0, 2.5}) {
    auto c = coercivity(M, nu, g);
    CHECK_THAT(c.c_est, WithinRel(nu, 1e-14));
    CHECK(c.sample_count == 128);
  }
}

TEST_CASE("heat-type law has c = min(nu, 1/a)", "[material]") {
  TimeGrid g(-4.0, 4.0, 256);
  for (double a : {0.5, 2.0}) {
    CMatrix M0 = CMatrix::Zero(2, 2), M1 = CMatrix::Zero(2, 2);
    M0(0, 0) = 1.0;
    M1(1, 1) = 1.0 / a;
    auto M = MaterialLaw::finite_sum({M0, M1});
    for (double nu : {0.3, 1.0, 3.0}) {
      auto c = coercivity(M, nu, g);
      CHECK_THAT(c.c_est, WithinRel(std::min(nu, 1.0 / a), 1e-12));
    }
  }
}

TEST_CASE("negative law is rejected with its location", "[material]") {
  TimeGrid g(-4.0, 4.0, 64);
  auto M = MaterialLaw::finite_sum({-CMatrix::Identity(2, 2)});
  try {
    coercivity(M, 1.0, g);
    FAIL("expected a non-coercive error");
  } catch (const NonCoerciveError& e) {
    CHECK(e.kind() == ErrorKind::NonCoercive);
    CHECK_THAT(e.c_est(), WithinRel(-1.0, 1e-14));
    CHECK(e.nu() == 1.0);
  }
  CHECK_THROWS_AS(coercivity(MaterialLaw::finite_sum({CMatrix::Identity(1, 1)}), 0.0, g), Error);
}

TEST_CASE("law and its adjoint share the certificate", "[material][property]") {
  std::mt19937_64 rng(5);
  TimeGrid g(-3.0, 3.0, 96);
  for (int trial = 0; trial < 10; ++trial) {
    auto M = coercive_law(3, rng);
    auto xi = frequencies(g);
    auto c = coercivity(M, 1.0, g);
    // adjoint block at frequency xi is ((i xi + nu) M(i xi + nu))^*
    double c_adj = 1e300;
    for (double x : xi) {
      Complex z(1.0, x);
      c_adj = std::min(c_adj, lambda_min_hermitian(hermitian_part((z * M(z)).adjoint())));
    }
    CHECK_THAT(c_adj, WithinRel(c.c_est, 1e-12));
  }
}

TEST_CASE("material operators", "[material]") {
  std::mt19937_64 rng(9);
  TimeGrid g(-4.0, 4.0, 128);
  auto f = testutil::random_signal(g, 0.8, 2, rng);
  auto I = MaterialLaw::finite_sum({CMatrix::Identity(2, 2)});
  CHECK((apply_material_op(I, f) - f).norm() < 1e-13 * f.norm());
  auto h = testutil::random_signal(g, -0.8, 2, rng);
  CHECK((apply_adjoint_material_op(I, h) - h).norm() < 1e-13 * h.norm());

  // grid frequency: d^{-1} acts by 1/(i w + nu)
  const double nu = 0.8;
  const double w = frequencies(g)[3];
  auto e = WeightedSignal::sample(g, nu, 1, [&](double t) { return CVector::Constant(1, std::polar(std::exp(nu * t), w * t)); });
  auto inv = MaterialLaw::finite_sum({CMatrix::Zero(1, 1), CMatrix::Identity(1, 1)});
  auto out = apply_material_op(inv, e, SpectralOptions{0.0});
  CHECK((out - e * (1.0 / Complex(nu, w))).norm() < 1e-12 * out.norm());
}

TEST_CASE("pairing identity for material operators", "[material][property]") {
  std::mt19937_64 rng(10);
  TimeGrid g(-5.0, 5.0, 200);
  for (int trial = 0; trial < 20; ++trial) {
    auto M = random_law(3, trial % 3, rng);
    const double nu = 0.5 + 0.1 * trial;
    auto f = testutil::random_signal(g, nu, 3, rng);
    auto h = testutil::random_signal(g, -nu, 3, rng);
    Complex lhs = nu_product(apply_material_op(M, f), h);
    Complex rhs = nu_product(f, apply_adjoint_material_op(M, h));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs) + 1e-12 * f.norm() * h.norm());
  }
}

TEST_CASE("multiplier norms of a law and its adjoint agree", "[material][property]") {
  std::mt19937_64 rng(11);
  TimeGrid g(-3.0, 3.0, 64);
  auto M = random_law(3, 2, rng);
  auto A = adjoint_law(M);
  double nm = 0.0, na = 0.0;
  for (double x : frequencies(g)) {
    // the adjoint multiplier sits at the same abscissa
    Eigen::JacobiSVD<CMatrix> s1(M(Complex(1.0, x))), s2(A(Complex(1.0, x)));
    nm = std::max(nm, s1.singularValues()(0));
    na = std::max(na, s2.singularValues()(0));
  }
  CHECK_THAT(na, WithinRel(nm, 1e-12));
}

TEST_CASE("spectral and quadrature material paths agree", "[material]") {
  std::mt19937_64 rng(14);
  const double nu = 2.0;
  TimeGrid g(-8.0, 8.0, 4096);
  auto M = random_law(2, 2, rng);
  auto f = WeightedSignal::from_values(g, nu, testutil::gaussian_values(g, 2, 0.0, 1.0, rng));
  auto spec = apply_material_op(M, f);
  auto quad = apply_material_by_quadrature(M, f);
  CHECK((spec - quad).norm() < 4e-5 * spec.norm());

  auto h = WeightedSignal::from_values(g, -nu, testutil::gaussian_values(g, 2, 0.0, 1.0, rng));
  auto aspec = apply_adjoint_material_op(M, h);
  auto aquad = apply_adjoint_material_by_quadrature(M, h);
  CHECK((aspec - aquad).norm() < 4e-5 * aspec.norm());

  CHECK_THROWS_AS(apply_material_by_quadrature(adjoint_law(M), f), Error);
}
