#include "evoq/spatial.hpp"

#include <Eigen/Eigenvalues>

namespace evoq {

SpatialOperator check_skew(const CMatrix& A, std::string label) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::Range, "spatial operator must be square");
  if (!A.allFinite()) throw Error(ErrorKind::Range, "non-finite spatial operator");
  const double scale = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
  CMatrix defect = A + A.adjoint();
  Eigen::Index r = 0, c = 0;
  double worst = defect.size() ? defect.cwiseAbs().maxCoeff(&r, &c) : 0.0;
  if (worst > 1e-12 * (1.0 + scale)) throw NotSkewError(r, c, worst);
  return SpatialOperator(A, std::move(label));
}

SpatialOperator negate(const SpatialOperator& A) { return check_skew(-A.matrix(), "-" + A.label()); }

CMatrix forward_difference(std::size_t k, double dx) {
  auto kk = static_cast<Eigen::Index>(k);
  CMatrix D = CMatrix::Zero(kk, kk + 1);
  for (Eigen::Index e = 0; e < kk; ++e) {
    D(e, e) = -1.0 / dx;
    D(e, e + 1) = 1.0 / dx;
  }
  return D;
}

CMatrix clamped_difference(std::size_t k, double dx) {
  auto kk = static_cast<Eigen::Index>(k);
  CMatrix D = CMatrix::Zero(kk + 1, kk);
  for (Eigen::Index e = 0; e <= kk; ++e) {
    if (e < kk) D(e, e) = 1.0 / dx;
    if (e > 0) D(e, e - 1) = -1.0 / dx;
  }
  return D;
}

namespace {
void require_size(const CMatrix& X, Eigen::Index n, const char* what) {
  if (X.rows() != n || X.cols() != n)
    throw Error(ErrorKind::Range, std::string(what) + " must be " + std::to_string(n) + " x " + std::to_string(n));
}

void require_positive_hermitian_part(const CMatrix& X, const char* what) {
  if (lambda_min_hermitian(hermitian_part(X)) <= 0.0)
    throw Error(ErrorKind::Definiteness, std::string(what) + " needs a positive definite Hermitian part");
}

void require_hpd(const CMatrix& X, const char* what) {
  if ((X - X.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + X.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::Definiteness, std::string(what) + " must be Hermitian");
  require_positive_hermitian_part(X, what);
}

void require_dx(std::size_t k, double dx) {
  if (k < 1) throw Error(ErrorKind::Range, "need at least one cell");
  if (!(dx > 0.0)) throw Error(ErrorKind::Range, "dx must be positive");
}

CMatrix blocks(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

CMatrix skew_from(const CMatrix& upper, const CMatrix& lower) {
  const auto n1 = lower.cols(), n2 = lower.rows();
  CMatrix A = CMatrix::Zero(n1 + n2, n1 + n2);
  A.topRightCorner(n1, n2) = upper;
  A.bottomLeftCorner(n2, n1) = lower;
  return A;
}
}  // namespace

BlockSystem build_heat_block(std::size_t k, const CMatrix& a, double dx) {
  require_dx(k, dx);
  auto kk = static_cast<Eigen::Index>(k);
  require_size(a, kk, "conductivity");
  require_positive_hermitian_part(a, "conductivity");
  CMatrix D = forward_difference(k, dx);
  CMatrix A = skew_from(-D.adjoint(), D);
  CMatrix M0 = blocks(CMatrix::Identity(kk + 1, kk + 1), CMatrix::Zero(kk, kk));
  CMatrix M1 = blocks(CMatrix::Zero(kk + 1, kk + 1), a.inverse());
  return {check_skew(A, "heat"), MaterialLaw::finite_sum({M0, M1}), kk + 1};
}

BlockSystem build_wave_block(std::size_t k, const CMatrix& T, double dx) {
  require_dx(k, dx);
  auto kk = static_cast<Eigen::Index>(k);
  require_size(T, kk + 1, "elasticity");
  require_hpd(T, "elasticity");
  CMatrix D0 = clamped_difference(k, dx);
  CMatrix A = skew_from(D0.adjoint(), -D0);
  CMatrix M0 = blocks(CMatrix::Identity(kk, kk), T.inverse());
  return {check_skew(A, "wave"), MaterialLaw::finite_sum({M0}), kk};
}

MaxwellSystem build_maxwell_block(std::size_t k, const CMatrix& eps, const CMatrix& mu, const CMatrix& sigma,
                                  double nu, double dx) {
  require_dx(k, dx);
  auto kk = static_cast<Eigen::Index>(k);
  require_size(eps, kk, "permittivity");
  require_size(sigma, kk, "conductivity");
  require_size(mu, kk + 1, "permeability");
  require_hpd(eps, "permittivity");
  require_hpd(mu, "permeability");
  CMatrix C = clamped_difference(k, dx);
  CMatrix A = skew_from(-C.adjoint(), C);
  CMatrix M0 = blocks(eps, mu);
  CMatrix M1 = blocks(sigma, CMatrix::Zero(kk + 1, kk + 1));
  MaterialLaw law = MaterialLaw::finite_sum({M0, M1});
  // eps and mu are Hermitian, so the Hermitian part does not depend on xi
  const double xi0[] = {0.0};
  CoercivityCertificate cert = coercivity_on(law, nu, xi0);
  return {{check_skew(A, "maxwell"), std::move(law), kk}, cert};
}

}  // namespace evoq
