#include "evoq/material.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace evoq {

MaterialLaw MaterialLaw::finite_sum(std::vector<CMatrix> coefficients, double nu0) {
  if (coefficients.empty()) throw Error(ErrorKind::Range, "a finite sum needs at least M_0");
  const auto m = coefficients.front().rows();
  for (const auto& c : coefficients) {
    if (c.rows() != m || c.cols() != m) throw Error(ErrorKind::Range, "coefficients must be square and equal-sized");
    if (!c.allFinite()) throw Error(ErrorKind::Range, "non-finite coefficient");
  }
  MaterialLaw law;
  law.m_ = m;
  law.nu0_ = nu0;
  law.coeffs_ = std::move(coefficients);
  return law;
}

MaterialLaw MaterialLaw::sampled(Eigen::Index m, std::function<CMatrix(Complex)> eval, double nu0) {
  if (!eval) throw Error(ErrorKind::Range, "sampled law needs an evaluator");
  MaterialLaw law;
  law.m_ = m;
  law.nu0_ = nu0;
  law.eval_ = std::move(eval);
  return law;
}

CMatrix MaterialLaw::operator()(Complex z) const {
  if (eval_) {
    if (z.real() < nu0_) throw Error(ErrorKind::Precondition, "Re z is left of the declared abscissa");
    CMatrix v = eval_(z);
    if (v.rows() != m_ || v.cols() != m_) throw Error(ErrorKind::Range, "sampled law returned the wrong shape");
    return v;
  }
  if (coeffs_.size() == 1) return coeffs_.front();
  if (z == Complex(0.0)) throw Error(ErrorKind::Pole, "finite sum evaluated at z = 0");
  const Complex w = 1.0 / (conjugated_ ? std::conj(z) : z);
  // Horner in w = z^{-1}
  CMatrix acc = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = (acc * w).eval() + coeffs_[k];
  return acc;
}

CMatrix eval_law(const MaterialLaw& M, Complex z) { return M(z); }

MaterialLaw adjoint_law(const MaterialLaw& M) {
  if (M.is_finite_sum()) {
    std::vector<CMatrix> c;
    c.reserve(M.coefficients().size());
    for (const auto& k : M.coefficients()) c.push_back(k.adjoint());
    MaterialLaw out = MaterialLaw::finite_sum(std::move(c), M.nu0());
    out.conjugated_ = !M.conjugated_argument();
    return out;
  }
  auto inner = M;
  return MaterialLaw::sampled(M.dim(), [inner](Complex z) -> CMatrix { return inner(z).adjoint(); }, M.nu0());
}

MaterialLaw reversed_dual_law(const MaterialLaw& M) {
  if (M.is_finite_sum()) {
    std::vector<CMatrix> c;
    c.reserve(M.coefficients().size());
    for (const auto& k : M.coefficients()) c.push_back(k.adjoint());
    MaterialLaw out = MaterialLaw::finite_sum(std::move(c), M.nu0());
    out.conjugated_ = M.conjugated_argument();
    return out;
  }
  auto inner = M;
  return MaterialLaw::sampled(M.dim(), [inner](Complex z) -> CMatrix { return inner(std::conj(z)).adjoint(); },
                              M.nu0());
}

CMatrix hermitian_part(const CMatrix& X) { return 0.5 * (X + X.adjoint()); }

double lambda_min_hermitian(const CMatrix& H) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Solver, "Hermitian eigensolve failed");
  return es.eigenvalues()(0);
}

CoercivityCertificate coercivity_on(const MaterialLaw& M, double nu, std::span<const double> xis) {
  if (!(nu > 0.0)) throw Error(ErrorKind::Precondition, "coercivity needs nu > 0");
  if (nu < M.nu0()) throw Error(ErrorKind::Precondition, "nu is left of the law's abscissa");
  if (xis.empty()) throw Error(ErrorKind::Range, "no frequencies to test");
  CoercivityCertificate cert;
  cert.nu = nu;
  cert.sample_count = xis.size();
  cert.c_est = std::numeric_limits<double>::infinity();
  for (double xi : xis) {
    Complex z(nu, xi);
    double lam = lambda_min_hermitian(hermitian_part(z * M(z)));
    if (lam < cert.c_est) {
      cert.c_est = lam;
      cert.min_location = xi;
    }
  }
  if (!(cert.c_est > 0.0)) throw NonCoerciveError(cert.c_est, cert.min_location, nu);
  return cert;
}

CoercivityCertificate coercivity(const MaterialLaw& M, double nu, const TimeGrid& grid) {
  auto xi = frequencies(grid);
  return coercivity_on(M, nu, xi);
}

WeightedSignal apply_material_op(const MaterialLaw& M, const WeightedSignal& f, const SpectralOptions& opt) {
  if (f.dim() != M.dim()) throw Error(ErrorKind::Range, "law and signal dimensions differ");
  const double nu = f.nu();
  return spectral_multiplier(f, [&M, nu](double xi) { return M(Complex(nu, xi)); }, opt);
}

WeightedSignal apply_adjoint_material_op(const MaterialLaw& M, const WeightedSignal& g, const SpectralOptions& opt) {
  if (g.dim() != M.dim()) throw Error(ErrorKind::Range, "law and signal dimensions differ");
  const double nu = -g.nu();
  return spectral_multiplier(g, [&M, nu](double xi) -> CMatrix { return M(Complex(nu, xi)).adjoint(); }, opt);
}

namespace {
WeightedSignal apply_matrix(const CMatrix& K, const WeightedSignal& f) {
  return WeightedSignal(f.grid(), f.nu(), f.flat() * K.transpose());
}

void require_holomorphic_sum(const MaterialLaw& M) {
  if (!M.is_finite_sum() || M.conjugated_argument())
    throw Error(ErrorKind::UnsupportedLaw, "quadrature path needs a holomorphic finite sum");
}
}  // namespace

WeightedSignal apply_material_by_quadrature(const MaterialLaw& M, const WeightedSignal& f) {
  require_holomorphic_sum(M);
  const auto& c = M.coefficients();
  // Horner in the antiderivative: M_0 f + d^{-1}(M_1 f + d^{-1}(M_2 f + ...))
  WeightedSignal acc = apply_matrix(c.back(), f);
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = apply_matrix(c[k], f) + antiderivative(acc);
  return acc;
}

WeightedSignal apply_adjoint_material_by_quadrature(const MaterialLaw& M, const WeightedSignal& g) {
  require_holomorphic_sum(M);
  const auto& c = M.coefficients();
  WeightedSignal acc = apply_matrix(c.back().adjoint(), g);
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = apply_matrix(c[k].adjoint(), g) - antiderivative(acc);
  return acc;
}

}  // namespace evoq
