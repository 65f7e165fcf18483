#pragma once

/*
 * Material laws M(z), holomorphic on a right half-plane Re z > nu0.
 *
 * FiniteSum stores M(z) = sum_k z^{-k} M_k. Its adjoint M^*(z) = M(z)^* is
 * no longer holomorphic in z, so the adjoint keeps the conjugated
 * coefficients and evaluates them at conj(z). Sampled wraps an arbitrary
 * callable together with its declared abscissa.
 */

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "evoq/signal.hpp"
#include "evoq/transform.hpp"

namespace evoq {

class MaterialLaw {
public:
  static MaterialLaw finite_sum(std::vector<CMatrix> coefficients, double nu0 = 0.0);
  static MaterialLaw sampled(Eigen::Index m, std::function<CMatrix(Complex)> eval, double nu0);

  Eigen::Index dim() const noexcept { return m_; }
  double nu0() const noexcept { return nu0_; }
  bool is_finite_sum() const noexcept { return !eval_; }
  // Empty for sampled laws.
  const std::vector<CMatrix>& coefficients() const noexcept { return coeffs_; }
  bool conjugated_argument() const noexcept { return conjugated_; }
  // Highest power of z^{-1}; zero for sampled laws.
  std::size_t order() const noexcept { return coeffs_.empty() ? 0 : coeffs_.size() - 1; }

  CMatrix operator()(Complex z) const;

private:
  friend MaterialLaw adjoint_law(const MaterialLaw& M);
  friend MaterialLaw reversed_dual_law(const MaterialLaw& M);

  MaterialLaw() = default;

  Eigen::Index m_ = 0;
  double nu0_ = 0.0;
  std::vector<CMatrix> coeffs_;
  bool conjugated_ = false;
  std::function<CMatrix(Complex)> eval_;
};

CMatrix eval_law(const MaterialLaw& M, Complex z);
MaterialLaw adjoint_law(const MaterialLaw& M);

// sum z^{-k} M_k^*, the holomorphic law of the time-reversed adjoint system.
MaterialLaw reversed_dual_law(const MaterialLaw& M);

struct CoercivityCertificate {
  double nu = 0.0;
  double c_est = 0.0;
  std::size_t sample_count = 0;
  double min_location = 0.0;
};

// min over xi of lambda_min of the Hermitian part of (i xi + nu) M(i xi + nu).
// Throws NonCoerciveError when that minimum is not positive.
CoercivityCertificate coercivity_on(const MaterialLaw& M, double nu, std::span<const double> xis);
CoercivityCertificate coercivity(const MaterialLaw& M, double nu, const TimeGrid& grid);

CMatrix hermitian_part(const CMatrix& X);
double lambda_min_hermitian(const CMatrix& H);

WeightedSignal apply_material_op(const MaterialLaw& M, const WeightedSignal& f, const SpectralOptions& opt = {});
// Acts on g at weight -nu with the multiplier M^*(i xi + nu).
WeightedSignal apply_adjoint_material_op(const MaterialLaw& M, const WeightedSignal& g, const SpectralOptions& opt = {});

// Time-domain paths for finite sums: sum_k d^{-k} M_k f by repeated
// antiderivatives, and sum_k (-1)^k d_{-nu}^{-k} M_k^* g for the adjoint.
WeightedSignal apply_material_by_quadrature(const MaterialLaw& M, const WeightedSignal& f);
WeightedSignal apply_adjoint_material_by_quadrature(const MaterialLaw& M, const WeightedSignal& g);

}  // namespace evoq
