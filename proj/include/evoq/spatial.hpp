#pragma once

/*
 * Skew-selfadjoint spatial operators and the block systems built from them.
 *
 * Staggered 1D grids with spacing dx: nodal unknowns sit at cell centres and
 * edge unknowns between them. D is the (k) x (k+1) forward difference with
 * no boundary rows, D0 the (k+1) x k difference of a field clamped to zero
 * at both ends.
 *
 *   heat     (theta, q)  A = [[0, -D^T], [D, 0]]      M_0 = diag(1, 0), M_1 = diag(0, a^-1)
 *   wave     (v, sigma)  A = [[0, D0^T], [-D0, 0]]    M_0 = diag(1, T^-1)
 *   maxwell  (E, H)      A = [[0, -D0^T], [D0, 0]]    M_0 = diag(eps, mu), M_1 = diag(sigma, 0)
 */

#include <string>

#include "evoq/material.hpp"

namespace evoq {

class SpatialOperator {
public:
  Eigen::Index dim() const noexcept { return A_.rows(); }
  const CMatrix& matrix() const noexcept { return A_; }
  const std::string& label() const noexcept { return label_; }

private:
  friend SpatialOperator check_skew(const CMatrix& A, std::string label);
  SpatialOperator(CMatrix A, std::string label) : A_(std::move(A)), label_(std::move(label)) {}

  CMatrix A_;
  std::string label_;
};

// Accepts A when max|A + A^*| <= 1e-12 (1 + max|A|).
SpatialOperator check_skew(const CMatrix& A, std::string label = "matrix");

// -A, still skew.
SpatialOperator negate(const SpatialOperator& A);

struct BlockSystem {
  SpatialOperator A;
  MaterialLaw law;
  Eigen::Index first_block = 0;  // size of the leading field
};

CMatrix forward_difference(std::size_t k, double dx);
CMatrix clamped_difference(std::size_t k, double dx);

// a: k x k conductivity with positive definite Hermitian part.
BlockSystem build_heat_block(std::size_t k, const CMatrix& a, double dx = 1.0);
// T: (k+1) x (k+1) Hermitian positive definite elasticity.
BlockSystem build_wave_block(std::size_t k, const CMatrix& T, double dx = 1.0);

struct MaxwellSystem {
  BlockSystem system;
  CoercivityCertificate certificate;
};

// eps, sigma: k x k; mu: (k+1) x (k+1). The certificate is taken at nu.
MaxwellSystem build_maxwell_block(std::size_t k, const CMatrix& eps, const CMatrix& mu, const CMatrix& sigma,
                                  double nu, double dx = 1.0);

}  // namespace evoq
