#pragma once

/*
 * Evolutionary problems (d_{t,nu} M(d_{t,nu}) + A) u = f and their nu-adjoints.
 *
 * The primary path is spectral: on the zero-padded grid every frequency bin
 * gets an LU solve of ((i xi + nu) M(i xi + nu) + A) u_k = f_k. The adjoint
 * problem lives at weight -nu and uses the conjugate transpose block
 * -(i xi - nu) M^*(i xi + nu) - A, which makes the discrete pair exactly
 * adjoint in the nu-product.
 *
 * timestep_oracle is an independent implicit trapezoidal march for laws
 * M_0 + z^{-1} M_1, used to cross-check the spectral path.
 */

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/LU>

#include "evoq/material.hpp"
#include "evoq/spatial.hpp"
#include "evoq/transform.hpp"

namespace evoq {

enum class Direction { Forward, Adjoint };

struct EvoProblem {
  double nu;
  MaterialLaw law;
  SpatialOperator A;
  WeightedSignal rhs;  // weight nu for Forward, -nu for Adjoint
  Direction direction = Direction::Forward;
  double padding_fraction = 0.25;
};

struct SolveReport {
  WeightedSignal solution;
  double residual_rel = 0.0;
  double norm_ratio = 0.0;
  // Solution mass before the rhs support starts (forward) or after it ends (adjoint).
  double support_leakage = 0.0;
  // Padding content on the side the periodic tail wraps into, floored at the
  // roundoff level.
  double wraparound_tolerance = 0.0;
  CoercivityCertificate certificate;
  Direction direction = Direction::Forward;
};

inline constexpr double kRoundoffFloor = 1e-12;

// Factorises the per-frequency blocks of one problem once; solve() can then be
// called for many right-hand sides.
class SpectralSolver {
public:
  SpectralSolver(const MaterialLaw& law, const SpatialOperator& A, double nu, const TimeGrid& grid, Direction dir,
                 double padding_fraction = 0.25, bool keep_factors = true);

  const CoercivityCertificate& certificate() const noexcept { return cert_; }
  Padding padding() const noexcept { return pad_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  const TimeGrid& padded_grid() const noexcept { return padded_; }
  Direction direction() const noexcept { return dir_; }
  double nu() const noexcept { return nu_; }
  Eigen::Index dim() const noexcept { return m_; }
  double rhs_weight() const noexcept { return dir_ == Direction::Forward ? nu_ : -nu_; }

  // Operator block at padded bin k.
  CMatrix block(std::size_t k) const;

  PaddedSignal solve(const WeightedSignal& rhs) const;
  // Each column is a vectorised rhs on the unpadded grid; returns vectorised
  // solutions on the unpadded grid.
  CMatrix solve_columns(const CMatrix& columns) const;

private:
  void solve_hat(CMatrix& hat_block, Eigen::Index stride, Eigen::Index ncols) const;

  MaterialLaw law_;
  CMatrix A_;
  double nu_;
  TimeGrid grid_;
  Direction dir_;
  Padding pad_;
  TimeGrid padded_;
  Eigen::Index m_;
  std::vector<double> xi_;
  std::vector<Eigen::PartialPivLU<CMatrix>> lu_;
  CoercivityCertificate cert_;
};

SolveReport solve_forward(const EvoProblem& p);
SolveReport solve_adjoint(const EvoProblem& p);
SolveReport solve(const EvoProblem& p);

// (d_{t,nu} M(d_{t,nu}) + A) f at the weight of f.
WeightedSignal apply_evolution_operator(const MaterialLaw& M, const SpatialOperator& A, const WeightedSignal& f,
                                        const SpectralOptions& opt = {});
// (-d_{t,-nu} M^*(d_{t,nu}) - A) g for g at weight -nu.
WeightedSignal apply_adjoint_system_operator(const MaterialLaw& M, const SpatialOperator& A, const WeightedSignal& g,
                                             const SpectralOptions& opt = {});

// Trapezoidal march in flat coordinates from a zero state. Forward problems
// start at `start` (default: the left edge); adjoint problems run backwards
// from the right edge.
WeightedSignal timestep_oracle(const EvoProblem& p, std::size_t start = 0);

struct ReversalReport {
  double operator_discrepancy = 0.0;
  double solution_discrepancy = 0.0;
  double max() const { return std::max(operator_discrepancy, solution_discrepancy); }
};

// Compares the adjoint system with T o (forward system of sum z^{-k} M_k^*
// and -A) o T on test signals at weight -nu. Needs a symmetric grid.
ReversalReport time_reversal_conjugation_check(const MaterialLaw& M, const SpatialOperator& A,
                                               const std::vector<WeightedSignal>& tests, double padding_fraction = 0.25);

struct NuIndependenceReport {
  double nu1 = 0.0;
  double nu2 = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  double max_rel_difference = 0.0;
};

// Solves with the same unweighted rhs samples at nu1 and nu2 and compares
// exp(nu t) phi on [window_lo, window_hi]. The rhs weight is nu for forward
// problems and -nu for adjoint ones.
NuIndependenceReport nu_independence_check(const MaterialLaw& M, const SpatialOperator& A, const TimeGrid& grid,
                                           const CMatrix& rhs_values, double nu1, double nu2, Direction dir,
                                           double window_lo, double window_hi, double padding_fraction = 0.25);

}  // namespace evoq
