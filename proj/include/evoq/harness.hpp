#pragma once

// Property harnesses shared by `evoq verify` and the acceptance runner. Each
// returns measured values; thresholds are applied by the caller.

#include <cstdint>
#include <vector>

#include "evoq/solver.hpp"

namespace evoq {

struct SystemSpec {
  MaterialLaw law;
  SpatialOperator A;
  double nu;
  TimeGrid grid;
  double padding_fraction = 0.25;
};

struct NormBoundMeasure {
  double c_est = 0.0;
  double worst_forward = 0.0;  // max ||S f|| / ||f||
  double worst_adjoint = 0.0;
};

// Gaussian white-noise data at the matching weights.
NormBoundMeasure measure_norm_bound(const SystemSpec& s, int samples, std::uint64_t seed);

// max |<S f, g> - <f, S* g>| / (||f|| ||g||)
double measure_duality(const SystemSpec& s, int pairs, std::uint64_t seed);

// max |<L f, g> - <f, L* g>| / max(|<L f, g>|, ||f|| ||g||) on Gaussian packets
double measure_operator_pairing(const SystemSpec& s, int pairs, std::uint64_t seed);

struct CausalityMeasure {
  double spectral_forward = 0.0;  // leakage before the data starts
  double spectral_adjoint = 0.0;  // leakage after the data ends
  double wraparound_forward = 0.0;
  double wraparound_adjoint = 0.0;
  double stepper_forward = 0.0;   // -1 when the law has no stepper
  double stepper_adjoint = 0.0;
};

CausalityMeasure measure_causality(const SystemSpec& s, const WeightedSignal& forward_rhs,
                                   const WeightedSignal& adjoint_rhs);

double measure_reversal(const SystemSpec& s, int signals, std::uint64_t seed);

struct NuIndependenceMeasure {
  double forward = 0.0;
  double adjoint = 0.0;
};

// Same unweighted data at weights nu1 and nu2, compared on the middle 80% of the grid.
NuIndependenceMeasure measure_nu_independence(const SystemSpec& s, const CMatrix& forward_values,
                                              const CMatrix& adjoint_values, double nu1, double nu2);

struct OracleMeasure {
  double forward = 0.0;  // ||spectral - stepper|| / ||spectral||
  double adjoint = 0.0;
  double wraparound = 0.0;  // the larger of the two reported tolerances
};

OracleMeasure measure_stepper_agreement(const SystemSpec& s, const WeightedSignal& forward_rhs,
                                        const WeightedSignal& adjoint_rhs);

// sum_r exp(-((t - c_r) / s_r)^2 / 2) v_r exp(i w_r t), band-limited once s / dt is a few units.
CMatrix gaussian_packets(const TimeGrid& g, Eigen::Index m, double centre, double width, std::uint64_t seed,
                         int terms = 2);
// Compact C-infinity bump exp(1 - 1/(1 - s^2)) times a fixed direction.
CMatrix bump_values(const TimeGrid& g, const CVector& direction, double centre, double half_width);

}  // namespace evoq
