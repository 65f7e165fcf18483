#pragma once

/*
 * Null controllability of evolutionary problems.
 *
 * Supported variant: find G so that S_nu(F + B G) vanishes after T. On the
 * grid this is the linear system L_G g = -L_F f between the end maps
 *   L_F : F -> samples t_j >= T of S_nu F
 *   L_G : G -> samples t_j >= T of S_nu B G
 * and controllability of every F is the range inclusion ran L_F in ran L_G.
 * The dual side is the observability constant
 *   sup ||S*_nu 1_{>=T} x|| / ||B^* S*_nu 1_{>=T} x||.
 *
 * Pointwise variant, for laws M_0 + z^{-1} M_1: an initial state U0 enters at
 * t = 0 and the target is M_0 U(T) = 0 with G supported in [0, inf).
 *
 * Signals are vectorised component-major (index c * n + j) throughout.
 * Inclusion and feasibility are decided against an SVD cutoff of
 * rank_cutoff * sigma_max, reported with every result.
 */

#include <limits>
#include <optional>

#include "evoq/solver.hpp"

namespace evoq {

struct ControlOptions {
  double rank_cutoff = 1e-10;
  double inclusion_tol = 1e-8;      // relative residual of a range projection
  double feasibility_tol = 1e-6;    // supported variant
  double pointwise_tol = 1e-8;      // ||Phi G - b|| < tol (1 + ||b||)
  std::size_t size_guard = 4'000'000;
  int power_iterations = 200;
  double power_tol = 1e-8;
  int cgls_iterations = 2000;
  double cgls_tol = 1e-12;
};

struct DouglasResult {
  bool included = false;
  // The four equivalent conditions, each decided on its own route:
  // (i) A A^* <= c^2 B B^* for some c, (ii) ran A in ran B, (iii) A = B C, (iv) ||A^* x|| <= c ||B^* x||.
  bool cond_i = false, cond_ii = false, cond_iii = false, cond_iv = false;
  bool conditions_agree = false;
  CMatrix factor;        // minimum-norm C with A ~ B C
  double factor_residual = 0.0;  // ||A - B C|| / ||A||
  CVector witness;       // B^* x ~ 0 with A^* x != 0, when not included
  double constant = 0.0; // ||C||, infinite when not included
  std::size_t rank = 0;
  double cutoff = 0.0;
};

DouglasResult douglas_check(const CMatrix& A, const CMatrix& B, const ControlOptions& opt = {});

enum class ControlVariant { Supported, Pointwise };

struct ControlProblem {
  EvoProblem base;  // forward; base.rhs is F for the supported variant
  CMatrix B;        // m x q
  double T = 0.0;
  ControlVariant variant = ControlVariant::Supported;
  CVector U0;       // pointwise variant
};

struct Endmaps {
  CMatrix L_F;  // (n_post m) x (n m)
  CMatrix L_G;  // (n_post m) x (n q)
  std::size_t post_begin = 0;
  std::size_t n_post = 0;
  double linearity_defect = 0.0;  // random probe against a direct solve
};

// Index of the first sample at or after T; throws when T is outside the grid.
std::size_t post_index(const ControlProblem& cp);

Endmaps assemble_endmaps(const ControlProblem& cp, const ControlOptions& opt = {});
// Matrix of S*_nu o r_{>=T,-nu}: post-T samples at -nu to full adjoint solutions.
CMatrix assemble_adjoint_endmap(const ControlProblem& cp, const ControlOptions& opt = {});

// Block multiplier I_n (x) B on component-major vectors.
CVector lift_input(const CMatrix& B, std::size_t n, const CVector& g);
CVector lift_adjoint(const CMatrix& B, std::size_t n, const CVector& y);

struct ControlResult {
  WeightedSignal G;
  bool feasible = false;
  double terminal_residual = 0.0;  // closed-loop ||r_{>=T} S(F + BG)|| or ||M_0 U(T)||
  double relative_residual = 0.0;  // algebraic residual of the synthesis system
  double control_norm = 0.0;
  std::size_t rank = 0;
  double cutoff = 0.0;
  CVector M0U_at_T = {};  // pointwise variant
  double hminus_norm = 0.0;  // ||(I + A^*A)^{-1/2} M_0 U(T)||
};

ControlResult null_control(const ControlProblem& cp, const ControlOptions& opt = {});
ControlResult null_control(const ControlProblem& cp, const Endmaps& maps, const ControlOptions& opt = {});

enum class ObservabilityMethod { GeneralizedSvd, PowerIteration };

struct ObservabilityEstimate {
  double c_obs = 0.0;
  bool infinite = false;
  WeightedSignal witness;  // at -nu, supported after T
  ObservabilityMethod method = ObservabilityMethod::GeneralizedSvd;
  std::size_t rank = 0;
  int iterations = 0;
};

// Dense when the end maps fit under the size guard, power iteration otherwise
// (or when forced).
ObservabilityEstimate observability_constant(const ControlProblem& cp, const ControlOptions& opt = {},
                                             std::optional<ObservabilityMethod> force = std::nullopt);

// ||adjoint end map x|| / ||B^* adjoint end map x|| for a post-T signal x.
double observability_ratio(const ControlProblem& cp, const WeightedSignal& x);

struct DualityVerdict {
  bool feasible = false;       // null control for every probe F
  bool included = false;       // douglas_check on the end maps
  bool finite = false;         // observability constant
  bool agree = false;
  double c_obs = 0.0;
  double douglas_constant = 0.0;
  double worst_probe_residual = 0.0;
  double adjoint_factorization_defect = 0.0;
};

// Runs the three routes on one instance; probes are random F at weight nu.
DualityVerdict certify_duality(const ControlProblem& cp, int probes = 4, std::uint64_t seed = 1,
                               const ControlOptions& opt = {});

// Pointwise variant.
struct PointwiseSolution {
  WeightedSignal U;
  CVector M0U_at_T = {};
  double hminus_norm = 0.0;
  double max_jump = 0.0;  // largest step of M_0 V between adjacent samples
};

PointwiseSolution pointwise_solve(const ControlProblem& cp, const WeightedSignal& G);
// The same state with the initial value entering as a one-cell impulse of
// mass M_0 U0 at t = 0, marched from the left edge.
WeightedSignal pointwise_impulse_solve(const ControlProblem& cp, const WeightedSignal& G);

struct PointwiseSystem {
  CMatrix Phi;      // m x (N q): G samples on [0, T] to M_0 (S B G)(T)
  CVector b;        // target for the given U0
  CMatrix target_map;  // m x m: U0 -> b(U0)
  std::size_t first = 0;  // grid index of the first unknown
  std::size_t count = 0;  // unknown samples per component
};

PointwiseSystem assemble_pointwise(const ControlProblem& cp);
ControlResult pointwise_null_control(const ControlProblem& cp, const ControlOptions& opt = {});

struct PointwiseCertificate {
  bool basis_feasible = false;
  bool included = false;
  bool agree = false;
};

// Feasibility for every unit U0 against douglas_check(target_map, Phi).
PointwiseCertificate certify_pointwise(const ControlProblem& cp, const ControlOptions& opt = {});

}  // namespace evoq
