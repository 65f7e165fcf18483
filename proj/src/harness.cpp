#include "evoq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace evoq {

namespace {

constexpr int kBatch = 16;

CMatrix noise(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  CMatrix X(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) X(i, j) = Complex(N(rng), N(rng));
  return X;
}

double flat_norm(const TimeGrid& g, const CVector& v) { return std::sqrt(g.dt()) * v.norm(); }

bool has_stepper(const MaterialLaw& law) { return law.is_finite_sum() && law.order() <= 1; }

}  // namespace

NormBoundMeasure measure_norm_bound(const SystemSpec& s, int samples, std::uint64_t seed) {
  SpectralSolver fwd(s.law, s.A, s.nu, s.grid, Direction::Forward, s.padding_fraction);
  SpectralSolver adj(s.law, s.A, s.nu, s.grid, Direction::Adjoint, s.padding_fraction);
  NormBoundMeasure out;
  out.c_est = fwd.certificate().c_est;
  std::mt19937_64 rng(seed);
  const Eigen::Index len = static_cast<Eigen::Index>(s.grid.size()) * s.law.dim();
  for (int done = 0; done < samples; done += kBatch) {
    const int k = std::min(kBatch, samples - done);
    CMatrix f = noise(len, k, rng), h = noise(len, k, rng);
    CMatrix u = fwd.solve_columns(f), v = adj.solve_columns(h);
    for (int c = 0; c < k; ++c) {
      out.worst_forward = std::max(out.worst_forward, u.col(c).norm() / f.col(c).norm());
      out.worst_adjoint = std::max(out.worst_adjoint, v.col(c).norm() / h.col(c).norm());
    }
  }
  return out;
}

double measure_duality(const SystemSpec& s, int pairs, std::uint64_t seed) {
  SpectralSolver fwd(s.law, s.A, s.nu, s.grid, Direction::Forward, s.padding_fraction);
  SpectralSolver adj(s.law, s.A, s.nu, s.grid, Direction::Adjoint, s.padding_fraction);
  std::mt19937_64 rng(seed);
  const Eigen::Index len = static_cast<Eigen::Index>(s.grid.size()) * s.law.dim();
  const double dt = s.grid.dt();
  double worst = 0.0;
  for (int done = 0; done < pairs; done += kBatch) {
    const int k = std::min(kBatch, pairs - done);
    CMatrix f = noise(len, k, rng), h = noise(len, k, rng);
    CMatrix u = fwd.solve_columns(f), v = adj.solve_columns(h);
    for (int c = 0; c < k; ++c) {
      // flat coordinates turn the nu-pairing into a plain sum
      Complex lhs = dt * u.col(c).dot(h.col(c));
      Complex rhs = dt * f.col(c).dot(v.col(c));
      double scale = flat_norm(s.grid, f.col(c)) * flat_norm(s.grid, h.col(c));
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

double measure_operator_pairing(const SystemSpec& s, int pairs, std::uint64_t seed) {
  SpectralOptions opt;
  opt.padding_fraction = s.padding_fraction;
  const double mid = 0.5 * (s.grid.t_min() + s.grid.t_max());
  const double width = 0.08 * (s.grid.t_max() - s.grid.t_min());
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    auto f = WeightedSignal::from_values(s.grid, s.nu, gaussian_packets(s.grid, s.law.dim(), mid, width, seed + 2 * p));
    auto h = WeightedSignal::from_values(s.grid, -s.nu,
                                         gaussian_packets(s.grid, s.law.dim(), mid, width, seed + 2 * p + 1));
    Complex lhs = nu_product(apply_evolution_operator(s.law, s.A, f, opt), h);
    Complex rhs = nu_product(f, apply_adjoint_system_operator(s.law, s.A, h, opt));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), f.norm() * h.norm()));
  }
  return worst;
}

CausalityMeasure measure_causality(const SystemSpec& s, const WeightedSignal& forward_rhs,
                                   const WeightedSignal& adjoint_rhs) {
  CausalityMeasure out;
  EvoProblem p{s.nu, s.law, s.A, forward_rhs, Direction::Forward, s.padding_fraction};
  EvoProblem q{s.nu, s.law, s.A, adjoint_rhs, Direction::Adjoint, s.padding_fraction};
  auto fr = solve_forward(p);
  auto ar = solve_adjoint(q);
  out.spectral_forward = fr.support_leakage;
  out.wraparound_forward = fr.wraparound_tolerance;
  out.spectral_adjoint = ar.support_leakage;
  out.wraparound_adjoint = ar.wraparound_tolerance;
  out.stepper_forward = out.stepper_adjoint = -1.0;
  if (has_stepper(s.law)) {
    const double start = s.grid.time(support_begin(forward_rhs));
    const double stop = s.grid.time(support_end(adjoint_rhs) - 1);
    out.stepper_forward = support_leakage(timestep_oracle(p), SupportWindow::at_least(start));
    out.stepper_adjoint = support_leakage(timestep_oracle(q), SupportWindow::at_most(stop));
  }
  return out;
}

double measure_reversal(const SystemSpec& s, int signals, std::uint64_t seed) {
  const double width = 0.05 * (s.grid.t_max() - s.grid.t_min());
  std::vector<WeightedSignal> tests;
  for (int i = 0; i < signals; ++i)
    tests.push_back(WeightedSignal::from_values(s.grid, -s.nu, gaussian_packets(s.grid, s.law.dim(), 0.0, width, seed + i)));
  return time_reversal_conjugation_check(s.law, s.A, tests, s.padding_fraction).max();
}

NuIndependenceMeasure measure_nu_independence(const SystemSpec& s, const CMatrix& forward_values,
                                              const CMatrix& adjoint_values, double nu1, double nu2) {
  const double span = s.grid.t_max() - s.grid.t_min();
  const double lo = s.grid.t_min() + 0.1 * span, hi = s.grid.t_max() - 0.1 * span;
  NuIndependenceMeasure out;
  out.forward = nu_independence_check(s.law, s.A, s.grid, forward_values, nu1, nu2, Direction::Forward, lo, hi,
                                      s.padding_fraction)
                    .max_rel_difference;
  out.adjoint = nu_independence_check(s.law, s.A, s.grid, adjoint_values, nu1, nu2, Direction::Adjoint, lo, hi,
                                      s.padding_fraction)
                    .max_rel_difference;
  return out;
}

OracleMeasure measure_stepper_agreement(const SystemSpec& s, const WeightedSignal& forward_rhs,
                                        const WeightedSignal& adjoint_rhs) {
  EvoProblem p{s.nu, s.law, s.A, forward_rhs, Direction::Forward, s.padding_fraction};
  EvoProblem q{s.nu, s.law, s.A, adjoint_rhs, Direction::Adjoint, s.padding_fraction};
  auto fr = solve_forward(p);
  auto ar = solve_adjoint(q);
  OracleMeasure out;
  out.forward = (fr.solution - timestep_oracle(p)).norm() / fr.solution.norm();
  out.adjoint = (ar.solution - timestep_oracle(q)).norm() / ar.solution.norm();
  out.wraparound = std::max(fr.wraparound_tolerance, ar.wraparound_tolerance);
  return out;
}

CMatrix gaussian_packets(const TimeGrid& g, Eigen::Index m, double centre, double width, std::uint64_t seed,
                         int terms) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), m);
  for (int r = 0; r < terms; ++r) {
    CMatrix v = noise(m, 1, rng);
    double w = 1.5 * U(rng);
    double c = centre + 0.5 * width * U(rng);
    double s = width * (0.8 + 0.2 * U(rng));
    for (std::size_t j = 0; j < g.size(); ++j) {
      double t = g.time(j), e = (t - c) / s;
      out.row(static_cast<Eigen::Index>(j)) += (std::exp(-0.5 * e * e) * std::polar(1.0, w * t)) * v.transpose();
    }
  }
  return out;
}

CMatrix bump_values(const TimeGrid& g, const CVector& direction, double centre, double half_width) {
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), direction.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    double s = (g.time(j) - centre) / half_width;
    if (std::abs(s) < 1.0) out.row(static_cast<Eigen::Index>(j)) = std::exp(1.0 - 1.0 / (1.0 - s * s)) * direction.transpose();
  }
  return out;
}

}  // namespace evoq
