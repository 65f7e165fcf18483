#include "evoq/solver.hpp"

#include <cmath>

#include "evoq/parallel.hpp"

namespace evoq {

SpectralSolver::SpectralSolver(const MaterialLaw& law, const SpatialOperator& A, double nu, const TimeGrid& grid,
                               Direction dir, double padding_fraction, bool keep_factors)
    : law_(law),
      A_(A.matrix()),
      nu_(nu),
      grid_(grid),
      dir_(dir),
      pad_(padding_for(grid.size(), padding_fraction)),
      padded_(grid.extended(pad_.left, pad_.right)),
      m_(law.dim()) {
  if (law.dim() != A.dim()) throw Error(ErrorKind::Range, "law and spatial operator dimensions differ");
  xi_ = frequencies(padded_);
  // Skew A adds nothing to the Hermitian part, so the law alone certifies the block.
  cert_ = coercivity_on(law_, nu_, xi_);
  if (keep_factors) {
    lu_.resize(xi_.size());
    parallel_for(xi_.size(), [&](std::size_t k) { lu_[k].compute(block(k)); });
  }
}

CMatrix SpectralSolver::block(std::size_t k) const {
  const Complex z(nu_, xi_[k]);
  CMatrix K = z * law_(z) + A_;
  if (dir_ == Direction::Adjoint) return K.adjoint();
  return K;
}

void SpectralSolver::solve_hat(CMatrix& hat, Eigen::Index stride, Eigen::Index ncols) const {
  // hat has ncols columns; rows c * stride + k hold component c at bin k.
  const auto nbins = static_cast<std::size_t>(stride);
  parallel_for(nbins, [&](std::size_t k) {
    auto kk = static_cast<Eigen::Index>(k);
    CMatrix X(m_, ncols);
    for (Eigen::Index c = 0; c < m_; ++c) X.row(c) = hat.row(c * stride + kk);
    CMatrix Y;
    if (lu_.empty()) {
      Eigen::PartialPivLU<CMatrix> lu(block(k));
      Y = lu.solve(X);
    } else {
      Y = lu_[k].solve(X);
    }
    if (!Y.allFinite()) throw Error(ErrorKind::Solver, "block solve produced non-finite values");
    for (Eigen::Index c = 0; c < m_; ++c) hat.row(c * stride + kk) = Y.row(c);
  });
}

PaddedSignal SpectralSolver::solve(const WeightedSignal& rhs) const {
  if (rhs.grid() != grid_) throw Error(ErrorKind::Pairing, "rhs lives on a different grid");
  if (rhs.nu() != rhs_weight()) throw Error(ErrorKind::Pairing, "rhs has the wrong weight for this direction");
  if (rhs.dim() != m_) throw Error(ErrorKind::Range, "rhs dimension does not match the system");
  WeightedSignal p = zero_pad(rhs, pad_);
  CMatrix hat = p.flat();
  dft_rows(hat, false);
  const auto n = hat.rows();
  // n x m column-major is exactly the (c * n + k) layout
  CMatrix stacked = Eigen::Map<CMatrix>(hat.data(), n * m_, 1);
  solve_hat(stacked, n, 1);
  CMatrix out = Eigen::Map<CMatrix>(stacked.data(), n, m_);
  dft_rows(out, true);
  out /= static_cast<double>(n);
  return PaddedSignal{WeightedSignal(padded_, rhs.nu(), std::move(out)), pad_, grid_};
}

CMatrix SpectralSolver::solve_columns(const CMatrix& columns) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  const auto np = static_cast<Eigen::Index>(padded_.size());
  const auto left = static_cast<Eigen::Index>(pad_.left);
  if (columns.rows() != n * m_) throw Error(ErrorKind::Range, "column length does not match n * m");
  const auto K = columns.cols();
  CMatrix hat = CMatrix::Zero(np * m_, K);
  for (Eigen::Index col = 0; col < K; ++col) {
    CMatrix block_in = CMatrix::Zero(np, m_);
    for (Eigen::Index c = 0; c < m_; ++c) block_in.col(c).segment(left, n) = columns.col(col).segment(c * n, n);
    dft_rows(block_in, false);
    hat.col(col) = Eigen::Map<CVector>(block_in.data(), np * m_);
  }
  solve_hat(hat, np, K);
  CMatrix out(n * m_, K);
  for (Eigen::Index col = 0; col < K; ++col) {
    CMatrix block_out = Eigen::Map<CMatrix>(hat.col(col).data(), np, m_);
    dft_rows(block_out, true);
    block_out /= static_cast<double>(np);
    for (Eigen::Index c = 0; c < m_; ++c) out.col(col).segment(c * n, n) = block_out.col(c).segment(left, n);
  }
  return out;
}

namespace {

CMatrix system_block(const MaterialLaw& M, const CMatrix& A, double nu, double xi, bool adjoint) {
  const Complex z(nu, xi);
  CMatrix K = z * M(z) + A;
  return adjoint ? CMatrix(K.adjoint()) : K;
}

SolveReport run_spectral(const EvoProblem& p, Direction dir) {
  SpectralSolver solver(p.law, p.A, p.nu, p.rhs.grid(), dir, p.padding_fraction, false);
  PaddedSignal u = solver.solve(p.rhs);

  SolveReport rep{u.interior(), 0.0, 0.0, 0.0, 0.0, solver.certificate(), dir};

  // residual of the assembled operator on the padded grid
  const MaterialLaw& M = p.law;
  const CMatrix& A = p.A.matrix();
  const double nu = p.nu;
  const bool adj = dir == Direction::Adjoint;
  WeightedSignal Ku = spectral_multiplier(
      u.padded, [&](double xi) { return system_block(M, A, nu, xi, adj); }, SpectralOptions{0.0});
  WeightedSignal fpad = zero_pad(p.rhs, u.pad);
  rep.residual_rel = (Ku - fpad).norm() / std::max(fpad.norm(), 1e-300);
  rep.norm_ratio = rep.solution.norm() / std::max(p.rhs.norm(), 1e-300);

  const TimeGrid& g = p.rhs.grid();
  if (dir == Direction::Forward) {
    std::size_t a = support_begin(p.rhs);
    rep.support_leakage = a < g.size() ? support_leakage(rep.solution, SupportWindow::at_least(g.time(a))) : 0.0;
    rep.wraparound_tolerance = std::max(u.left_leakage(), kRoundoffFloor);
  } else {
    std::size_t b = support_end(p.rhs);
    double T = b < g.size() ? g.time(b) : g.t_max();
    rep.support_leakage = b > 0 ? support_leakage(rep.solution, SupportWindow::at_most(T)) : 0.0;
    rep.wraparound_tolerance = std::max(u.right_leakage(), kRoundoffFloor);
  }
  return rep;
}

}  // namespace

SolveReport solve_forward(const EvoProblem& p) { return run_spectral(p, Direction::Forward); }
SolveReport solve_adjoint(const EvoProblem& p) { return run_spectral(p, Direction::Adjoint); }
SolveReport solve(const EvoProblem& p) { return run_spectral(p, p.direction); }

WeightedSignal apply_evolution_operator(const MaterialLaw& M, const SpatialOperator& A, const WeightedSignal& f,
                                        const SpectralOptions& opt) {
  if (f.dim() != M.dim() || M.dim() != A.dim()) throw Error(ErrorKind::Range, "dimension mismatch");
  const double nu = f.nu();
  const CMatrix& Am = A.matrix();
  return spectral_multiplier(f, [&](double xi) { return system_block(M, Am, nu, xi, false); }, opt);
}

WeightedSignal apply_adjoint_system_operator(const MaterialLaw& M, const SpatialOperator& A, const WeightedSignal& g,
                                             const SpectralOptions& opt) {
  if (g.dim() != M.dim() || M.dim() != A.dim()) throw Error(ErrorKind::Range, "dimension mismatch");
  const double nu = -g.nu();
  const CMatrix& Am = A.matrix();
  return spectral_multiplier(g, [&](double xi) { return system_block(M, Am, nu, xi, true); }, opt);
}

namespace {

// M0 (phi' + nu phi) + (M1 + A) phi = f by the trapezoidal rule, phi = 0 up to start.
CMatrix trapezoid_march(const CMatrix& M0, const CMatrix& M1, const CMatrix& A, double nu, double h, const CMatrix& f,
                        std::size_t start) {
  const CMatrix K = nu * M0 + M1 + A;
  const CMatrix E = M0 / h + 0.5 * K;
  const CMatrix F = M0 / h - 0.5 * K;
  Eigen::PartialPivLU<CMatrix> lu(E);
  if (!(lu.rcond() > 1e-13)) throw Error(ErrorKind::Oracle, "trapezoidal step matrix is singular");
  const auto n = f.rows();
  CMatrix phi = CMatrix::Zero(n, f.cols());
  for (auto j = static_cast<Eigen::Index>(start); j + 1 < n; ++j) {
    CVector rhs = F * phi.row(j).transpose() + 0.5 * (f.row(j) + f.row(j + 1)).transpose();
    phi.row(j + 1) = lu.solve(rhs).transpose();
  }
  return phi;
}

}  // namespace

WeightedSignal timestep_oracle(const EvoProblem& p, std::size_t start) {
  const MaterialLaw& M = p.law;
  if (!M.is_finite_sum() || M.conjugated_argument() || M.order() > 1)
    throw Error(ErrorKind::UnsupportedLaw, "time stepping needs a law M_0 + z^{-1} M_1");
  if (M.dim() != p.A.dim() || p.rhs.dim() != M.dim()) throw Error(ErrorKind::Range, "dimension mismatch");
  const CMatrix& M0 = M.coefficients()[0];
  const CMatrix M1 = M.order() == 1 ? M.coefficients()[1] : CMatrix::Zero(M.dim(), M.dim());
  const double h = p.rhs.grid().dt();
  if (start >= p.rhs.size()) throw Error(ErrorKind::Range, "start index past the grid");

  if (p.direction == Direction::Forward) {
    if (p.rhs.nu() != p.nu) throw Error(ErrorKind::Pairing, "forward rhs must carry weight nu");
    CMatrix phi = trapezoid_march(M0, M1, p.A.matrix(), p.nu, h, p.rhs.flat(), start);
    return WeightedSignal(p.rhs.grid(), p.nu, std::move(phi));
  }
  if (p.rhs.nu() != -p.nu) throw Error(ErrorKind::Pairing, "adjoint rhs must carry weight -nu");
  // s = -t turns -d_{t,-nu} M0^* + M1^* - A into a forward march with (M0^*, M1^*, -A).
  CMatrix reversed = p.rhs.flat().colwise().reverse();
  CMatrix phi = trapezoid_march(M0.adjoint(), M1.adjoint(), -p.A.matrix(), p.nu, h, reversed, start);
  return WeightedSignal(p.rhs.grid(), -p.nu, phi.colwise().reverse());
}

ReversalReport time_reversal_conjugation_check(const MaterialLaw& M, const SpatialOperator& A,
                                               const std::vector<WeightedSignal>& tests, double padding_fraction) {
  ReversalReport rep;
  if (tests.empty()) return rep;
  const MaterialLaw Mr = reversed_dual_law(M);
  const SpatialOperator Ar = negate(A);
  const SpectralOptions opt{padding_fraction};
  for (const auto& g : tests) {
    if (!g.grid().symmetric()) throw Error(ErrorKind::UnsupportedGrid, "time reversal needs t_min = -t_max");
    const double nu = -g.nu();
    WeightedSignal a = apply_adjoint_system_operator(M, A, g, opt);
    WeightedSignal b = time_reverse(apply_evolution_operator(Mr, Ar, time_reverse(g), opt));
    rep.operator_discrepancy = std::max(rep.operator_discrepancy, (a - b).norm() / std::max(a.norm(), 1e-300));

    EvoProblem adj{nu, M, A, g, Direction::Adjoint, padding_fraction};
    EvoProblem fwd{nu, Mr, Ar, time_reverse(g), Direction::Forward, padding_fraction};
    WeightedSignal sa = solve_adjoint(adj).solution;
    WeightedSignal sb = time_reverse(solve_forward(fwd).solution);
    rep.solution_discrepancy = std::max(rep.solution_discrepancy, (sa - sb).norm() / std::max(sa.norm(), 1e-300));
  }
  return rep;
}

NuIndependenceReport nu_independence_check(const MaterialLaw& M, const SpatialOperator& A, const TimeGrid& grid,
                                           const CMatrix& rhs_values, double nu1, double nu2, Direction dir,
                                           double window_lo, double window_hi, double padding_fraction) {
  if (!(window_lo < window_hi)) throw Error(ErrorKind::Range, "empty comparison window");
  const std::size_t lo = grid.first_index_at_or_after(window_lo);
  const std::size_t hi = grid.first_index_at_or_after(window_hi);
  if (lo >= hi) throw Error(ErrorKind::Range, "comparison window holds no samples");

  auto physical = [&](double nu) {
    const double w = dir == Direction::Forward ? nu : -nu;
    WeightedSignal f = WeightedSignal::from_values(grid, w, rhs_values);
    EvoProblem p{nu, M, A, f, dir, padding_fraction};
    WeightedSignal u = solve(p).solution;
    CMatrix out(static_cast<Eigen::Index>(hi - lo), u.dim());
    for (std::size_t j = lo; j < hi; ++j)
      out.row(static_cast<Eigen::Index>(j - lo)) = std::exp(w * grid.time(j)) * u.flat().row(static_cast<Eigen::Index>(j));
    return out;
  };
  CMatrix u1 = physical(nu1);
  CMatrix u2 = physical(nu2);
  NuIndependenceReport rep{nu1, nu2, window_lo, window_hi, 0.0};
  rep.max_rel_difference = (u1 - u2).cwiseAbs().maxCoeff() / std::max(u1.cwiseAbs().maxCoeff(), 1e-300);
  return rep;
}

}  // namespace evoq
