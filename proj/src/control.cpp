#include "evoq/control.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "evoq/parallel.hpp"

namespace evoq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double spectral_norm(const CMatrix& X) {
  if (X.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(X);
  return svd.singularValues()(0);
}

CVector top_left_singular_vector(const CMatrix& K) {
  Eigen::BDCSVD<CMatrix> svd(K, Eigen::ComputeThinU);
  return svd.matrixU().col(0);
}

// Minimum-norm solution of X g = y with singular values below the cutoff dropped.
struct Pinv {
  CMatrix U, V;
  Eigen::VectorXd s;
  std::size_t rank = 0;
  double cutoff = 0.0;

  Pinv(const CMatrix& X, double rel) {
    Eigen::BDCSVD<CMatrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    cutoff = rel * smax;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > cutoff && s(i) > 0.0) ++rank;
    auto r = static_cast<Eigen::Index>(rank);
    U = svd.matrixU().leftCols(r);
    V = svd.matrixV().leftCols(r);
    s.conservativeResize(r);
  }

  CVector apply(const CVector& y) const {
    CVector c = U.adjoint() * y;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) /= s(i);
    return V * c;
  }
};

}  // namespace

DouglasResult douglas_check(const CMatrix& A, const CMatrix& B, const ControlOptions& opt) {
  if (A.rows() != B.rows()) throw Error(ErrorKind::Range, "douglas_check needs matrices with equal row counts");
  if (!A.allFinite() || !B.allFinite()) throw Error(ErrorKind::Range, "douglas_check needs finite matrices");
  const auto p = A.rows();
  const double normA = A.norm();
  DouglasResult r;

  // (ii) range projector from the SVD of B
  Eigen::BDCSVD<CMatrix> svd(B, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  r.cutoff = opt.rank_cutoff * (s.size() ? s(0) : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > r.cutoff && s(i) > 0.0) ++r.rank;
  const auto rk = static_cast<Eigen::Index>(r.rank);
  CMatrix Ur = svd.matrixU().leftCols(rk);
  double outside = (A - Ur * (Ur.adjoint() * A)).norm();
  r.cond_ii = outside <= opt.inclusion_tol * normA;

  // (iii) minimum-norm factor from a complete orthogonal decomposition
  if (B.cwiseAbs().maxCoeff() == 0.0 || B.cols() == 0) {
    r.factor = CMatrix::Zero(B.cols(), A.cols());
  } else {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
    cod.setThreshold(opt.rank_cutoff);
    cod.compute(B);
    r.factor = cod.solve(A);
  }
  r.factor_residual = normA > 0.0 ? (A - B * r.factor).norm() / normA : 0.0;
  r.cond_iii = r.factor_residual <= opt.inclusion_tol;

  // (iv) ||A^* x|| <= c ||B^* x||: kernel of B^* from pivoted QR, then the
  // largest generalized singular value on ran B
  double c_iv = 0.0;
  {
    Eigen::ColPivHouseholderQR<CMatrix> qr;
    qr.setThreshold(opt.rank_cutoff);
    qr.compute(B);
    const Eigen::Index r4 = B.cwiseAbs().maxCoeff() == 0.0 ? 0 : qr.rank();
    CMatrix Q = qr.householderQ() * CMatrix::Identity(p, p);
    CMatrix K = Q.rightCols(p - r4).adjoint() * A;
    r.cond_iv = K.norm() <= opt.inclusion_tol * normA;
    if (r.cond_iv && r4 > 0) {
      // B^* Q_r y = P R_r^* y, and ||R_r^* y|| = ||T y|| for the QR factor T of R_r^*
      CMatrix Rr = qr.matrixR().topRows(r4).triangularView<Eigen::Upper>();
      Eigen::HouseholderQR<CMatrix> wq(Rr.adjoint());
      CMatrix T = wq.matrixQR().topRows(r4).triangularView<Eigen::Upper>();
      CMatrix X = A.adjoint() * Q.leftCols(r4);
      CMatrix Yh = T.adjoint().triangularView<Eigen::Lower>().solve(X.adjoint());
      c_iv = spectral_norm(Yh);
    }
  }

  // (i) some c with A A^* <= c^2 B B^* exists iff ker B^* lies in ker A^*; kernel from full-pivot LU
  {
    Eigen::FullPivLU<CMatrix> lu;
    lu.setThreshold(opt.rank_cutoff);
    lu.compute(B.adjoint());
    CMatrix K = B.cwiseAbs().maxCoeff() == 0.0 || B.cols() == 0 ? CMatrix(CMatrix::Identity(p, p)) : CMatrix(lu.kernel());
    double seen = 0.0;
    for (Eigen::Index k = 0; k < K.cols(); ++k) {
      double nk = K.col(k).norm();
      if (nk > 0.0) seen = std::max(seen, (A.adjoint() * K.col(k)).norm() / nk);
    }
    r.cond_i = seen <= opt.inclusion_tol * normA;
  }

  r.included = r.cond_ii;
  r.conditions_agree = r.cond_i == r.cond_ii && r.cond_ii == r.cond_iii && r.cond_iii == r.cond_iv;
  r.constant = r.included ? c_iv : kInf;
  if (!r.included) {
    CMatrix Uperp = svd.matrixU().rightCols(p - rk);
    r.witness = Uperp * top_left_singular_vector(Uperp.adjoint() * A);
  }
  return r;
}

// ---------------------------------------------------------------------------
// end maps

namespace {

const TimeGrid& grid_of(const ControlProblem& cp) { return cp.base.rhs.grid(); }

void require_inputs(const ControlProblem& cp) {
  const auto m = cp.base.law.dim();
  if (cp.B.rows() != m || cp.B.cols() < 1) throw Error(ErrorKind::Range, "B must be m x q with q >= 1");
  if (!cp.B.allFinite()) throw Error(ErrorKind::Range, "B has non-finite entries");
  if (cp.base.A.dim() != m || cp.base.rhs.dim() != m) throw Error(ErrorKind::Range, "dimension mismatch");
  if (cp.base.rhs.nu() != cp.base.nu) throw Error(ErrorKind::Pairing, "F must carry weight nu");
}

SpectralSolver make_solver(const ControlProblem& cp, Direction dir) {
  return SpectralSolver(cp.base.law, cp.base.A, cp.base.nu, grid_of(cp), dir, cp.base.padding_fraction);
}

// rows c * n + post .. of full-grid columns, stacked component-major
CMatrix post_rows(const CMatrix& full, Eigen::Index n, Eigen::Index m, Eigen::Index post) {
  const Eigen::Index np = n - post;
  CMatrix out(np * m, full.cols());
  for (Eigen::Index c = 0; c < m; ++c) out.middleRows(c * np, np) = full.middleRows(c * n + post, np);
  return out;
}

CMatrix embed_post(const CMatrix& post_cols, Eigen::Index n, Eigen::Index m, Eigen::Index post) {
  const Eigen::Index np = n - post;
  CMatrix out = CMatrix::Zero(n * m, post_cols.cols());
  for (Eigen::Index c = 0; c < m; ++c) out.middleRows(c * n + post, np) = post_cols.middleRows(c * np, np);
  return out;
}

constexpr Eigen::Index kBatch = 64;

// Columns produce(first, count) pushed through the solver in batches.
template <class Produce>
CMatrix solve_batched(const SpectralSolver& solver, Eigen::Index total, Eigen::Index rows_out, Produce produce,
                      const std::function<CMatrix(const CMatrix&)>& keep) {
  CMatrix out(rows_out, total);
  for (Eigen::Index first = 0; first < total; first += kBatch) {
    const Eigen::Index count = std::min(kBatch, total - first);
    out.middleCols(first, count) = keep(solver.solve_columns(produce(first, count)));
  }
  return out;
}

}  // namespace

CVector lift_input(const CMatrix& B, std::size_t n, const CVector& g) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (g.size() != nn * B.cols()) throw Error(ErrorKind::Range, "control vector has the wrong length");
  CMatrix G = Eigen::Map<const CMatrix>(g.data(), nn, B.cols());
  CMatrix out = G * B.transpose();
  return Eigen::Map<CVector>(out.data(), out.size());
}

CVector lift_adjoint(const CMatrix& B, std::size_t n, const CVector& y) {
  const auto nn = static_cast<Eigen::Index>(n);
  if (y.size() != nn * B.rows()) throw Error(ErrorKind::Range, "state vector has the wrong length");
  CMatrix Y = Eigen::Map<const CMatrix>(y.data(), nn, B.rows());
  CMatrix out = Y * B.conjugate();
  return Eigen::Map<CVector>(out.data(), out.size());
}

std::size_t post_index(const ControlProblem& cp) {
  const TimeGrid& g = grid_of(cp);
  if (!(cp.T >= g.t_min() && cp.T <= g.t_max())) throw Error(ErrorKind::Range, "T lies outside the grid");
  std::size_t j = g.first_index_at_or_after(cp.T);
  if (j >= g.size()) throw Error(ErrorKind::Range, "no samples at or after T");
  return j;
}

Endmaps assemble_endmaps(const ControlProblem& cp, const ControlOptions& opt) {
  require_inputs(cp);
  const auto n = static_cast<Eigen::Index>(grid_of(cp).size());
  const auto m = cp.base.law.dim();
  const auto q = cp.B.cols();
  const auto post = static_cast<Eigen::Index>(post_index(cp));
  const Eigen::Index np = n - post;
  const double entries = static_cast<double>(np * m) * static_cast<double>(n * m + n * q);
  if (entries > static_cast<double>(opt.size_guard))
    throw Error(ErrorKind::SizeGuard, "dense end maps need " + std::to_string(static_cast<long long>(entries)) +
                                          " entries, above the guard of " + std::to_string(opt.size_guard) +
                                          "; use the power-iteration observability estimate or raise size_guard");

  SpectralSolver solver = make_solver(cp, Direction::Forward);
  auto keep = [&](const CMatrix& full) { return post_rows(full, n, m, post); };

  Endmaps maps;
  maps.post_begin = static_cast<std::size_t>(post);
  maps.n_post = static_cast<std::size_t>(np);
  maps.L_F = solve_batched(
      solver, n * m, np * m,
      [&](Eigen::Index first, Eigen::Index count) {
        CMatrix in = CMatrix::Zero(n * m, count);
        for (Eigen::Index k = 0; k < count; ++k) in(first + k, k) = 1.0;
        return in;
      },
      keep);
  maps.L_G = solve_batched(
      solver, n * q, np * m,
      [&](Eigen::Index first, Eigen::Index count) {
        CMatrix in = CMatrix::Zero(n * m, count);
        for (Eigen::Index k = 0; k < count; ++k) {
          const Eigen::Index d = (first + k) / n, j = (first + k) % n;
          for (Eigen::Index c = 0; c < m; ++c) in(c * n + j, k) = cp.B(c, d);
        }
        return in;
      },
      keep);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  CVector probe(n * m);
  for (auto& x : probe) x = Complex(N(rng), N(rng));
  CVector direct = post_rows(solver.solve_columns(probe), n, m, post);
  CVector assembled = maps.L_F * probe;
  maps.linearity_defect = (direct - assembled).norm() / std::max(direct.norm(), 1e-300);
  return maps;
}

CMatrix assemble_adjoint_endmap(const ControlProblem& cp, const ControlOptions& opt) {
  require_inputs(cp);
  const auto n = static_cast<Eigen::Index>(grid_of(cp).size());
  const auto m = cp.base.law.dim();
  const auto post = static_cast<Eigen::Index>(post_index(cp));
  const Eigen::Index np = n - post;
  const double entries = static_cast<double>(np * m) * static_cast<double>(n * m);
  if (entries > static_cast<double>(opt.size_guard))
    throw Error(ErrorKind::SizeGuard, "dense adjoint end map exceeds the size guard");
  SpectralSolver solver = make_solver(cp, Direction::Adjoint);
  return solve_batched(
      solver, np * m, n * m,
      [&](Eigen::Index first, Eigen::Index count) {
        CMatrix unit = CMatrix::Zero(np * m, count);
        for (Eigen::Index k = 0; k < count; ++k) unit(first + k, k) = 1.0;
        return embed_post(unit, n, m, post);
      },
      [](const CMatrix& full) { return full; });
}

// ---------------------------------------------------------------------------
// supported null control

ControlResult null_control(const ControlProblem& cp, const ControlOptions& opt) {
  return null_control(cp, assemble_endmaps(cp, opt), opt);
}

ControlResult null_control(const ControlProblem& cp, const Endmaps& maps, const ControlOptions& opt) {
  if (cp.variant != ControlVariant::Supported) throw Error(ErrorKind::Precondition, "null_control needs the supported variant");
  require_inputs(cp);
  const TimeGrid& g = grid_of(cp);
  const std::size_t n = g.size();
  const auto q = cp.B.cols();

  CVector y = maps.L_F * vectorize(cp.base.rhs);
  Pinv pinv(maps.L_G, opt.rank_cutoff);
  CVector gvec = -pinv.apply(y);
  ControlResult res{unvectorize(g, cp.base.nu, q, gvec)};
  res.rank = pinv.rank;
  res.cutoff = pinv.cutoff;
  const double ny = y.norm();
  res.relative_residual = ny > 0.0 ? (maps.L_G * gvec + y).norm() / ny : 0.0;
  res.feasible = res.relative_residual < opt.feasibility_tol;
  res.control_norm = res.G.norm();

  // closed loop through a fresh solve
  WeightedSignal BG = unvectorize(g, cp.base.nu, cp.base.law.dim(), lift_input(cp.B, n, gvec));
  EvoProblem loop = cp.base;
  loop.rhs = cp.base.rhs + BG;
  WeightedSignal u = solve_forward(loop).solution;
  res.terminal_residual = support_leakage(u, SupportWindow::at_most(cp.T)) * u.norm();
  return res;
}

// ---------------------------------------------------------------------------
// observability

namespace {

WeightedSignal post_signal(const ControlProblem& cp, const CVector& x_post) {
  const TimeGrid& g = grid_of(cp);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto m = cp.base.law.dim();
  const auto post = static_cast<Eigen::Index>(post_index(cp));
  CVector full = embed_post(x_post, n, m, post);
  return unvectorize(g, -cp.base.nu, m, full);
}

// Minimum-norm least squares by CGLS; starts from zero so the iterate stays in ran(op^*).
CVector cgls(const std::function<CVector(const CVector&)>& op, const std::function<CVector(const CVector&)>& adj,
             const CVector& b, Eigen::Index cols, const ControlOptions& opt) {
  CVector x = CVector::Zero(cols);
  CVector r = b;
  CVector s = adj(r);
  CVector p = s;
  double gamma = s.squaredNorm();
  const double gamma0 = gamma;
  if (gamma0 == 0.0) return x;
  for (int it = 0; it < opt.cgls_iterations; ++it) {
    CVector qv = op(p);
    double qq = qv.squaredNorm();
    if (qq == 0.0) break;
    Complex alpha = gamma / qq;
    x += alpha * p;
    r -= alpha * qv;
    s = adj(r);
    double gnew = s.squaredNorm();
    if (std::sqrt(gnew) <= opt.cgls_tol * std::sqrt(gamma0)) break;
    p = s + (gnew / gamma) * p;
    gamma = gnew;
  }
  return x;
}

ObservabilityEstimate dense_observability(const ControlProblem& cp, const ControlOptions& opt) {
  const std::size_t n = grid_of(cp).size();
  const CMatrix L = assemble_adjoint_endmap(cp, opt);
  Eigen::BDCSVD<CMatrix> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = opt.rank_cutoff * (s.size() ? s(0) : 0.0);
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff && s(r) > 0.0) ++r;

  ObservabilityEstimate est{0.0, false, post_signal(cp, CVector::Zero(L.cols())), ObservabilityMethod::GeneralizedSvd,
                            static_cast<std::size_t>(r), 0};
  if (r == 0) return est;

  CMatrix Ur = svd.matrixU().leftCols(r);
  CMatrix W(static_cast<Eigen::Index>(n) * cp.B.cols(), r);
  for (Eigen::Index k = 0; k < r; ++k) W.col(k) = lift_adjoint(cp.B, n, Ur.col(k));
  Eigen::BDCSVD<CMatrix> wsvd(W, Eigen::ComputeFullV);
  const auto& ws = wsvd.singularValues();
  const double smin = W.rows() >= r ? ws(r - 1) : 0.0;
  CVector v = wsvd.matrixV().col(r - 1);

  const double bscale = spectral_norm(cp.B);
  est.infinite = !(smin > opt.inclusion_tol * bscale);
  est.c_obs = est.infinite ? kInf : 1.0 / smin;
  // x with L x = U_r v
  CVector coeff = v;
  for (Eigen::Index k = 0; k < r; ++k) coeff(k) /= s(k);
  est.witness = post_signal(cp, svd.matrixV().leftCols(r) * coeff);
  return est;
}

ObservabilityEstimate power_observability(const ControlProblem& cp, const ControlOptions& opt) {
  const TimeGrid& g = grid_of(cp);
  const std::size_t n = g.size();
  const auto nn = static_cast<Eigen::Index>(n);
  const auto m = cp.base.law.dim();
  const auto q = cp.B.cols();
  const auto post = static_cast<Eigen::Index>(post_index(cp));
  SpectralSolver fwd = make_solver(cp, Direction::Forward);
  SpectralSolver adj = make_solver(cp, Direction::Adjoint);

  auto LF = [&](const CVector& f) -> CVector { return post_rows(fwd.solve_columns(f), nn, m, post); };
  auto LFH = [&](const CVector& x) -> CVector { return adj.solve_columns(embed_post(x, nn, m, post)); };
  auto LG = [&](const CVector& gv) -> CVector { return LF(lift_input(cp.B, n, gv)); };
  auto LGH = [&](const CVector& x) -> CVector { return lift_adjoint(cp.B, n, LFH(x)); };
  const Eigen::Index np_m = (nn - post) * m;

  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  CVector v(nn * m);
  for (auto& x : v) x = Complex(N(rng), N(rng));
  v.normalize();

  ObservabilityEstimate est{0.0, false, post_signal(cp, CVector::Zero(np_m)), ObservabilityMethod::PowerIteration, 0, 0};
  double previous = 0.0;
  for (int it = 0; it < opt.power_iterations; ++it) {
    est.iterations = it + 1;
    CVector y = LF(v);
    CVector gv = cgls(LG, LGH, y, nn * q, opt);
    CVector miss = y - LG(gv);
    if (y.norm() > 0.0 && miss.norm() > opt.feasibility_tol * y.norm()) {
      // the residual is orthogonal to ran L_G: B^* S^* x ~ 0 while S^* x is not
      est.infinite = true;
      est.c_obs = kInf;
      est.witness = post_signal(cp, miss);
      return est;
    }
    const double c = gv.norm();
    CVector z = cgls(LGH, LG, gv, np_m, opt);
    CVector w = LFH(z);
    est.c_obs = c;
    if (z.norm() > 0.0) est.witness = post_signal(cp, z / z.norm());
    if (w.norm() == 0.0) break;
    v = w / w.norm();
    if (std::abs(c - previous) <= opt.power_tol * c) break;
    previous = c;
  }
  return est;
}

}  // namespace

ObservabilityEstimate observability_constant(const ControlProblem& cp, const ControlOptions& opt,
                                             std::optional<ObservabilityMethod> force) {
  require_inputs(cp);
  const auto n = static_cast<double>(grid_of(cp).size());
  const auto m = static_cast<double>(cp.base.law.dim());
  const auto np = n - static_cast<double>(post_index(cp));
  const bool fits = np * m * n * m <= static_cast<double>(opt.size_guard);
  ObservabilityMethod method = force.value_or(fits ? ObservabilityMethod::GeneralizedSvd : ObservabilityMethod::PowerIteration);
  return method == ObservabilityMethod::GeneralizedSvd ? dense_observability(cp, opt) : power_observability(cp, opt);
}

double observability_ratio(const ControlProblem& cp, const WeightedSignal& x) {
  require_inputs(cp);
  WeightedSignal tail = restrict_to(x, SupportWindow::at_least(grid_of(cp).time(post_index(cp))));
  SpectralSolver adj = make_solver(cp, Direction::Adjoint);
  CVector s = vectorize(adj.solve(tail).interior());
  double den = lift_adjoint(cp.B, grid_of(cp).size(), s).norm();
  return den > 0.0 ? s.norm() / den : kInf;
}

DualityVerdict certify_duality(const ControlProblem& cp, int probes, std::uint64_t seed, const ControlOptions& opt) {
  Endmaps maps = assemble_endmaps(cp, opt);
  DouglasResult dg = douglas_check(maps.L_F, maps.L_G, opt);
  ObservabilityEstimate obs = observability_constant(cp, opt, ObservabilityMethod::GeneralizedSvd);

  DualityVerdict v;
  v.included = dg.included;
  v.douglas_constant = dg.constant;
  v.finite = !obs.infinite;
  v.c_obs = obs.c_obs;

  const TimeGrid& g = grid_of(cp);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  v.feasible = true;
  for (int k = 0; k < probes; ++k) {
    CMatrix flat(static_cast<Eigen::Index>(g.size()), cp.base.law.dim());
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat.data()[i] = Complex(N(rng), N(rng));
    ControlProblem probe = cp;
    probe.variant = ControlVariant::Supported;
    probe.base.rhs = WeightedSignal(g, cp.base.nu, flat);
    ControlResult r = null_control(probe, maps, opt);
    v.feasible = v.feasible && r.feasible;
    v.worst_probe_residual = std::max(v.worst_probe_residual, r.relative_residual);
  }
  CMatrix adjoint_map = assemble_adjoint_endmap(cp, opt);
  v.adjoint_factorization_defect = (adjoint_map - maps.L_F.adjoint()).norm() / std::max(maps.L_F.norm(), 1e-300);
  v.agree = v.feasible == v.included && v.included == v.finite;
  return v;
}

// ---------------------------------------------------------------------------
// pointwise variant

namespace {

struct PointwiseFrame {
  std::size_t j0 = 0;     // first sample with t >= 0
  std::size_t i = 0;      // T in [t_i, t_i + dt)
  double theta = 0.0;     // (T - t_i) / dt
  CMatrix M0, M1;
};

PointwiseFrame pointwise_frame(const ControlProblem& cp) {
  if (cp.variant != ControlVariant::Pointwise) throw Error(ErrorKind::Precondition, "needs the pointwise variant");
  require_inputs(cp);
  const MaterialLaw& M = cp.base.law;
  if (!M.is_finite_sum() || M.conjugated_argument() || M.order() > 1)
    throw Error(ErrorKind::UnsupportedLaw, "pointwise control needs a law M_0 + z^{-1} M_1");
  if (cp.U0.size() != M.dim()) throw Error(ErrorKind::Range, "U0 has the wrong dimension");
  const TimeGrid& g = grid_of(cp);
  if (!(g.t_min() <= 0.0 && 0.0 < g.t_max())) throw Error(ErrorKind::Range, "the grid must contain t = 0");
  if (!(cp.T > 0.0 && cp.T <= g.time(g.size() - 1))) throw Error(ErrorKind::Range, "T must lie in (0, last sample]");
  PointwiseFrame f;
  f.j0 = g.first_index_at_or_after(0.0);
  std::size_t k = g.first_index_at_or_after(cp.T);
  if (std::abs(g.time(k) - cp.T) <= 1e-9 * g.dt()) {
    f.i = k;
    f.theta = 0.0;
  } else {
    f.i = k - 1;
    f.theta = (cp.T - g.time(f.i)) / g.dt();
  }
  f.M0 = M.coefficients()[0];
  f.M1 = M.order() == 1 ? M.coefficients()[1] : CMatrix::Zero(M.dim(), M.dim());
  return f;
}

// Physical value at T from flat samples.
CVector value_at_T(const WeightedSignal& V, const PointwiseFrame& f, double nu, double T) {
  const auto i = static_cast<Eigen::Index>(f.i);
  CVector phi = V.flat().row(i).transpose();
  if (f.theta > 0.0) phi = (1.0 - f.theta) * phi + f.theta * V.flat().row(i + 1).transpose();
  return std::exp(nu * T) * phi;
}

// Flat samples of 1_{[0,inf)}(t) v at weight nu.
CMatrix step_flat(const TimeGrid& g, double nu, std::size_t j0, const CVector& v) {
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), v.size());
  for (std::size_t j = j0; j < g.size(); ++j) out.row(static_cast<Eigen::Index>(j)) = std::exp(-nu * g.time(j)) * v.transpose();
  return out;
}

WeightedSignal march(const ControlProblem& cp, const CMatrix& rhs_flat, std::size_t start) {
  EvoProblem p = cp.base;
  p.rhs = WeightedSignal(grid_of(cp), cp.base.nu, rhs_flat);
  p.direction = Direction::Forward;
  return timestep_oracle(p, start);
}

double hminus(const CMatrix& A, const CVector& v) {
  CMatrix H = CMatrix::Identity(A.rows(), A.cols()) + A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  return (es.operatorInverseSqrt() * v).norm();
}

CMatrix lifted_flat(const ControlProblem& cp, const WeightedSignal& G) {
  if (G.grid() != grid_of(cp) || G.nu() != cp.base.nu) throw Error(ErrorKind::Pairing, "G must live on the grid at weight nu");
  if (G.dim() != cp.B.cols()) throw Error(ErrorKind::Range, "G must have q components");
  return G.flat() * cp.B.transpose();
}

}  // namespace

PointwiseSolution pointwise_solve(const ControlProblem& cp, const WeightedSignal& G) {
  PointwiseFrame f = pointwise_frame(cp);
  const TimeGrid& g = grid_of(cp);
  const double nu = cp.base.nu;
  if (support_begin(G) < f.j0) throw Error(ErrorKind::Precondition, "G must vanish before t = 0");

  CMatrix rhs = lifted_flat(cp, G) - step_flat(g, nu, f.j0, (f.M1 + cp.base.A.matrix()) * cp.U0);
  WeightedSignal V = march(cp, rhs, f.j0);

  PointwiseSolution out{V + WeightedSignal(g, nu, step_flat(g, nu, f.j0, cp.U0))};
  out.M0U_at_T = f.M0 * (value_at_T(V, f, nu, cp.T) + cp.U0);
  out.hminus_norm = hminus(cp.base.A.matrix(), out.M0U_at_T);
  const std::size_t last = std::min(f.i + 1, g.size() - 1);
  for (std::size_t j = f.j0; j < last; ++j) {
    auto a = static_cast<Eigen::Index>(j);
    CVector va = std::exp(nu * g.time(j)) * V.flat().row(a).transpose();
    CVector vb = std::exp(nu * g.time(j + 1)) * V.flat().row(a + 1).transpose();
    out.max_jump = std::max(out.max_jump, (f.M0 * (vb - va)).norm());
  }
  return out;
}

WeightedSignal pointwise_impulse_solve(const ControlProblem& cp, const WeightedSignal& G) {
  PointwiseFrame f = pointwise_frame(cp);
  const TimeGrid& g = grid_of(cp);
  const double nu = cp.base.nu;
  CMatrix rhs = lifted_flat(cp, G);
  auto j0 = static_cast<Eigen::Index>(f.j0);
  rhs.row(j0) += (std::exp(-nu * g.time(f.j0)) / g.dt()) * (f.M0 * cp.U0).transpose();
  return march(cp, rhs, 0);
}

PointwiseSystem assemble_pointwise(const ControlProblem& cp) {
  PointwiseFrame f = pointwise_frame(cp);
  const TimeGrid& g = grid_of(cp);
  const double nu = cp.base.nu;
  const auto m = cp.base.law.dim();
  const auto q = cp.B.cols();
  const auto rows = static_cast<Eigen::Index>(g.size());

  PointwiseSystem sys;
  sys.first = f.j0;
  const std::size_t last = f.theta > 0.0 ? f.i + 1 : f.i;
  sys.count = last >= f.j0 ? last - f.j0 + 1 : 0;
  const auto N = static_cast<Eigen::Index>(sys.count);
  sys.Phi = CMatrix::Zero(m, N * q);
  sys.target_map = CMatrix::Zero(m, m);
  const CMatrix AM1 = f.M1 + cp.base.A.matrix();

  const auto columns = static_cast<std::size_t>(N * q + m);
  parallel_for(columns, [&](std::size_t k) {
    auto kk = static_cast<Eigen::Index>(k);
    if (kk < N * q) {
      const Eigen::Index d = kk / N, j = static_cast<Eigen::Index>(f.j0) + kk % N;
      CMatrix rhs = CMatrix::Zero(rows, m);
      rhs.row(j) = cp.B.col(d).transpose();
      sys.Phi.col(kk) = f.M0 * value_at_T(march(cp, rhs, f.j0), f, nu, cp.T);
    } else {
      const Eigen::Index c = kk - N * q;
      CVector e = CVector::Unit(m, c);
      WeightedSignal V = march(cp, step_flat(g, nu, f.j0, AM1 * e), f.j0);
      sys.target_map.col(c) = f.M0 * value_at_T(V, f, nu, cp.T) - f.M0 * e;
    }
  });
  sys.b = sys.target_map * cp.U0;
  return sys;
}

ControlResult pointwise_null_control(const ControlProblem& cp, const ControlOptions& opt) {
  PointwiseSystem sys = assemble_pointwise(cp);
  const TimeGrid& g = grid_of(cp);
  const auto q = cp.B.cols();
  const auto N = static_cast<Eigen::Index>(sys.count);

  Pinv pinv(sys.Phi, opt.rank_cutoff);
  CVector gvec = pinv.apply(sys.b);
  CMatrix flat = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), q);
  for (Eigen::Index d = 0; d < q; ++d)
    flat.col(d).segment(static_cast<Eigen::Index>(sys.first), N) = gvec.segment(d * N, N);

  ControlResult res{WeightedSignal(g, cp.base.nu, std::move(flat))};
  res.rank = pinv.rank;
  res.cutoff = pinv.cutoff;
  const double miss = (sys.Phi * gvec - sys.b).norm();
  res.relative_residual = miss / (1.0 + sys.b.norm());
  res.feasible = miss < opt.pointwise_tol * (1.0 + sys.b.norm());
  res.control_norm = res.G.norm();

  PointwiseSolution loop = pointwise_solve(cp, res.G);
  res.M0U_at_T = loop.M0U_at_T;
  res.terminal_residual = loop.M0U_at_T.norm();
  res.hminus_norm = loop.hminus_norm;
  return res;
}

PointwiseCertificate certify_pointwise(const ControlProblem& cp, const ControlOptions& opt) {
  PointwiseSystem sys = assemble_pointwise(cp);
  Pinv pinv(sys.Phi, opt.rank_cutoff);
  PointwiseCertificate cert;
  cert.basis_feasible = true;
  for (Eigen::Index c = 0; c < sys.target_map.cols(); ++c) {
    CVector b = sys.target_map.col(c);
    double miss = (sys.Phi * pinv.apply(b) - b).norm();
    cert.basis_feasible = cert.basis_feasible && miss < opt.pointwise_tol * (1.0 + b.norm());
  }
  cert.included = douglas_check(sys.target_map, sys.Phi, opt).included;
  cert.agree = cert.basis_feasible == cert.included;
  return cert;
}

}  // namespace evoq
