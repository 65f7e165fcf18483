#include "evoq/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace evoq {

namespace {
constexpr double kExpGuard = 30.0;

std::string grid_text(const TimeGrid& g) {
  std::ostringstream os;
  os << "[" << g.t_min() << ", " << g.t_max() << ") with n = " << g.size();
  return os.str();
}
}  // namespace

TimeGrid::TimeGrid(double t_min, double t_max, std::size_t n) : t_min_(t_min), t_max_(t_max), n_(n) {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !(t_max > t_min))
    throw Error(ErrorKind::UnsupportedGrid, "need finite t_min < t_max");
  if (n < 2) throw Error(ErrorKind::UnsupportedGrid, "need at least two samples");
}

bool TimeGrid::symmetric() const noexcept {
  return std::abs(t_min_ + t_max_) <= 1e-12 * std::max(std::abs(t_min_), std::abs(t_max_));
}

std::size_t TimeGrid::first_index_at_or_after(double T) const {
  if (!(T >= t_min_ && T <= t_max_)) throw Error(ErrorKind::Range, "time outside " + grid_text(*this));
  double x = (T - t_min_) / dt();
  auto j = static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9)));
  return std::min(j, n_);
}

TimeGrid TimeGrid::extended(std::size_t left, std::size_t right) const {
  double h = dt();
  return TimeGrid(t_min_ - static_cast<double>(left) * h, t_max_ + static_cast<double>(right) * h,
                  n_ + left + right);
}

bool TimeGrid::operator==(const TimeGrid& o) const noexcept {
  return n_ == o.n_ && t_min_ == o.t_min_ && t_max_ == o.t_max_;
}

WeightedSignal::WeightedSignal(TimeGrid grid, double nu, CMatrix flat)
    : grid_(grid), nu_(nu), flat_(std::move(flat)) {
  if (!std::isfinite(nu)) throw Error(ErrorKind::Range, "weight must be finite");
  if (static_cast<std::size_t>(flat_.rows()) != grid_.size())
    throw Error(ErrorKind::UnsupportedGrid, "sample count does not match the grid");
  if (flat_.cols() < 1) throw Error(ErrorKind::UnsupportedGrid, "need at least one component");
  if (!flat_.allFinite()) throw Error(ErrorKind::Range, "non-finite sample");
}

WeightedSignal WeightedSignal::zero(const TimeGrid& grid, double nu, Eigen::Index m) {
  return WeightedSignal(grid, nu, CMatrix::Zero(static_cast<Eigen::Index>(grid.size()), m));
}

WeightedSignal WeightedSignal::from_values(const TimeGrid& grid, double nu, const CMatrix& values) {
  if (static_cast<std::size_t>(values.rows()) != grid.size())
    throw Error(ErrorKind::UnsupportedGrid, "sample count does not match the grid");
  CMatrix flat(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.rows(); ++j)
    flat.row(j) = std::exp(-nu * grid.time(static_cast<std::size_t>(j))) * values.row(j);
  return WeightedSignal(grid, nu, std::move(flat));
}

WeightedSignal WeightedSignal::sample(const TimeGrid& grid, double nu, Eigen::Index m,
                                      const std::function<CVector(double)>& f) {
  CMatrix values(static_cast<Eigen::Index>(grid.size()), m);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CVector v = f(grid.time(j));
    if (v.size() != m) throw Error(ErrorKind::UnsupportedGrid, "sampler returned the wrong dimension");
    values.row(static_cast<Eigen::Index>(j)) = v.transpose();
  }
  return from_values(grid, nu, values);
}

CMatrix WeightedSignal::values() const {
  double worst = std::max(std::abs(nu_ * grid_.t_min()), std::abs(nu_ * grid_.t_max()));
  if (worst > kExpGuard)
    throw Error(ErrorKind::Range, "|nu t| exceeds the unweighting guard; stay in flat coordinates");
  CMatrix out(flat_.rows(), flat_.cols());
  for (Eigen::Index j = 0; j < flat_.rows(); ++j)
    out.row(j) = std::exp(nu_ * grid_.time(static_cast<std::size_t>(j))) * flat_.row(j);
  return out;
}

double WeightedSignal::norm() const { return std::sqrt(grid_.dt()) * flat_.norm(); }

void WeightedSignal::require_compatible(const WeightedSignal& o) const {
  if (grid_ != o.grid_ || nu_ != o.nu_ || dim() != o.dim())
    throw Error(ErrorKind::Pairing, "signals live on different grids, weights or dimensions");
}

WeightedSignal WeightedSignal::operator+(const WeightedSignal& o) const {
  require_compatible(o);
  return WeightedSignal(grid_, nu_, flat_ + o.flat_);
}

WeightedSignal WeightedSignal::operator-(const WeightedSignal& o) const {
  require_compatible(o);
  return WeightedSignal(grid_, nu_, flat_ - o.flat_);
}

WeightedSignal WeightedSignal::operator*(Complex s) const { return WeightedSignal(grid_, nu_, flat_ * s); }

Complex nu_product(const WeightedSignal& f, const WeightedSignal& g) {
  if (f.grid() != g.grid()) throw Error(ErrorKind::Pairing, "grids differ");
  if (f.nu() != -g.nu()) throw Error(ErrorKind::Pairing, "weights are not (nu, -nu)");
  if (f.dim() != g.dim()) throw Error(ErrorKind::Pairing, "dimensions differ");
  Complex s = 0.0;
  for (Eigen::Index c = 0; c < f.dim(); ++c) s += f.flat().col(c).dot(g.flat().col(c));
  return f.grid().dt() * s;
}

WeightedSignal weight_flip(const WeightedSignal& f) { return WeightedSignal(f.grid(), -f.nu(), f.flat()); }

WeightedSignal time_reverse(const WeightedSignal& f) {
  if (!f.grid().symmetric()) throw Error(ErrorKind::UnsupportedGrid, "time reversal needs t_min = -t_max");
  return WeightedSignal(f.grid(), -f.nu(), f.flat().colwise().reverse());
}

WeightedSignal restrict_to(const WeightedSignal& f, const SupportWindow& w) {
  std::size_t jT = f.grid().first_index_at_or_after(w.T);
  auto n = static_cast<Eigen::Index>(f.size());
  auto split = static_cast<Eigen::Index>(jT);
  CMatrix flat = f.flat();
  if (w.kind == SupportWindow::Kind::AtLeastT)
    flat.topRows(split).setZero();
  else
    flat.bottomRows(n - split).setZero();
  return WeightedSignal(f.grid(), f.nu(), std::move(flat));
}

double support_leakage(const WeightedSignal& f, const SupportWindow& w) {
  double outside = (f - restrict_to(f, w)).norm();
  return outside / std::max(f.norm(), 1e-300);
}

std::size_t support_begin(const WeightedSignal& f) {
  for (Eigen::Index j = 0; j < f.flat().rows(); ++j)
    if (f.flat().row(j).squaredNorm() > 0.0) return static_cast<std::size_t>(j);
  return f.size();
}

std::size_t support_end(const WeightedSignal& f) {
  for (Eigen::Index j = f.flat().rows(); j > 0; --j)
    if (f.flat().row(j - 1).squaredNorm() > 0.0) return static_cast<std::size_t>(j);
  return 0;
}

double edge_mass(const WeightedSignal& f, double fraction) {
  auto n = static_cast<Eigen::Index>(f.size());
  auto k = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(fraction * static_cast<double>(n))));
  k = std::min(k, n);
  double edges = f.flat().topRows(k).squaredNorm() + f.flat().bottomRows(k).squaredNorm();
  double total = f.flat().squaredNorm();
  return total > 0.0 ? std::sqrt(edges / total) : 0.0;
}

CVector vectorize(const WeightedSignal& f) {
  return Eigen::Map<const CVector>(f.flat().data(), f.flat().size());
}

WeightedSignal unvectorize(const TimeGrid& grid, double nu, Eigen::Index m, const CVector& v) {
  auto n = static_cast<Eigen::Index>(grid.size());
  if (v.size() != n * m) throw Error(ErrorKind::UnsupportedGrid, "vector length does not match grid");
  return WeightedSignal(grid, nu, Eigen::Map<const CMatrix>(v.data(), n, m));
}

}  // namespace evoq
