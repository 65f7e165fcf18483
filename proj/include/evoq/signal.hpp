#pragma once

/*
 * Exponentially weighted signals on a uniform time grid.
 *
 * A signal f in L^2_nu(R; C^m) is stored through its flat coordinates
 * phi_j = exp(-nu t_j) f(t_j), so that the weighted norm becomes a plain
 * Riemann sum dt * sum |phi_j|^2 and nothing overflows for large |nu t|.
 * The grid is t_j = t_min + j dt with dt = (t_max - t_min)/n; sample j owns
 * the half-open cell [t_j, t_j + dt).
 */

#include <cstddef>
#include <functional>

#include "evoq/error.hpp"

namespace evoq {

class TimeGrid {
public:
  TimeGrid(double t_min, double t_max, std::size_t n);

  double t_min() const noexcept { return t_min_; }
  double t_max() const noexcept { return t_max_; }
  std::size_t size() const noexcept { return n_; }
  double dt() const noexcept { return (t_max_ - t_min_) / static_cast<double>(n_); }
  double time(std::size_t j) const noexcept { return t_min_ + static_cast<double>(j) * dt(); }

  // t_min == -t_max up to rounding
  bool symmetric() const noexcept;

  // First index with t_j >= T; size() when T is past the last sample.
  std::size_t first_index_at_or_after(double T) const;

  // Same grid extended by whole cells on either side.
  TimeGrid extended(std::size_t left, std::size_t right) const;

  bool operator==(const TimeGrid& other) const noexcept;
  bool operator!=(const TimeGrid& other) const noexcept { return !(*this == other); }

private:
  double t_min_;
  double t_max_;
  std::size_t n_;
};

class WeightedSignal {
public:
  // flat is n x m, row j holds phi_j.
  WeightedSignal(TimeGrid grid, double nu, CMatrix flat);

  static WeightedSignal zero(const TimeGrid& grid, double nu, Eigen::Index m);
  // Unweighted samples f(t_j) in the rows of values.
  static WeightedSignal from_values(const TimeGrid& grid, double nu, const CMatrix& values);
  static WeightedSignal sample(const TimeGrid& grid, double nu, Eigen::Index m,
                               const std::function<CVector(double)>& f);

  const TimeGrid& grid() const noexcept { return grid_; }
  double nu() const noexcept { return nu_; }
  Eigen::Index dim() const noexcept { return flat_.cols(); }
  std::size_t size() const noexcept { return grid_.size(); }
  const CMatrix& flat() const noexcept { return flat_; }

  // exp(nu t_j) phi_j; overflows only when the caller asks for it.
  CMatrix values() const;
  double norm() const;

  WeightedSignal operator+(const WeightedSignal& other) const;
  WeightedSignal operator-(const WeightedSignal& other) const;
  WeightedSignal operator*(Complex s) const;

private:
  void require_compatible(const WeightedSignal& other) const;

  TimeGrid grid_;
  double nu_;
  CMatrix flat_;
};

struct SupportWindow {
  enum class Kind { AtMostT, AtLeastT };
  Kind kind;
  double T;

  static SupportWindow at_most(double T) { return {Kind::AtMostT, T}; }
  static SupportWindow at_least(double T) { return {Kind::AtLeastT, T}; }
};

// Antilinear in the first slot; f at weight nu pairs with g at weight -nu.
Complex nu_product(const WeightedSignal& f, const WeightedSignal& g);

WeightedSignal weight_flip(const WeightedSignal& f);
WeightedSignal time_reverse(const WeightedSignal& f);
WeightedSignal restrict_to(const WeightedSignal& f, const SupportWindow& w);
double support_leakage(const WeightedSignal& f, const SupportWindow& w);

// Index of the first and one past the last sample that is not exactly zero.
std::size_t support_begin(const WeightedSignal& f);
std::size_t support_end(const WeightedSignal& f);

// Share of the norm carried by the outer `fraction` of samples at each end;
// a large value means the grid truncates a slowly decaying signal.
double edge_mass(const WeightedSignal& f, double fraction = 0.05);

// Column-major flattening: index c * n + j holds component c at sample j.
CVector vectorize(const WeightedSignal& f);
WeightedSignal unvectorize(const TimeGrid& grid, double nu, Eigen::Index m, const CVector& v);

}  // namespace evoq
