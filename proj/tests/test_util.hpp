#pragma once

#include <cmath>
#include <random>

#include "evoq/signal.hpp"

namespace testutil {

inline evoq::CMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  evoq::CMatrix X(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) X(i, j) = evoq::Complex(N(rng), N(rng));
  return X;
}

inline evoq::WeightedSignal random_signal(const evoq::TimeGrid& g, double nu, Eigen::Index m, std::mt19937_64& rng) {
  return evoq::WeightedSignal(g, nu, random_matrix(static_cast<Eigen::Index>(g.size()), m, rng));
}

// exp(1 - 1/(1 - s^2)) on |s| < 1, peak 1 at s = 0.
inline double bump(double t, double centre, double half_width) {
  double s = (t - centre) / half_width;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

// Unweighted samples of sum_r bump_r(t) v_r exp(i w_r t) with random v_r.
inline evoq::CMatrix smooth_values(const evoq::TimeGrid& g, Eigen::Index m, double centre, double half_width,
                                   std::mt19937_64& rng, int terms = 2) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  evoq::CMatrix out = evoq::CMatrix::Zero(static_cast<Eigen::Index>(g.size()), m);
  for (int r = 0; r < terms; ++r) {
    evoq::CVector v = random_matrix(m, 1, rng);
    double w = 1.5 * U(rng);
    double c = centre + 0.2 * half_width * U(rng);
    double hw = half_width * (0.6 + 0.3 * U(rng));
    for (std::size_t j = 0; j < g.size(); ++j) {
      double t = g.time(j);
      out.row(static_cast<Eigen::Index>(j)) += (bump(t, c, hw) * std::polar(1.0, w * t)) * v.transpose();
    }
  }
  return out;
}

}  // namespace testutil

namespace testutil {

// Gaussian packets sum_r exp(-(t - c_r)^2 / (2 s^2)) v_r exp(i w_r t); band-limited
// to roundoff once s / dt is a few units.
inline evoq::CMatrix gaussian_values(const evoq::TimeGrid& g, Eigen::Index m, double centre, double width,
                                     std::mt19937_64& rng, int terms = 2) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  evoq::CMatrix out = evoq::CMatrix::Zero(static_cast<Eigen::Index>(g.size()), m);
  for (int r = 0; r < terms; ++r) {
    evoq::CVector v = random_matrix(m, 1, rng);
    double w = 1.5 * U(rng);
    double c = centre + 0.5 * width * U(rng);
    double s = width * (0.8 + 0.2 * U(rng));
    for (std::size_t j = 0; j < g.size(); ++j) {
      double t = g.time(j);
      double e = (t - c) / s;
      out.row(static_cast<Eigen::Index>(j)) += (std::exp(-0.5 * e * e) * std::polar(1.0, w * t)) * v.transpose();
    }
  }
  return out;
}

}  // namespace testutil
