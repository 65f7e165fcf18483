#include "evoq/transform.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "evoq/parallel.hpp"

namespace evoq {

std::vector<double> frequencies(const TimeGrid& grid) {
  const std::size_t n = grid.size();
  const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * grid.dt());
  std::vector<double> xi(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto kk = static_cast<double>(k);
    xi[k] = (2 * k <= n) ? base * kk : base * (kk - static_cast<double>(n));
  }
  return xi;
}

void dft_rows(CMatrix& data, bool inverse) {
  const auto n = data.rows();
  Eigen::FFT<double> fft;
  std::vector<Complex> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    for (Eigen::Index j = 0; j < n; ++j) in[static_cast<std::size_t>(j)] = data(j, c);
    if (inverse) {
      fft.inv(out, in);
      // Eigen scales the inverse by 1/n; callers expect the raw sum.
      for (auto& x : out) x *= static_cast<double>(n);
    } else {
      fft.fwd(out, in);
    }
    for (Eigen::Index j = 0; j < n; ++j) data(j, c) = out[static_cast<std::size_t>(j)];
  }
}

double Spectrum::dxi() const {
  return 2.0 * std::numbers::pi / (static_cast<double>(grid.size()) * grid.dt());
}

double Spectrum::norm() const { return std::sqrt(dxi()) * hat.norm(); }

Spectrum fourier_laplace(const WeightedSignal& f) {
  CMatrix hat = f.flat();
  dft_rows(hat, false);
  const auto xi = frequencies(f.grid());
  const double scale = f.grid().dt() / std::sqrt(2.0 * std::numbers::pi);
  for (Eigen::Index k = 0; k < hat.rows(); ++k)
    hat.row(k) *= scale * std::polar(1.0, -xi[static_cast<std::size_t>(k)] * f.grid().t_min());
  return Spectrum{f.grid(), f.nu(), std::move(hat)};
}

WeightedSignal inverse_fourier_laplace(const Spectrum& s) {
  CMatrix flat = s.hat;
  const auto xi = frequencies(s.grid);
  const double scale = std::sqrt(2.0 * std::numbers::pi) / (s.grid.dt() * static_cast<double>(s.grid.size()));
  for (Eigen::Index k = 0; k < flat.rows(); ++k)
    flat.row(k) *= scale * std::polar(1.0, xi[static_cast<std::size_t>(k)] * s.grid.t_min());
  dft_rows(flat, true);
  return WeightedSignal(s.grid, s.nu, std::move(flat));
}

namespace {
bool five_smooth(std::size_t n) {
  for (std::size_t p : {2u, 3u, 5u})
    while (n % p == 0) n /= p;
  return n == 1;
}
}  // namespace

Padding padding_for(std::size_t n, double fraction) {
  if (!(fraction >= 0.0) || !std::isfinite(fraction)) throw Error(ErrorKind::Range, "padding fraction must be >= 0");
  auto p = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  if (p == 0) return {};
  while (!five_smooth(n + 2 * p)) ++p;
  return {p, p};
}

WeightedSignal zero_pad(const WeightedSignal& f, Padding p) {
  if (p.left == 0 && p.right == 0) return f;
  TimeGrid g = f.grid().extended(p.left, p.right);
  CMatrix flat = CMatrix::Zero(static_cast<Eigen::Index>(g.size()), f.dim());
  flat.middleRows(static_cast<Eigen::Index>(p.left), static_cast<Eigen::Index>(f.size())) = f.flat();
  return WeightedSignal(g, f.nu(), std::move(flat));
}

WeightedSignal crop(const WeightedSignal& f, Padding p, const TimeGrid& inner) {
  if (p.left + p.right + inner.size() != f.size()) throw Error(ErrorKind::Range, "crop does not match the inner grid");
  return WeightedSignal(inner, f.nu(),
                        f.flat().middleRows(static_cast<Eigen::Index>(p.left), static_cast<Eigen::Index>(inner.size())));
}

double PaddedSignal::left_leakage() const {
  double inner = padded.flat().middleRows(static_cast<Eigen::Index>(pad.left),
                                          static_cast<Eigen::Index>(padded.size() - pad.left - pad.right)).norm();
  double left = padded.flat().topRows(static_cast<Eigen::Index>(pad.left)).norm();
  return left / std::max(inner, 1e-300);
}

double PaddedSignal::right_leakage() const {
  double inner = padded.flat().middleRows(static_cast<Eigen::Index>(pad.left),
                                          static_cast<Eigen::Index>(padded.size() - pad.left - pad.right)).norm();
  double right = padded.flat().bottomRows(static_cast<Eigen::Index>(pad.right)).norm();
  return right / std::max(inner, 1e-300);
}

PaddedSignal spectral_multiplier_padded(const WeightedSignal& f, const Symbol& sym, const SpectralOptions& opt) {
  Padding pad = padding_for(f.size(), opt.padding_fraction);
  WeightedSignal p = zero_pad(f, pad);
  CMatrix hat = p.flat();
  dft_rows(hat, false);
  const auto xi = frequencies(p.grid());
  const auto n = hat.rows();

  // probe once for the output dimension
  const auto m_out = sym(xi[0]).rows();
  CMatrix out(n, m_out);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    CMatrix s = sym(xi[k]);
    if (s.cols() != hat.cols() || s.rows() != m_out)
      throw Error(ErrorKind::Symbol, "symbol has the wrong shape");
    if (!s.allFinite()) throw Error(ErrorKind::Symbol, "non-finite symbol at xi = " + std::to_string(xi[k]));
    auto kk = static_cast<Eigen::Index>(k);
    out.row(kk) = (s * hat.row(kk).transpose()).transpose();
  });
  dft_rows(out, true);
  out /= static_cast<double>(n);
  return PaddedSignal{WeightedSignal(p.grid(), f.nu(), std::move(out)), pad, f.grid()};
}

WeightedSignal spectral_multiplier(const WeightedSignal& f, const Symbol& sym, const SpectralOptions& opt) {
  return spectral_multiplier_padded(f, sym, opt).interior();
}

WeightedSignal time_derivative(const WeightedSignal& f, const SpectralOptions& opt) {
  const double nu = f.nu();
  const auto m = f.dim();
  return spectral_multiplier(
      f, [nu, m](double xi) -> CMatrix { return CMatrix::Identity(m, m) * Complex(nu, xi); }, opt);
}

WeightedSignal antiderivative(const WeightedSignal& g) {
  const double nu = g.nu();
  if (nu == 0.0) throw Error(ErrorKind::NotInvertible, "the derivative is not invertible at nu = 0");
  const double h = g.grid().dt();
  const double decay = std::exp(-std::abs(nu) * h);
  const CMatrix& phi = g.flat();
  const auto n = phi.rows();
  CMatrix psi = CMatrix::Zero(n, phi.cols());
  if (nu > 0.0) {
    // psi_{j+1} = e^{-nu h} psi_j + h/2 (e^{-nu h} phi_j + phi_{j+1})
    psi.row(0) = 0.5 * h * phi.row(0);
    for (Eigen::Index j = 0; j + 1 < n; ++j)
      psi.row(j + 1) = decay * psi.row(j) + 0.5 * h * (decay * phi.row(j) + phi.row(j + 1));
  } else {
    psi.row(n - 1) = -0.5 * h * phi.row(n - 1);
    for (Eigen::Index j = n - 1; j > 0; --j)
      psi.row(j - 1) = decay * psi.row(j) - 0.5 * h * (phi.row(j - 1) + decay * phi.row(j));
  }
  return WeightedSignal(g.grid(), nu, std::move(psi));
}

}  // namespace evoq
