#pragma once

/*
 * Discrete Fourier-Laplace transform on flat coordinates.
 *
 * L_nu f is the unitary Fourier transform of phi = exp(-nu t) f, sampled on
 * xi_k = 2 pi k / (n dt) wrapped into (-pi/dt, pi/dt]; the Nyquist bin of an
 * even grid sits on the positive branch. The time derivative at weight nu is
 * the multiplier (i xi + nu).
 *
 * Spectral multipliers act on a zero-padded copy of the signal (25% of the
 * grid per side unless told otherwise) and crop back. What lands in the
 * padding measures how much of the periodic wraparound the crop hides.
 */

#include <functional>
#include <vector>

#include "evoq/signal.hpp"

namespace evoq {

std::vector<double> frequencies(const TimeGrid& grid);

struct Spectrum {
  TimeGrid grid;
  double nu;
  CMatrix hat;  // n x m, row k at xi_k

  double dxi() const;
  double norm() const;
};

Spectrum fourier_laplace(const WeightedSignal& f);
WeightedSignal inverse_fourier_laplace(const Spectrum& s);

struct SpectralOptions {
  double padding_fraction = 0.25;
};

struct Padding {
  std::size_t left = 0;
  std::size_t right = 0;
};

// At least fraction * n per side, rounded up so the padded length is 5-smooth.
Padding padding_for(std::size_t n, double fraction);

WeightedSignal zero_pad(const WeightedSignal& f, Padding p);
// Drops the padding and relabels the rows with the given inner grid.
WeightedSignal crop(const WeightedSignal& f, Padding p, const TimeGrid& inner);

// A result on the padded grid together with the crop that recovers the
// original grid.
struct PaddedSignal {
  WeightedSignal padded;
  Padding pad;
  TimeGrid inner;

  WeightedSignal interior() const { return crop(padded, pad, inner); }
  // Padding content relative to the interior norm.
  double left_leakage() const;
  double right_leakage() const;
};

using Symbol = std::function<CMatrix(double xi)>;

// Raw unnormalised DFT along the rows of a column-major block.
void dft_rows(CMatrix& data, bool inverse);

// Applies sym(xi_k) to every bin of the padded signal; sym must return
// m_out x m matrices.
PaddedSignal spectral_multiplier_padded(const WeightedSignal& f, const Symbol& sym, const SpectralOptions& opt = {});
WeightedSignal spectral_multiplier(const WeightedSignal& f, const Symbol& sym, const SpectralOptions& opt = {});

WeightedSignal time_derivative(const WeightedSignal& f, const SpectralOptions& opt = {});

// Inverse of the weighted derivative by cumulative trapezoidal quadrature:
// int_{-inf}^t for nu > 0 and -int_t^{inf} for nu < 0, with the signal taken
// as zero off the grid.
WeightedSignal antiderivative(const WeightedSignal& g);

}  // namespace evoq
