#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modlab/field.hpp"
#include "modlab/windows.hpp"

namespace modlab {

/// Gaussian window, optionally modulated: g(t) = gauss(t) * e^{2 pi i nu sum_k t_k}.
struct Window {
  GaussianNorm norm = GaussianNorm::Canonical;
  double modulation = 0.0;

  /// 1-D factor of the (separable) window.
  cplx factor(double t) const;
};

/// (gamma, g) = integral of gamma * conj(g) over R^dim.
cplx window_inner(const Window& gamma, const Window& g, std::size_t dim);

class TailTruncationError : public std::runtime_error {
 public:
  TailTruncationError(double measured, double threshold);
  double measured() const { return measured_; }

 private:
  double measured_;
};

class IllConditionedInversion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The same space and frequency axis is used for every coordinate.
struct StftGridSpec {
  Axis space = Axis::with_spacing(-6.0, 6.0, 0.1);
  Axis freq = Axis::with_spacing(-6.0, 6.0, 0.1);
};

struct StftOptions {
  double tail_threshold = 1e-10;
};

/// V_g f on a (x, omega) grid; flat layout is row-major over (x_0..x_{d-1}, w_0..w_{d-1}).
class StftGrid {
 public:
  StftGrid(std::size_t dim, StftGridSpec spec, Window window);

  std::size_t dim() const { return dim_; }
  const Axis& space() const { return spec_.space; }
  const Axis& freq() const { return spec_.freq; }
  const StftGridSpec& spec() const { return spec_; }
  const Window& window() const { return window_; }

  std::size_t space_nodes() const;
  std::size_t freq_nodes() const;
  std::size_t size() const { return values_.size(); }
  std::size_t index(std::size_t space_flat, std::size_t freq_flat) const {
    return space_flat * freq_nodes() + freq_flat;
  }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx& at(std::size_t space_flat, std::size_t freq_flat) { return values_[index(space_flat, freq_flat)]; }
  cplx at(std::size_t space_flat, std::size_t freq_flat) const {
    return values_[index(space_flat, freq_flat)];
  }

  /// Coordinates of a flat space (or frequency) index.
  void space_point(std::size_t flat, std::span<double> out) const;
  void freq_point(std::size_t flat, std::span<double> out) const;
  double space_weight(std::size_t flat) const;
  double freq_weight(std::size_t flat) const;

  /// Multilinear interpolation at (x, omega); throws std::out_of_range outside the grid.
  cplx interpolate(std::span<const double> x, std::span<const double> omega) const;

 private:
  std::size_t dim_;
  StftGridSpec spec_;
  Window window_;
  std::vector<cplx> values_;
};

/// Trapezoidal quadrature of V_g f(x, w) = int f(t) conj(g(t - x)) e^{-2 pi i t . w} dt.
StftGrid stft(const SampledField& f, const Window& g, const StftGridSpec& spec,
              const StftOptions& options = {});

/// Quadrature of (gamma, g)^{-1} int V_g f(x, w) gamma(t - x) e^{2 pi i t . w} dx dw on out_axes.
SampledField istft(const StftGrid& coeffs, const Window& synthesis,
                   const std::vector<Axis>& out_axes, double min_inner = 1e-8);

struct MixedNormSpec {
  double p = 2.0;
  double q = 2.0;
  double s_space = 0.0;  // weight v_{s1}(x)
  double s_freq = 0.0;   // weight v_{s2}(omega)

  static constexpr double infinity() { return std::numeric_limits<double>::infinity(); }
};

/// Columns: x0[,x1],w0[,w1],re,im in flat grid order.
void write_csv(std::ostream& os, const StftGrid& coeffs);

/// Weighted L^{p,q} estimate of V_g f; infinite exponents use the grid supremum.
double mixed_norm(const StftGrid& coeffs, const MixedNormSpec& spec);

/// Fourier transform f^(xi) = int f(t) e^{-2 pi i t . xi} dt on a frequency grid.
SampledField fourier_transform(const SampledField& f, const Axis& freq);

/// int (1 + |xi|)^s |f^(xi)| dxi restricted to the frequency grid.
double barron_norm(const SampledField& f, double s,
                   const Axis& freq = Axis::with_spacing(-8.0, 8.0, 0.01),
                   const StftOptions& options = {});

}  // namespace modlab
