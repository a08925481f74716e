#include "modlab/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace modlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx expi(double phase) { return {std::cos(phase), std::sin(phase)}; }

std::size_t ipow(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

/// table[t * cols + c] = fn(t, c)
template <class F>
std::vector<cplx> table(std::size_t rows, std::size_t cols, F&& fn) {
  std::vector<cplx> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = fn(r, c);
  }
  return out;
}

void check_tail(const SampledField& f, const StftOptions& options) {
  const double edge = f.boundary_max();
  if (edge > options.tail_threshold) throw TailTruncationError(edge, options.tail_threshold);
}

}  // namespace

cplx Window::factor(double t) const {
  const double g = gaussian(t, norm);
  if (modulation == 0.0) return {g, 0.0};
  return g * expi(kTwoPi * modulation * t);
}

cplx window_inner(const Window& gamma, const Window& g, std::size_t dim) {
  const double rate = gaussian_rate(gamma.norm) + gaussian_rate(g.norm);
  const double dnu = gamma.modulation - g.modulation;
  const double one = std::sqrt(std::numbers::pi / rate) *
                     std::exp(-std::numbers::pi * std::numbers::pi * dnu * dnu / rate);
  return {std::pow(one, static_cast<double>(dim)), 0.0};
}

TailTruncationError::TailTruncationError(double measured, double threshold)
    : std::runtime_error(fmt::format(
          "field does not decay at the grid boundary: |f| = {:.3e} exceeds tail threshold {:.3e}",
          measured, threshold)),
      measured_(measured) {}

StftGrid::StftGrid(std::size_t dim, StftGridSpec spec, Window window)
    : dim_(dim), spec_(spec), window_(window) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("STFT dimension must be 1 or 2");
  spec_.space.validate();
  spec_.freq.validate();
  values_.assign(space_nodes() * freq_nodes(), cplx{});
}

std::size_t StftGrid::space_nodes() const { return ipow(spec_.space.length, dim_); }
std::size_t StftGrid::freq_nodes() const { return ipow(spec_.freq.length, dim_); }

void StftGrid::space_point(std::size_t flat, std::span<double> out) const {
  for (std::size_t k = dim_; k-- > 0;) {
    out[k] = spec_.space.at(flat % spec_.space.length);
    flat /= spec_.space.length;
  }
}

void StftGrid::freq_point(std::size_t flat, std::span<double> out) const {
  for (std::size_t k = dim_; k-- > 0;) {
    out[k] = spec_.freq.at(flat % spec_.freq.length);
    flat /= spec_.freq.length;
  }
}

double StftGrid::space_weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    w *= spec_.space.trapezoid_weight(flat % spec_.space.length);
    flat /= spec_.space.length;
  }
  return w;
}

double StftGrid::freq_weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    w *= spec_.freq.trapezoid_weight(flat % spec_.freq.length);
    flat /= spec_.freq.length;
  }
  return w;
}

cplx StftGrid::interpolate(std::span<const double> x, std::span<const double> omega) const {
  if (x.size() != dim_ || omega.size() != dim_) {
    throw std::invalid_argument("interpolation point has the wrong dimension");
  }
  const std::size_t n = 2 * dim_;
  std::vector<std::size_t> cell(n);
  std::vector<double> frac(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Axis& a = k < dim_ ? spec_.space : spec_.freq;
    const double c = k < dim_ ? x[k] : omega[k - dim_];
    const double u = (c - a.origin) / a.spacing;
    const double top = static_cast<double>(a.length - 1);
    if (u < -1e-9 || u > top + 1e-9) {
      throw std::out_of_range(fmt::format("point {} lies outside the STFT grid [{}, {}]", c,
                                          a.origin, a.back()));
    }
    const double clamped = std::clamp(u, 0.0, top);
    auto i = static_cast<std::size_t>(std::floor(clamped));
    if (a.length == 1) {
      i = 0;
    } else if (i + 1 >= a.length) {
      i = a.length - 2;
    }
    cell[k] = i;
    frac[k] = a.length == 1 ? 0.0 : clamped - static_cast<double>(i);
  }
  cplx acc{};
  for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
    double w = 1.0;
    std::size_t sflat = 0;
    std::size_t fflat = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool hi = (corner >> k) & 1u;
      w *= hi ? frac[k] : 1.0 - frac[k];
      const std::size_t idx = cell[k] + (hi ? 1 : 0);
      if (k < dim_) {
        sflat = sflat * spec_.space.length + idx;
      } else {
        fflat = fflat * spec_.freq.length + idx;
      }
    }
    if (w != 0.0) acc += w * at(sflat, fflat);
  }
  return acc;
}

StftGrid stft(const SampledField& f, const Window& g, const StftGridSpec& spec,
              const StftOptions& options) {
  check_tail(f, options);
  StftGrid out(f.dim(), spec, g);
  const Axis& xs = spec.space;
  const Axis& ws = spec.freq;
  const std::size_t X = xs.length;
  const std::size_t W = ws.length;

  // Per-axis factors: window[t*X + x] = w_t conj(g(t - x)), wave[t*W + w] = e^{-2 pi i t w}.
  auto window_table = [&](const Axis& ts) {
    return table(ts.length, X, [&](std::size_t t, std::size_t x) {
      return ts.trapezoid_weight(t) * std::conj(g.factor(ts.at(t) - xs.at(x)));
    });
  };
  auto wave_table = [&](const Axis& ts) {
    return table(ts.length, W,
                 [&](std::size_t t, std::size_t w) { return expi(-kTwoPi * ts.at(t) * ws.at(w)); });
  };

  if (f.dim() == 1) {
    const Axis& ts = f.axes()[0];
    const auto gw = window_table(ts);
    const auto ew = wave_table(ts);
    for (std::size_t t = 0; t < ts.length; ++t) {
      const cplx ft = f[t];
      if (ft == cplx{}) continue;
      for (std::size_t x = 0; x < X; ++x) {
        const cplx c = ft * gw[t * X + x];
        cplx* row = &out.at(x, 0);
        const cplx* e = &ew[t * W];
        for (std::size_t w = 0; w < W; ++w) row[w] += c * e[w];
      }
    }
    return out;
  }

  const Axis& t0s = f.axes()[0];
  const Axis& t1s = f.axes()[1];
  const std::size_t T0 = t0s.length;
  const std::size_t T1 = t1s.length;
  const auto g0 = window_table(t0s);
  const auto e0 = wave_table(t0s);
  const auto g1 = window_table(t1s);
  const auto e1 = wave_table(t1s);

  // partial[t0][x1][w1] = sum_t1 f(t0, t1) K1(t1, x1, w1)
  std::vector<cplx> partial(T0 * X * W);
  for (std::size_t t0 = 0; t0 < T0; ++t0) {
    for (std::size_t t1 = 0; t1 < T1; ++t1) {
      const cplx ft = f[t0 * T1 + t1];
      if (ft == cplx{}) continue;
      for (std::size_t x1 = 0; x1 < X; ++x1) {
        const cplx c = ft * g1[t1 * X + x1];
        cplx* row = &partial[(t0 * X + x1) * W];
        const cplx* e = &e1[t1 * W];
        for (std::size_t w1 = 0; w1 < W; ++w1) row[w1] += c * e[w1];
      }
    }
  }
  std::vector<cplx> kernel(W);
  for (std::size_t x0 = 0; x0 < X; ++x0) {
    for (std::size_t t0 = 0; t0 < T0; ++t0) {
      const cplx gv = g0[t0 * X + x0];
      for (std::size_t w0 = 0; w0 < W; ++w0) kernel[w0] = gv * e0[t0 * W + w0];
      for (std::size_t x1 = 0; x1 < X; ++x1) {
        const cplx* a = &partial[(t0 * X + x1) * W];
        const std::size_t sflat = x0 * X + x1;
        for (std::size_t w0 = 0; w0 < W; ++w0) {
          const cplx k = kernel[w0];
          cplx* row = &out.at(sflat, w0 * W);
          for (std::size_t w1 = 0; w1 < W; ++w1) row[w1] += k * a[w1];
        }
      }
    }
  }
  return out;
}

SampledField istft(const StftGrid& coeffs, const Window& synthesis, const std::vector<Axis>& out_axes,
                   double min_inner) {
  const std::size_t d = coeffs.dim();
  if (out_axes.size() != d) throw std::invalid_argument("output axes do not match STFT dimension");
  const cplx inner = window_inner(synthesis, coeffs.window(), d);
  if (std::abs(inner) < min_inner) {
    throw IllConditionedInversion(fmt::format(
        "window pair is nearly orthogonal: |(gamma, g)| = {:.3e} below {:.3e}", std::abs(inner),
        min_inner));
  }
  const cplx scale = 1.0 / inner;
  const Axis& xs = coeffs.space();
  const Axis& ws = coeffs.freq();
  const std::size_t X = xs.length;
  const std::size_t W = ws.length;

  // synth[t*X + x] = w_x gamma(t - x), wave[t*W + w] = w_w e^{2 pi i t w}
  auto synth_table = [&](const Axis& ts) {
    return table(ts.length, X, [&](std::size_t t, std::size_t x) {
      return xs.trapezoid_weight(x) * synthesis.factor(ts.at(t) - xs.at(x));
    });
  };
  auto wave_table = [&](const Axis& ts) {
    return table(ts.length, W, [&](std::size_t t, std::size_t w) {
      return ws.trapezoid_weight(w) * expi(kTwoPi * ts.at(t) * ws.at(w));
    });
  };

  SampledField out(out_axes);
  if (d == 1) {
    const Axis& ts = out_axes[0];
    const auto sy = synth_table(ts);
    const auto ew = wave_table(ts);
    for (std::size_t t = 0; t < ts.length; ++t) {
      cplx acc{};
      for (std::size_t x = 0; x < X; ++x) {
        cplx inner_sum{};
        const cplx* row = &coeffs.values()[coeffs.index(x, 0)];
        const cplx* e = &ew[t * W];
        for (std::size_t w = 0; w < W; ++w) inner_sum += row[w] * e[w];
        acc += sy[t * X + x] * inner_sum;
      }
      out[t] = scale * acc;
    }
    return out;
  }

  const Axis& t0s = out_axes[0];
  const Axis& t1s = out_axes[1];
  const std::size_t T0 = t0s.length;
  const std::size_t T1 = t1s.length;
  const auto s0 = synth_table(t0s);
  const auto e0 = wave_table(t0s);
  const auto s1 = synth_table(t1s);
  const auto e1 = wave_table(t1s);

  // partial[(x0 * W + w0) * T1 + t1] = sum_{x1, w1} V * K1(t1, x1, w1)
  std::vector<cplx> partial(X * W * T1);
  for (std::size_t x0 = 0; x0 < X; ++x0) {
    for (std::size_t x1 = 0; x1 < X; ++x1) {
      const std::size_t sflat = x0 * X + x1;
      for (std::size_t w0 = 0; w0 < W; ++w0) {
        const cplx* row = &coeffs.values()[coeffs.index(sflat, w0 * W)];
        cplx* dst = &partial[(x0 * W + w0) * T1];
        for (std::size_t t1 = 0; t1 < T1; ++t1) {
          cplx acc{};
          const cplx* e = &e1[t1 * W];
          for (std::size_t w1 = 0; w1 < W; ++w1) acc += row[w1] * e[w1];
          dst[t1] += s1[t1 * X + x1] * acc;
        }
      }
    }
  }
  for (std::size_t t0 = 0; t0 < T0; ++t0) {
    for (std::size_t x0 = 0; x0 < X; ++x0) {
      const cplx sv = s0[t0 * X + x0];
      for (std::size_t w0 = 0; w0 < W; ++w0) {
        const cplx k = sv * e0[t0 * W + w0];
        const cplx* src = &partial[(x0 * W + w0) * T1];
        for (std::size_t t1 = 0; t1 < T1; ++t1) out[t0 * T1 + t1] += k * src[t1];
      }
    }
  }
  for (auto& v : out.values()) v *= scale;
  return out;
}

void write_csv(std::ostream& os, const StftGrid& coeffs) {
  const std::size_t d = coeffs.dim();
  for (std::size_t k = 0; k < d; ++k) os << 'x' << k << ',';
  for (std::size_t k = 0; k < d; ++k) os << 'w' << k << ',';
  os << "re,im\n";
  std::vector<double> x(d), w(d);
  for (std::size_t i = 0; i < coeffs.space_nodes(); ++i) {
    coeffs.space_point(i, x);
    for (std::size_t j = 0; j < coeffs.freq_nodes(); ++j) {
      coeffs.freq_point(j, w);
      for (double c : x) os << fmt::format("{:.17g},", c);
      for (double c : w) os << fmt::format("{:.17g},", c);
      const cplx v = coeffs.at(i, j);
      os << fmt::format("{:.17g},{:.17g}\n", v.real(), v.imag());
    }
  }
}

double mixed_norm(const StftGrid& coeffs, const MixedNormSpec& spec) {
  if (!(spec.p > 0.0) || !(spec.q > 0.0)) throw std::invalid_argument("mixed norm exponents must be positive");
  const bool p_inf = std::isinf(spec.p);
  const bool q_inf = std::isinf(spec.q);
  const PolyWeight vx(spec.s_space);
  const PolyWeight vw(spec.s_freq);
  const std::size_t d = coeffs.dim();
  const std::size_t S = coeffs.space_nodes();
  const std::size_t F = coeffs.freq_nodes();

  std::vector<double> space_weight(S);
  std::vector<double> space_mass(S);
  std::vector<double> pt(d);
  for (std::size_t s = 0; s < S; ++s) {
    coeffs.space_point(s, pt);
    space_weight[s] = vx(pt);
    space_mass[s] = coeffs.space_weight(s);
  }

  double outer = 0.0;
  for (std::size_t f = 0; f < F; ++f) {
    double inner = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double m = std::abs(coeffs.at(s, f)) * space_weight[s];
      if (p_inf) {
        inner = std::max(inner, m);
      } else {
        inner += space_mass[s] * std::pow(m, spec.p);
      }
    }
    if (!p_inf) inner = std::pow(inner, 1.0 / spec.p);
    coeffs.freq_point(f, pt);
    const double mw = inner * vw(pt);
    if (q_inf) {
      outer = std::max(outer, mw);
    } else {
      outer += coeffs.freq_weight(f) * std::pow(mw, spec.q);
    }
  }
  return q_inf ? outer : std::pow(outer, 1.0 / spec.q);
}

SampledField fourier_transform(const SampledField& f, const Axis& freq) {
  freq.validate();
  const std::size_t W = freq.length;
  auto wave_table = [&](const Axis& ts) {
    return table(ts.length, W, [&](std::size_t t, std::size_t w) {
      return ts.trapezoid_weight(t) * expi(-kTwoPi * ts.at(t) * freq.at(w));
    });
  };
  if (f.dim() == 1) {
    SampledField out({freq});
    const Axis& ts = f.axes()[0];
    const auto e = wave_table(ts);
    for (std::size_t t = 0; t < ts.length; ++t) {
      for (std::size_t w = 0; w < W; ++w) out[w] += f[t] * e[t * W + w];
    }
    return out;
  }
  SampledField out({freq, freq});
  const Axis& t0s = f.axes()[0];
  const Axis& t1s = f.axes()[1];
  const auto e0 = wave_table(t0s);
  const auto e1 = wave_table(t1s);
  std::vector<cplx> partial(t0s.length * W);
  for (std::size_t t0 = 0; t0 < t0s.length; ++t0) {
    for (std::size_t t1 = 0; t1 < t1s.length; ++t1) {
      const cplx v = f[t0 * t1s.length + t1];
      for (std::size_t w1 = 0; w1 < W; ++w1) partial[t0 * W + w1] += v * e1[t1 * W + w1];
    }
  }
  for (std::size_t w0 = 0; w0 < W; ++w0) {
    for (std::size_t t0 = 0; t0 < t0s.length; ++t0) {
      const cplx k = e0[t0 * W + w0];
      for (std::size_t w1 = 0; w1 < W; ++w1) out[w0 * W + w1] += k * partial[t0 * W + w1];
    }
  }
  return out;
}

double barron_norm(const SampledField& f, double s, const Axis& freq, const StftOptions& options) {
  check_tail(f, options);
  const SampledField hat = fourier_transform(f, freq);
  double acc = 0.0;
  std::vector<double> xi(hat.dim());
  for (std::size_t i = 0; i < hat.size(); ++i) {
    hat.point(i, xi);
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    acc += hat.weight(i) * std::pow(1.0 + std::sqrt(r2), s) * std::abs(hat[i]);
  }
  return acc;
}

}  // namespace modlab
