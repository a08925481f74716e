#include "modlab/dictionary.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "modlab/relu_stft.hpp"

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return dot(a, a); }

}  // namespace

void AtomParams::validate() const {
  if (y.size() != eta.size() || y.empty()) {
    throw std::invalid_argument("atom parameters need dim(y) == dim(eta) >= 1");
  }
}

FixedConstants::FixedConstants(double t, double tau, double floor) : t_(t), tau_(tau) {
  const ConditionA cond = check_condition_a(t, tau, floor);
  if (!cond.holds) {
    throw std::invalid_argument(fmt::format(
        "condition (A) fails at (t, tau) = ({}, {}): |V_phi ReLU| = {:.3e}", t, tau, cond.magnitude));
  }
  stft_ = relu_stft(t, tau).value;
}

double atom_eval(const AtomParams& p, const FixedConstants& c, const Activation& sigma,
                 const AtomWindows& windows, std::span<const double> x) {
  const double a = dot(p.eta, x) / c.tau() + p.b;
  const double s = sigma.value(a);
  if (s == 0.0) return 0.0;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - p.y[i]) * (x[i] - p.y[i]);
  return s * gaussian(a - c.t(), windows.response) *
         std::exp(-gaussian_rate(windows.spatial) * r2);
}

AtomDerivatives atom_grad(const AtomParams& p, const FixedConstants& c, const Activation& sigma,
                          const AtomWindows& windows, std::span<const double> x, int order) {
  if (order < 0 || order > 2) throw std::invalid_argument("atom_grad supports orders 0..2");
  const std::size_t d = x.size();
  const double a = dot(p.eta, x) / c.tau() + p.b;
  const double u = a - c.t();

  // Response factor S(a) = sigma(a) phi1(a - t) and its a-derivatives.
  const double sv = sigma.value(a);
  const double s1 = sigma.derivative(a);
  const double g0 = gaussian(u, windows.response);
  const double g1 = gaussian_d1(u, windows.response);
  const double g2 = gaussian_d2(u, windows.response);
  const double S0 = sv * g0;
  const double S1 = s1 * g0 + sv * g1;
  const double S2 = 2.0 * s1 * g1 + sv * g2;

  // Spatial factor P(x) = exp(-k |x - y|^2).
  const double k = gaussian_rate(windows.spatial);
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - p.y[i];
  const double P = std::exp(-k * norm2(diff));

  AtomDerivatives out;
  out.value = S0 * P;
  if (order == 0) return out;

  std::vector<double> dir(d);
  std::vector<double> dP(d);
  for (std::size_t i = 0; i < d; ++i) {
    dir[i] = p.eta[i] / c.tau();
    dP[i] = -2.0 * k * diff[i] * P;
  }
  out.gradient.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.gradient[i] = S1 * dir[i] * P + S0 * dP[i];
  if (order == 1) return out;

  out.hessian.resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double ddP = (4.0 * k * k * diff[i] * diff[j] - (i == j ? 2.0 * k : 0.0)) * P;
      out.hessian[i * d + j] =
          S2 * dir[i] * dir[j] * P + S1 * (dir[i] * dP[j] + dir[j] * dP[i]) + S0 * ddP;
    }
  }
  return out;
}

void LocalWeightSpec::validate() const {
  if (n < 0) throw std::invalid_argument("local weight order n must be nonnegative");
  if (!(s < -1.0)) {
    throw DivergentMarginal(fmt::format("local weight exponent s = {} must satisfy s < -1", s));
  }
  if (!(radius > 0.0)) throw std::invalid_argument("local weight radius R_Omega must be positive");
}

void GlobalWeightSpec::validate() const {
  if (n < 0) throw std::invalid_argument("global weight order n must be nonnegative");
  if (!(s > 1.0)) {
    throw DivergentMarginal(fmt::format("global weight exponent s = {} must satisfy s > 1", s));
  }
}

double beta_function(double a, double b) { return std::beta(a, b); }

double local_weight_constant(const LocalWeightSpec& spec) {
  spec.validate();
  return 2.0 * spec.radius + beta_function(0.5, 0.5 * (-spec.s - 1.0));
}

WeightValue local_weight(const LocalWeightSpec& spec, std::span<const double> eta, double b, double tau) {
  spec.validate();
  const double eta_norm = std::sqrt(norm2(eta));
  const double flat = spec.radius * eta_norm / std::abs(tau);
  const double vn = PolyWeight(spec.n).from_norm2(eta_norm * eta_norm);
  const double excess = std::max(std::abs(b) - flat, 0.0);
  WeightValue out;
  out.value = vn * PolyWeight(spec.s)(excess);
  out.marginal = 2.0 * vn * (flat + 0.5 * beta_function(0.5, 0.5 * (-spec.s - 1.0)));
  return out;
}

double global_weight_constant(const GlobalWeightSpec& spec) {
  spec.validate();
  return std::sqrt(kPi) * std::tgamma(0.5 * (spec.s - 1.0)) / std::tgamma(0.5 * spec.s);
}

WeightValue global_weight(const GlobalWeightSpec& spec, std::span<const double> eta, double b) {
  const double constant = global_weight_constant(spec);
  const double v = PolyWeight(spec.n + spec.s)(eta);
  return WeightValue{v / PolyWeight(spec.s)(b), constant * v};
}

cplx measure_constant(const StftGrid& coeffs, const FixedConstants& c) {
  const cplx window_energy = window_inner(coeffs.window(), coeffs.window(), coeffs.dim());
  return 1.0 / (c.relu_stft_value() * window_energy);
}

cplx measure_density(const StftGrid& coeffs, const FixedConstants& c, std::span<const double> y,
                     std::span<const double> eta, double b) {
  const double phase = -2.0 * kPi * b * c.tau();
  return measure_constant(coeffs, c) * cplx(std::cos(phase), std::sin(phase)) *
         coeffs.interpolate(y, eta);
}

double verify_phase_identity(std::span<const double> eta, std::span<const double> x,
                             const FixedConstants& c, double b_truncation) {
  if (eta.size() != x.size()) throw std::invalid_argument("eta and x must have equal dimension");
  const double shift = dot(eta, x) / c.tau();
  auto integrand = [&](double b) -> cplx {
    const double a = shift + b;
    if (a <= 0.0) return {};
    const double phase = -2.0 * kPi * b * c.tau();
    return a * gaussian(a - c.t(), GaussianNorm::Canonical) * cplx(std::cos(phase), std::sin(phase));
  };
  // The integrand vanishes left of the kink b = -shift; panels start there so each is smooth.
  const double lo = std::max(-b_truncation, -shift);
  const double hi = b_truncation;
  cplx integral{};
  if (lo < hi) {
    constexpr double kPanel = 0.25;
    const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / kPanel));
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) {
      const double a0 = lo + width * static_cast<double>(i);
      integral += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a0, a0 + width);
    }
  }
  const cplx estimate = integral / c.relu_stft_value();
  const double target_phase = 2.0 * kPi * dot(eta, x);
  return std::abs(estimate - cplx(std::cos(target_phase), std::sin(target_phase)));
}

void write_atom_csv_header(std::ostream& os, std::size_t dim) {
  for (std::size_t k = 0; k < dim; ++k) os << 'y' << k << ',';
  for (std::size_t k = 0; k < dim; ++k) os << "eta" << k << ',';
  os << "b,coef_re,coef_im\n";
}

void write_atom_csv_row(std::ostream& os, const AtomParams& p, cplx coefficient) {
  for (double v : p.y) os << fmt::format("{:.17g},", v);
  for (double v : p.eta) os << fmt::format("{:.17g},", v);
  os << fmt::format("{:.17g},{:.17g},{:.17g}\n", p.b, coefficient.real(), coefficient.imag());
}

}  // namespace modlab
