#include "modlab/relu_stft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "modlab/special.hpp"

namespace modlab {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEqualityFloor = 1e-14;
}  // namespace

ReluStftValue relu_stft(double x, double omega) {
  const double root_pi = std::sqrt(kPi);
  const cplx z(-root_pi * x, root_pi * omega);
  if (std::abs(z) > kErfcMaxModulus) {
    throw ErfcDomainError(fmt::format("relu_stft argument (x={}, omega={}) outside erfc range", x, omega));
  }
  // erfc(z) = e^{-z^2} w(iz) for Re z >= 0 and 2 - e^{-z^2} w(-iz) otherwise. The factor
  // e^{-pi w^2} e^{-2 pi i w x} e^{-z^2} collapses to e^{-pi x^2}, which keeps both
  // branches free of overflow.
  const cplx prefactor = 0.5 * cplx(x, -omega);
  const double gauss_x = std::exp(-kPi * x * x);
  cplx term1;
  if (x <= 0.0) {
    term1 = prefactor * gauss_x * faddeeva(cplx(-z.imag(), z.real()));
  } else {
    const cplx carrier = std::exp(-kPi * omega * omega) *
                         cplx(std::cos(2.0 * kPi * omega * x), -std::sin(2.0 * kPi * omega * x));
    term1 = prefactor * (2.0 * carrier - gauss_x * faddeeva(cplx(z.imag(), -z.real())));
  }
  const double term2 = gauss_x / (2.0 * kPi);
  return ReluStftValue{x, omega, term1 + term2, term1, term2};
}

cplx relu_stft_quadrature(double x, double omega, double step) {
  const double upper = std::max(x, 0.0) + 10.0;
  const auto n = static_cast<std::size_t>(std::ceil(upper / step));
  const double h = upper / static_cast<double>(n);
  auto integrand = [&](double t) {
    const double d = t - x;
    const double phase = -2.0 * kPi * omega * t;
    return t * std::exp(-kPi * d * d) * cplx(std::cos(phase), std::sin(phase));
  };
  cplx sum = 0.5 * integrand(upper);  // integrand(0) = 0
  for (std::size_t i = 1; i < n; ++i) sum += integrand(h * static_cast<double>(i));
  sum *= h;

  // F(t) = t G(t), G = e^{q(t)}, q = -pi (t - x)^2 - 2 pi i w t; at t = 0:
  // F' = G, F''' = 3 G'', F^(5) = 5 G''''.
  const cplx g0(std::exp(-kPi * x * x), 0.0);
  const cplx dq(2.0 * kPi * x, -2.0 * kPi * omega);
  const double ddq = -2.0 * kPi;
  const cplx g2 = g0 * (ddq + dq * dq);
  const cplx g4 = g0 * (dq * dq * dq * dq + 6.0 * dq * dq * ddq + 3.0 * ddq * ddq);
  const double h2 = h * h;
  // Euler-Maclaurin: int = T - sum_k B_2k h^2k / (2k)! (F^(2k-1)(b) - F^(2k-1)(a)); the upper end is negligible.
  sum += h2 / 12.0 * g0;
  sum -= h2 * h2 / 720.0 * (3.0 * g2);
  sum += h2 * h2 * h2 / 30240.0 * (5.0 * g4);
  return sum;
}

ConditionA check_condition_a(double t, double tau, double floor) {
  if (tau == 0.0) throw std::invalid_argument("condition (A) requires tau != 0");
  const double magnitude = std::abs(relu_stft(t, tau).value);
  return ConditionA{magnitude > floor, magnitude};
}

BoundsReport verify_bounds(const Axis& xs, const Axis& ws, double tolerance,
                           const ReluStftEvaluator& eval) {
  BoundsReport report;
  report.min_modulus = std::numeric_limits<double>::infinity();
  report.points.reserve(xs.length * ws.length);
  for (std::size_t i = 0; i < xs.length; ++i) {
    for (std::size_t j = 0; j < ws.length; ++j) {
      const double x = xs.at(i);
      const double w = ws.at(j);
      const ReluStftValue v = eval(x, w);
      const double modulus = std::abs(v.value);
      const double lower = std::exp(-kPi * x * x) / (2.0 * kPi);
      const bool equality = std::abs(v.term1) < kEqualityFloor;
      const bool violated = !(modulus >= lower - tolerance) || !std::isfinite(modulus);
      BoundPoint p{x, w, modulus, lower, modulus - lower, equality, violated};
      report.points.push_back(p);
      if (equality) ++report.equality_cases;
      if (violated) {
        ++report.violations;
        if (!report.first_violation) report.first_violation = p;
      }
      report.min_modulus = std::min(report.min_modulus, modulus);
      const double envelope = (1.0 + std::abs(x) + std::abs(w)) * std::exp(-kPi * (x * x + w * w));
      if (envelope > 0.0) {
        report.decay_constant = std::max(report.decay_constant, std::abs(v.term1) / envelope);
      }
    }
  }
  return report;
}

void write_bounds_csv(std::ostream& os, const BoundsReport& report) {
  os << "x,omega,modulus,lower_bound,margin\n";
  for (const auto& p : report.points) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.x, p.omega, p.modulus,
                      p.lower_bound, p.margin);
  }
}

}  // namespace modlab
