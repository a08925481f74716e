#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "modlab/field.hpp"

namespace modlab {

/// V_phi ReLU(x, omega) against phi(t) = e^{-pi t^2}, split as value = term1 + term2.
struct ReluStftValue {
  double x = 0.0;
  double omega = 0.0;
  cplx value;
  cplx term1;    // (1/2) e^{-pi w^2} (x - i w) e^{-2 pi i w x} erfc(sqrt(pi)(-x + i w))
  double term2;  // (1/(2 pi)) e^{-pi x^2}
};

ReluStftValue relu_stft(double x, double omega);

using ReluStftEvaluator = std::function<ReluStftValue(double, double)>;

/// Direct evaluation of int_0^inf t e^{-pi (t - x)^2} e^{-2 pi i w t} dt by the trapezoid rule
/// with Euler-Maclaurin corrections at the t = 0 endpoint.
cplx relu_stft_quadrature(double x, double omega, double step = 5e-3);

struct ConditionA {
  bool holds = false;
  double magnitude = 0.0;
};

/// |V_phi ReLU(t, tau)| against a floor; tau = 0 is rejected.
ConditionA check_condition_a(double t, double tau, double floor = 1e-12);

struct BoundPoint {
  double x;
  double omega;
  double modulus;
  double lower_bound;   // (1/(2 pi)) e^{-pi x^2}
  double margin;        // modulus - lower_bound
  bool equality_case;   // |term1| below 1e-14: the bound can only hold with equality
  bool violated;
};

struct BoundsReport {
  std::vector<BoundPoint> points;
  std::size_t violations = 0;
  std::size_t equality_cases = 0;
  double min_modulus = 0.0;
  /// Smallest C with |term1| <= C (1 + |x| + |w|) e^{-pi (x^2 + w^2)} on the grid.
  double decay_constant = 0.0;
  std::optional<BoundPoint> first_violation;
};

/// Checks the lower bound |V| >= (1/(2 pi)) e^{-pi x^2} - tolerance on the grid and fits the
/// decay constant of term1.
BoundsReport verify_bounds(const Axis& xs, const Axis& ws, double tolerance = 0.0,
                           const ReluStftEvaluator& eval = relu_stft);

/// Columns: x,omega,modulus,lower_bound,margin
void write_bounds_csv(std::ostream& os, const BoundsReport& report);

}  // namespace modlab
