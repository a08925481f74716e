#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "modlab/field.hpp"
#include "modlab/stft.hpp"
#include "modlab/windows.hpp"

namespace modlab {

/// One dictionary element x -> sigma(eta.x/tau + b) phi1(eta.x/tau + b - t) phid(x - y).
struct AtomParams {
  std::vector<double> y;
  std::vector<double> eta;
  double b = 0.0;

  std::size_t dim() const { return y.size(); }
  void validate() const;
};

/// The constants (t, tau) of the affine response. Construction verifies condition (A)
/// through the closed-form ReLU STFT.
class FixedConstants {
 public:
  FixedConstants(double t = 0.0, double tau = 1.0, double floor = 1e-12);

  double t() const { return t_; }
  double tau() const { return tau_; }
  /// V_phi ReLU(t, tau).
  cplx relu_stft_value() const { return stft_; }
  /// C_{sigma,phi} = |V_phi ReLU(t, tau)|^{-1}.
  double c_sigma_phi() const { return 1.0 / std::abs(stft_); }

 private:
  double t_;
  double tau_;
  cplx stft_;
};

struct AtomWindows {
  GaussianNorm response = GaussianNorm::Canonical;
  GaussianNorm spatial = GaussianNorm::Canonical;
};

double atom_eval(const AtomParams& p, const FixedConstants& c, const Activation& sigma,
                 const AtomWindows& windows, std::span<const double> x);

struct AtomDerivatives {
  double value = 0.0;
  std::vector<double> gradient;  // d entries, when order >= 1
  std::vector<double> hessian;   // d*d row-major, when order == 2
};

/// Analytic partials of the atom in x up to the given order (<= 2).
AtomDerivatives atom_grad(const AtomParams& p, const FixedConstants& c, const Activation& sigma,
                          const AtomWindows& windows, std::span<const double> x, int order);

/// theta(eta, b) = v_n(eta) v_s((|b| - R |eta / tau|)_+), s < -1.
struct LocalWeightSpec {
  int n = 1;
  double s = -2.0;
  double radius = 1.0;
  void validate() const;
};

/// theta(eta, b) = v_{n+s}(eta) / v_s(b), s > 1.
struct GlobalWeightSpec {
  int n = 1;
  double s = 2.0;
  void validate() const;
};

struct WeightValue {
  double value = 0.0;     // theta(eta, b)
  double marginal = 0.0;  // int theta(eta, b) db over R
};

class DivergentMarginal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double beta_function(double a, double b);

WeightValue local_weight(const LocalWeightSpec& spec, std::span<const double> eta, double b, double tau);
/// C_{Omega,s} = 2 R + B(1/2, (-s-1)/2).
double local_weight_constant(const LocalWeightSpec& spec);

WeightValue global_weight(const GlobalWeightSpec& spec, std::span<const double> eta, double b);
/// sqrt(pi) Gamma((s-1)/2) / Gamma(s/2) = int v_{-s}(b) db.
double global_weight_constant(const GlobalWeightSpec& spec);

/// Density of mu_f at (y, eta, b):
///   e^{-2 pi i b tau} V_phi f(y, eta) / (V_phi ReLU(t, tau) (phi, phi)).
/// Its modulus is C_{sigma,phi} |V_phi f| / ||phi||^2; the complex constant carries the phase
/// that makes the integral reproduce f. V_phi f is interpolated multilinearly.
cplx measure_density(const StftGrid& coeffs, const FixedConstants& c, std::span<const double> y,
                     std::span<const double> eta, double b);

/// The complex constant 1 / (V_phi ReLU(t, tau) (phi, phi)) of measure_density.
cplx measure_constant(const StftGrid& coeffs, const FixedConstants& c);

/// |(V_phi ReLU(t,tau))^{-1} int_{-B}^{B} ReLU(a) phi(a - t) e^{-2 pi i b tau} db - e^{2 pi i eta.x}|
/// with a = eta.x / tau + b and the canonical window.
double verify_phase_identity(std::span<const double> eta, std::span<const double> x,
                             const FixedConstants& c, double b_truncation = 40.0);

/// CSV row layout: y0[,y1],eta0[,eta1],b,coef_re,coef_im
void write_atom_csv_header(std::ostream& os, std::size_t dim);
void write_atom_csv_row(std::ostream& os, const AtomParams& p, cplx coefficient);

}  // namespace modlab
