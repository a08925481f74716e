#pragma once

#include <complex>
#include <stdexcept>

namespace modlab {

/// Faddeeva function w(z) = e^{-z^2} erfc(-i z) on the whole complex plane.
std::complex<double> faddeeva(std::complex<double> z);

class ErfcDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Largest |z| accepted by erfc_complex.
inline constexpr double kErfcMaxModulus = 30.0;

/// Complementary error function of a complex argument. Throws ErfcDomainError for
/// |z| > kErfcMaxModulus or when the result leaves the double range.
std::complex<double> erfc_complex(std::complex<double> z);

}  // namespace modlab
