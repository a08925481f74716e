#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace modlab {

using cplx = std::complex<double>;

/// Uniform 1-D grid: origin + i * spacing, i = 0..length-1.
struct Axis {
  double origin = 0.0;
  double spacing = 1.0;
  std::size_t length = 1;

  static Axis span(double lo, double hi, std::size_t length);
  /// Grid over [lo, hi] with the given spacing (hi is rounded to the nearest node).
  static Axis with_spacing(double lo, double hi, double spacing);

  double at(std::size_t i) const { return origin + static_cast<double>(i) * spacing; }
  double back() const { return at(length - 1); }
  /// Composite trapezoid weight of node i.
  double trapezoid_weight(std::size_t i) const;
  void validate() const;
};

/// Complex samples on a rectangular grid in dimension 1 or 2 (row-major, last axis fastest).
class SampledField {
 public:
  SampledField() = default;
  SampledField(std::vector<Axis> axes, std::vector<cplx> values);
  explicit SampledField(std::vector<Axis> axes);

  std::size_t dim() const { return axes_.size(); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return values_.size(); }

  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  /// Coordinates of the flat index.
  std::vector<double> point(std::size_t flat) const;
  void point(std::size_t flat, std::span<double> out) const;
  /// Tensor-product trapezoid weight of the flat index.
  double weight(std::size_t flat) const;
  /// Largest modulus over nodes that lie on the grid boundary.
  double boundary_max() const;

  /// Samples a real or complex function of the coordinates.
  template <class F>
  static SampledField sample(std::vector<Axis> axes, F&& fn) {
    SampledField out(std::move(axes));
    std::vector<double> x(out.dim());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.point(i, x);
      out.values_[i] = cplx(fn(std::span<const double>(x)));
    }
    return out;
  }

 private:
  std::vector<Axis> axes_;
  std::vector<cplx> values_;
};

/// Binary layout (little-endian): u64 dim, u64 lengths[dim], f64 origin[dim],
/// f64 spacing[dim], then interleaved (re, im) f64 pairs in row-major order.
void write_binary(std::ostream& os, const SampledField& field);
SampledField read_binary(std::istream& is);

namespace binary {
void put_u64(std::ostream& os, std::uint64_t v);
void put_f64(std::ostream& os, double v);
std::uint64_t get_u64(std::istream& is);
double get_f64(std::istream& is);
}  // namespace binary

/// One row per node: x0[,x1],re,im with a header line.
void write_csv(std::ostream& os, const SampledField& field);

/// Relative L2 distance ||a - b|| / ||b|| under trapezoid weights of b's grid.
double relative_l2_error(const SampledField& a, const SampledField& b);
double l2_norm(const SampledField& f);

}  // namespace modlab
