#include "modlab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace modlab {

Axis Axis::span(double lo, double hi, std::size_t length) {
  if (length < 2) throw std::invalid_argument("axis needs at least two nodes");
  return Axis{lo, (hi - lo) / static_cast<double>(length - 1), length};
}

Axis Axis::with_spacing(double lo, double hi, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("axis spacing must be positive");
  const auto cells = static_cast<std::size_t>(std::llround((hi - lo) / spacing));
  return Axis{lo, spacing, cells + 1};
}

double Axis::trapezoid_weight(std::size_t i) const {
  if (length == 1) return 1.0;
  return (i == 0 || i + 1 == length) ? 0.5 * spacing : spacing;
}

void Axis::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("axis spacing must be positive and finite");
  }
  if (length == 0) throw std::invalid_argument("axis length must be positive");
}

namespace {
std::size_t product(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.length;
  return n;
}
}  // namespace

SampledField::SampledField(std::vector<Axis> axes, std::vector<cplx> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > 2) throw std::invalid_argument("field dimension must be 1 or 2");
  for (const auto& a : axes_) a.validate();
  if (product(axes_) != values_.size()) {
    throw std::invalid_argument("axis lengths do not match value count");
  }
}

SampledField::SampledField(std::vector<Axis> axes)
    : SampledField(axes, std::vector<cplx>(product(axes))) {}

void SampledField::point(std::size_t flat, std::span<double> out) const {
  for (std::size_t k = axes_.size(); k-- > 0;) {
    const auto& a = axes_[k];
    out[k] = a.at(flat % a.length);
    flat /= a.length;
  }
}

std::vector<double> SampledField::point(std::size_t flat) const {
  std::vector<double> x(dim());
  point(flat, x);
  return x;
}

double SampledField::weight(std::size_t flat) const {
  double w = 1.0;
  for (std::size_t k = axes_.size(); k-- > 0;) {
    const auto& a = axes_[k];
    w *= a.trapezoid_weight(flat % a.length);
    flat /= a.length;
  }
  return w;
}

double SampledField::boundary_max() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    std::size_t flat = i;
    bool edge = false;
    for (std::size_t k = axes_.size(); k-- > 0;) {
      const std::size_t j = flat % axes_[k].length;
      flat /= axes_[k].length;
      edge = edge || j == 0 || j + 1 == axes_[k].length;
    }
    if (edge) m = std::max(m, std::abs(values_[i]));
  }
  return m;
}

namespace {

template <class T>
void put_le(std::ostream& os, T v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  os.write(buf, 8);
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) {
    throw std::runtime_error("truncated binary stream");
  }
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

namespace binary {
void put_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
void put_f64(std::ostream& os, double v) { put_le(os, v); }
std::uint64_t get_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
double get_f64(std::istream& is) { return get_le<double>(is); }
}  // namespace binary

void write_binary(std::ostream& os, const SampledField& field) {
  put_le<std::uint64_t>(os, field.dim());
  for (const auto& a : field.axes()) put_le<std::uint64_t>(os, a.length);
  for (const auto& a : field.axes()) put_le<double>(os, a.origin);
  for (const auto& a : field.axes()) put_le<double>(os, a.spacing);
  for (const auto& v : field.values()) {
    put_le<double>(os, v.real());
    put_le<double>(os, v.imag());
  }
}

SampledField read_binary(std::istream& is) {
  const auto dim = get_le<std::uint64_t>(is);
  if (dim == 0 || dim > 2) throw std::runtime_error("SampledField dimension must be 1 or 2");
  std::vector<Axis> axes(dim);
  for (auto& a : axes) a.length = get_le<std::uint64_t>(is);
  for (auto& a : axes) a.origin = get_le<double>(is);
  for (auto& a : axes) a.spacing = get_le<double>(is);
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.length;
  std::vector<cplx> values(n);
  for (auto& v : values) {
    const double re = get_le<double>(is);
    const double im = get_le<double>(is);
    v = {re, im};
  }
  return SampledField(std::move(axes), std::move(values));
}

void write_csv(std::ostream& os, const SampledField& field) {
  for (std::size_t k = 0; k < field.dim(); ++k) os << 'x' << k << ',';
  os << "re,im\n";
  std::vector<double> x(field.dim());
  for (std::size_t i = 0; i < field.size(); ++i) {
    field.point(i, x);
    for (double c : x) os << fmt::format("{:.17g},", c);
    os << fmt::format("{:.17g},{:.17g}\n", field[i].real(), field[i].imag());
  }
}

double l2_norm(const SampledField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.weight(i) * std::norm(f[i]);
  return std::sqrt(s);
}

double relative_l2_error(const SampledField& a, const SampledField& b) {
  if (a.size() != b.size()) throw std::invalid_argument("fields have different sizes");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = b.weight(i);
    num += w * std::norm(a[i] - b[i]);
    den += w * std::norm(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace modlab
