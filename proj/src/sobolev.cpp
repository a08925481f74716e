#include "modlab/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace modlab {

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box{std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= hi[k] - lo[k];
  return v;
}

double Box::radius() const {
  double r2 = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) {
    const double m = std::max(std::abs(lo[k]), std::abs(hi[k]));
    r2 += m * m;
  }
  return std::sqrt(r2);
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  }
  return true;
}

void Box::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("box bounds must have equal, positive dimension");
  for (std::size_t k = 0; k < dim(); ++k) {
    if (!(lo[k] < hi[k])) throw std::invalid_argument("box must be nonempty on every axis");
  }
}

EvaluationSet EvaluationSet::grid(const Box& box, std::size_t nodes) {
  box.validate();
  if (nodes < 2) throw std::invalid_argument("grid needs at least two nodes per axis");
  EvaluationSet set;
  set.mode_ = Mode::Grid;
  set.dim_ = box.dim();
  set.box_ = box;
  for (std::size_t k = 0; k < box.dim(); ++k) set.axes_.push_back(Axis::span(box.lo[k], box.hi[k], nodes));
  const SampledField shape(set.axes_);
  set.points_.resize(shape.size() * set.dim_);
  set.weights_.resize(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) {
    shape.point(i, {&set.points_[i * set.dim_], set.dim_});
    set.weights_[i] = shape.weight(i);
  }
  return set;
}

EvaluationSet EvaluationSet::monte_carlo(const Box& box, std::vector<double> points) {
  box.validate();
  if (points.empty() || points.size() % box.dim() != 0) {
    throw std::invalid_argument("Monte-Carlo point list does not match box dimension");
  }
  EvaluationSet set;
  set.mode_ = Mode::MonteCarlo;
  set.dim_ = box.dim();
  set.box_ = box;
  set.points_ = std::move(points);
  const std::size_t count = set.points_.size() / set.dim_;
  set.weights_.assign(count, box.volume() / static_cast<double>(count));
  return set;
}

Channels Channels::zeros(std::size_t dim, int order, std::size_t points) {
  Channels c;
  c.dim = dim;
  c.order = order;
  c.value.assign(points, 0.0);
  if (order >= 1) c.first.assign(dim, std::vector<double>(points, 0.0));
  if (order >= 2) c.second.assign(dim * (dim + 1) / 2, std::vector<double>(points, 0.0));
  return c;
}

void SobolevSpec::validate() const {
  if (n < 0 || n > 2) throw std::invalid_argument("Sobolev order must be 0, 1 or 2");
  if (n == 2 && !diagnostics) throw std::invalid_argument("Sobolev order 2 requires the diagnostics flag");
  if (!(r >= 2.0)) throw std::invalid_argument("Sobolev exponent r must be >= 2");
}

namespace {

void check_channels(const Channels& c, int needed, std::size_t points, std::size_t dim, const char* name) {
  if (c.points() != points || c.dim != dim) {
    throw ChannelArityError(fmt::format("{} channels cover {} points in dim {}, expected {} in dim {}",
                                        name, c.points(), c.dim, points, dim));
  }
  const int have = std::min<int>(c.order, needed);
  if (have < needed) {
    throw ChannelArityError(fmt::format("{} supplies derivatives up to order {}, {} required", name,
                                        c.order, needed));
  }
  if (needed >= 1 && c.first.size() != dim) throw ChannelArityError(fmt::format("{} is missing first partials", name));
  for (const auto& ch : c.first) {
    if (ch.size() != points) throw ChannelArityError(fmt::format("{} first-partial length mismatch", name));
  }
}

double lr_sum(const std::vector<double>& diff, const EvaluationSet& points, double r) {
  double s = 0.0;
  for (std::size_t p = 0; p < diff.size(); ++p) s += points.weight(p) * std::pow(std::abs(diff[p]), r);
  return s;
}

/// Central (one-sided at the ends) difference of a grid channel along axis k.
std::vector<double> grid_difference(const std::vector<double>& v, const std::vector<Axis>& axes, std::size_t k) {
  std::size_t stride = 1;
  for (std::size_t j = k + 1; j < axes.size(); ++j) stride *= axes[j].length;
  const std::size_t len = axes[k].length;
  const double h = axes[k].spacing;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t pos = (i / stride) % len;
    if (pos == 0) {
      out[i] = (v[i + stride] - v[i]) / h;
    } else if (pos + 1 == len) {
      out[i] = (v[i] - v[i - stride]) / h;
    } else {
      out[i] = (v[i + stride] - v[i - stride]) / (2.0 * h);
    }
  }
  return out;
}

}  // namespace

double sobolev_error(const Channels& f, const Channels& g, const SobolevSpec& spec,
                     const EvaluationSet& points) {
  spec.validate();
  const std::size_t P = points.size();
  const std::size_t d = points.dim();
  const int needed_first = std::min(spec.n, 1);
  check_channels(f, needed_first, P, d, "reference");
  check_channels(g, needed_first, P, d, "approximant");
  if (spec.n == 2 && points.mode() != EvaluationSet::Mode::Grid) {
    throw std::invalid_argument("order-2 diagnostics need grid evaluation points");
  }

  std::vector<double> diff(P);
  for (std::size_t p = 0; p < P; ++p) diff[p] = f.value[p] - g.value[p];
  double total = lr_sum(diff, points, spec.r);
  if (spec.n >= 1) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t p = 0; p < P; ++p) diff[p] = f.first[i][p] - g.first[i][p];
      total += lr_sum(diff, points, spec.r);
    }
  }
  if (spec.n == 2) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t p = 0; p < P; ++p) diff[p] = f.first[i][p] - g.first[i][p];
      for (std::size_t j = i; j < d; ++j) {
        total += lr_sum(grid_difference(diff, points.axes(), j), points, spec.r);
      }
    }
  }
  return std::pow(total, 1.0 / spec.r);
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

RateReport fit_rate(std::vector<RatePoint> points, std::size_t seeds) {
  std::sort(points.begin(), points.end(), [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].median > 0.0) || !std::isfinite(points[i].median)) {
      throw std::invalid_argument(fmt::format("rate fit needs positive errors, got {} at N = {}",
                                              points[i].median, points[i].n));
    }
    if (i == 0 || points[i].n != points[i - 1].n) ++distinct;
  }
  if (distinct < 4) throw std::invalid_argument("rate fit needs at least 4 distinct N values");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const auto m = static_cast<double>(points.size());
  for (const auto& p : points) {
    const double lx = std::log(p.n);
    const double ly = std::log(p.median);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  RateReport report;
  report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  report.intercept = (sy - report.slope * sx) / m;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = std::log(p.median) - (report.intercept + report.slope * std::log(p.n));
    ss += r * r;
  }
  report.residual = std::sqrt(ss / m);
  report.points = std::move(points);
  report.seeds = seeds;
  return report;
}

RateReport fit_rate_samples(const std::vector<double>& ns, const std::vector<std::vector<double>>& errors) {
  if (ns.size() != errors.size()) throw std::invalid_argument("N list and error table differ in length");
  std::vector<RatePoint> pts;
  std::size_t seeds = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    pts.push_back({ns[i], quantile(errors[i], 0.5), quantile(errors[i], 0.25), quantile(errors[i], 0.75)});
    seeds = std::max(seeds, errors[i].size());
  }
  return fit_rate(std::move(pts), seeds);
}

void write_rate_csv(std::ostream& os, const RateReport& report) {
  os << "N,median_error,q25,q75,fitted_slope\n";
  for (const auto& p : report.points) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.n, p.median, p.q25, p.q75, report.slope);
  }
}

}  // namespace modlab
