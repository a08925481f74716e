#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "modlab/field.hpp"

namespace modlab {

/// Axis-aligned box [lo_k, hi_k].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  static Box cube(std::size_t dim, double lo, double hi);
  std::size_t dim() const { return lo.size(); }
  double volume() const;
  /// sup |x| over the box.
  double radius() const;
  bool contains(std::span<const double> x) const;
  void validate() const;
};

/// Evaluation points with quadrature weights. Grid mode keeps the tensor axes so that
/// finite differences across nodes are available.
class EvaluationSet {
 public:
  enum class Mode { Grid, MonteCarlo };

  /// Tensor trapezoid grid with `nodes` points per axis covering the box.
  static EvaluationSet grid(const Box& box, std::size_t nodes);
  /// Equal weights |Omega| / count over the given points (flat, row-major by point).
  static EvaluationSet monte_carlo(const Box& box, std::vector<double> points);

  Mode mode() const { return mode_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  std::span<const double> point(std::size_t i) const { return {&points_[i * dim_], dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Box& box() const { return box_; }

 private:
  Mode mode_ = Mode::Grid;
  std::size_t dim_ = 1;
  Box box_;
  std::vector<double> points_;
  std::vector<double> weights_;
  std::vector<Axis> axes_;
};

/// Function values and partial derivatives at the points of an EvaluationSet.
/// first[i][p] = d/dx_i at point p; second holds the upper triangle (i <= j) in row order.
struct Channels {
  std::size_t dim = 1;
  int order = 0;
  std::vector<double> value;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;

  static Channels zeros(std::size_t dim, int order, std::size_t points);
  std::size_t points() const { return value.size(); }
};

struct SobolevSpec {
  int n = 1;
  double r = 2.0;
  /// Permits n = 2 in grid mode; second partials come from finite differences of the
  /// supplied first-derivative channels.
  bool diagnostics = false;
  void validate() const;
};

class ChannelArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// (sum_{|alpha| <= n} || d^alpha (f - g) ||_{L^r(Omega)}^r)^{1/r} by the set's quadrature.
double sobolev_error(const Channels& f, const Channels& g, const SobolevSpec& spec,
                     const EvaluationSet& points);

struct RatePoint {
  double n = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct RateReport {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS residual of the log-log fit.
  double residual = 0.0;
  std::size_t seeds = 1;
};

/// Least squares fit of log(error) against log(N). Needs >= 4 distinct N, errors > 0.
RateReport fit_rate(std::vector<RatePoint> points, std::size_t seeds = 1);
/// Aggregates per-seed errors (errors[i] belongs to ns[i]) into medians and quartiles.
RateReport fit_rate_samples(const std::vector<double>& ns,
                            const std::vector<std::vector<double>>& errors);

/// Columns: N,median_error,q25,q75,fitted_slope
void write_rate_csv(std::ostream& os, const RateReport& report);

/// Linear-interpolated quantile of an unsorted sample (q in [0, 1]).
double quantile(std::vector<double> sample, double q);

}  // namespace modlab
