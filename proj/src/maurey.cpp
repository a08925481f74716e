#include "modlab/maurey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

namespace modlab {

namespace {

constexpr double kPi = std::numbers::pi;

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void SamplingPlan::validate() const {
  domain.validate();
  grid.space.validate();
  grid.freq.validate();
  if (weight == WeightKind::Local) {
    LocalWeightSpec{n, local_s, domain.radius()}.validate();
  } else {
    GlobalWeightSpec{n, global_s}.validate();
  }
  if (!(b_truncation > 0.0)) throw std::invalid_argument("b truncation must be positive");
  if (b_table_size < 2) throw std::invalid_argument("b table needs at least two nodes");
  if (!(mass_scale > 0.0)) throw std::invalid_argument("mass scale must be positive");
}

void Approximant::add(WeightedAtom atom) {
  if (atom.params.dim() != dim_ || atom.params.eta.size() != dim_) {
    throw std::invalid_argument("atom dimension does not match approximant");
  }
  if (!(atom.theta > 0.0)) throw std::invalid_argument("atom weight theta must be positive");
  atoms_.push_back(std::move(atom));
}

double Approximant::l1_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += std::abs(a.coefficient);
  return s;
}

double Approximant::value(std::span<const double> x) const {
  double sum = offset_;
  for (const auto& atom : atoms_) {
    sum += atom.coefficient.real() / atom.theta *
           atom_eval(atom.params, constants_, Activation::relu(), AtomWindows{}, x);
  }
  return sum;
}

Channels Approximant::evaluate(const EvaluationSet& points, int order) const {
  if (points.dim() != dim_) throw std::invalid_argument("evaluation set dimension does not match approximant");
  if (order < 0 || order > 1) throw std::invalid_argument("approximant channels support orders 0 and 1");
  const std::size_t P = points.size();
  const std::size_t d = dim_;
  Channels out = Channels::zeros(d, order, P);
  std::fill(out.value.begin(), out.value.end(), offset_);
  const double tau = constants_.tau();
  const double t = constants_.t();
  std::vector<double> dir(d);
  for (const auto& atom : atoms_) {
    const double alpha = atom.coefficient.real() / atom.theta;
    if (alpha == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i) dir[i] = atom.params.eta[i] / tau;
    for (std::size_t p = 0; p < P; ++p) {
      const auto x = points.point(p);
      double a = atom.params.b;
      double r2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        a += dir[i] * x[i];
        const double di = x[i] - atom.params.y[i];
        r2 += di * di;
      }
      // ReLU with the right-derivative convention at the kink.
      if (a < 0.0) continue;
      const double u = a - t;
      const double g = std::exp(-kPi * (u * u + r2));
      out.value[p] += alpha * a * g;
      if (order == 1) {
        const double ds = (1.0 - 2.0 * kPi * u * a) * g;
        for (std::size_t i = 0; i < d; ++i) {
          out.first[i][p] += alpha * (ds * dir[i] - 2.0 * kPi * (x[i] - atom.params.y[i]) * a * g);
        }
      }
    }
  }
  return out;
}

void Approximant::write_csv(std::ostream& os) const {
  write_atom_csv_header(os, dim_);
  for (const auto& atom : atoms_) write_atom_csv_row(os, atom.params, atom.coefficient / atom.theta);
}

double Sampler::eta_factor(std::span<const double> eta) const {
  const double r = norm(eta);
  if (plan_.weight == WeightKind::Local) return PolyWeight(plan_.n)(r);
  return PolyWeight(plan_.n + plan_.global_s)(r);
}

double Sampler::flat_halfwidth(std::span<const double> eta) const {
  if (plan_.weight == WeightKind::Global) return 0.0;
  return plan_.domain.radius() * norm(eta) / std::abs(constants_.tau());
}

double Sampler::tail(double u) const {
  return plan_.weight == WeightKind::Local ? PolyWeight(plan_.local_s)(u) : PolyWeight(-plan_.global_s)(u);
}

double Sampler::tail_mass(double u) const {
  if (u <= 0.0) return 0.0;
  const double pos = u / tail_step_;
  const auto i = std::min(static_cast<std::size_t>(pos), tail_cdf_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return tail_cdf_[i] + frac * (tail_cdf_[i + 1] - tail_cdf_[i]);
}

double Sampler::tail_inverse(double mass) const {
  const auto it = std::upper_bound(tail_cdf_.begin(), tail_cdf_.end(), mass);
  if (it == tail_cdf_.end()) return plan_.b_truncation;
  const auto hi = static_cast<std::size_t>(it - tail_cdf_.begin());
  const std::size_t lo = hi - 1;
  const double frac = (mass - tail_cdf_[lo]) / (tail_cdf_[hi] - tail_cdf_[lo]);
  return tail_step_ * (static_cast<double>(lo) + frac);
}

double Sampler::theta(std::span<const double> eta, double b) const {
  const double excess = std::max(std::abs(b) - flat_halfwidth(eta), 0.0);
  return eta_factor(eta) * tail(excess);
}

double Sampler::truncated_marginal(std::span<const double> eta) const {
  const double flat = std::min(flat_halfwidth(eta), plan_.b_truncation);
  return eta_factor(eta) * 2.0 * (flat + tail_mass(plan_.b_truncation - flat));
}

double Sampler::sample_b(std::span<const double> eta, double u) const {
  const double flat = std::min(flat_halfwidth(eta), plan_.b_truncation);
  const double tail_total = tail_mass(plan_.b_truncation - flat);
  const double m = u * 2.0 * (flat + tail_total);
  if (m < 2.0 * flat) return -flat + m;
  double rest = m - 2.0 * flat;
  const double sign = rest < tail_total ? -1.0 : 1.0;
  if (rest >= tail_total) rest -= tail_total;
  return sign * (flat + tail_inverse(rest));
}

Sampler Sampler::build(const SampledField& f, const SamplingPlan& plan, const FixedConstants& constants) {
  plan.validate();
  if (f.dim() != plan.domain.dim()) throw std::invalid_argument("field and domain dimensions differ");
  Sampler s(stft(f, Window{}, plan.grid, plan.stft_options), plan, constants);
  const StftGrid& V = s.coeffs_;
  const std::size_t d = V.dim();

  s.tail_step_ = plan.b_truncation / static_cast<double>(plan.b_table_size - 1);
  s.tail_cdf_.assign(plan.b_table_size, 0.0);
  double prev = s.tail(0.0);
  for (std::size_t i = 1; i < plan.b_table_size; ++i) {
    const double cur = s.tail(s.tail_step_ * static_cast<double>(i));
    s.tail_cdf_[i] = s.tail_cdf_[i - 1] + 0.5 * s.tail_step_ * (prev + cur);
    prev = cur;
  }

  std::vector<double> eta(d), y(d);
  std::vector<double> freq_mass(V.freq_nodes());
  for (std::size_t k = 0; k < V.freq_nodes(); ++k) {
    V.freq_point(k, eta);
    freq_mass[k] = V.freq_weight(k) * s.truncated_marginal(eta);
  }

  s.kappa_ = measure_constant(V, constants);
  s.prob_.assign(V.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < V.space_nodes(); ++j) {
    V.space_point(j, y);
    if (plan.weight == WeightKind::Global && !plan.domain.contains(y)) continue;
    const double wy = V.space_weight(j);
    for (std::size_t k = 0; k < V.freq_nodes(); ++k) {
      const std::size_t cell = V.index(j, k);
      const double m = wy * freq_mass[k] * std::abs(V.values()[cell]);
      s.prob_[cell] = m;
      total += m;
    }
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateSampler("representing measure has zero total mass");
  }
  s.mass_ = std::abs(s.kappa_) * total * plan.mass_scale;
  double acc = 0.0;
  for (std::size_t cell = 0; cell < s.prob_.size(); ++cell) {
    if (s.prob_[cell] <= 0.0) continue;
    s.prob_[cell] /= total;
    acc += s.prob_[cell];
    s.cells_.push_back(cell);
    s.cdf_.push_back(acc);
  }
  s.cdf_.back() = 1.0;
  return s;
}

double Sampler::cell_probability(std::size_t cell) const { return prob_.at(cell); }

WeightedAtom Sampler::draw(std::mt19937_64& rng, std::size_t count) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t pick = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  const std::size_t cell = cells_[pick];
  const std::size_t d = dim();
  const std::size_t j = cell / coeffs_.freq_nodes();
  const std::size_t k = cell % coeffs_.freq_nodes();

  WeightedAtom atom;
  atom.params.y.resize(d);
  atom.params.eta.resize(d);
  coeffs_.space_point(j, atom.params.y);
  coeffs_.freq_point(k, atom.params.eta);
  atom.params.b = sample_b(atom.params.eta, uniform01(rng));
  atom.theta = theta(atom.params.eta, atom.params.b);

  const double arg = -2.0 * kPi * atom.params.b * constants_.tau();
  const cplx density = kappa_ * cplx(std::cos(arg), std::sin(arg)) * coeffs_.values()[cell];
  atom.coefficient = (mass_ / static_cast<double>(count)) * (density / std::abs(density));
  return atom;
}

Approximant sample_approximant(const Sampler& sampler, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("approximant needs at least one atom");
  std::mt19937_64 rng(seed);
  Approximant out(sampler.dim(), sampler.constants());
  for (std::size_t i = 0; i < count; ++i) out.add(sampler.draw(rng, count));
  return out;
}

void RateExperimentConfig::validate() const {
  if (ns.size() < 4) throw std::invalid_argument(fmt::format("rate experiment needs at least 4 N values, got {}", ns.size()));
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0) throw std::invalid_argument("N values must be positive");
    if (i > 0 && ns[i] <= ns[i - 1]) throw std::invalid_argument("N values must be strictly increasing");
  }
  const double ratio = static_cast<double>(ns[1]) / static_cast<double>(ns[0]);
  for (std::size_t i = 2; i < ns.size(); ++i) {
    const double r = static_cast<double>(ns[i]) / static_cast<double>(ns[i - 1]);
    if (std::abs(r / ratio - 1.0) > 0.05) throw std::invalid_argument("N values must be geometrically spaced");
  }
  if (seeds.empty()) throw std::invalid_argument("rate experiment needs at least one seed");
  if (!(input_spacing > 0.0)) throw std::invalid_argument("input spacing must be positive");
  if (eval_nodes < 2) throw std::invalid_argument("evaluation grid needs at least two nodes");
  sobolev.validate();
  plan.validate();
}

Channels target_channels(const Target& target, const EvaluationSet& points, int order) {
  Channels out = Channels::zeros(points.dim(), order, points.size());
  std::vector<double> grad(points.dim());
  for (std::size_t p = 0; p < points.size(); ++p) {
    out.value[p] = target.value_and_gradient(points.point(p), grad);
    for (std::size_t i = 0; i < points.dim() && order >= 1; ++i) out.first[i][p] = grad[i];
  }
  return out;
}

RateExperimentResult rate_experiment(const Target& target, const RateExperimentConfig& config) {
  config.validate();
  if (target.dim() != config.plan.domain.dim()) throw std::invalid_argument("target and domain dimensions differ");
  const Axis& space = config.plan.grid.space;
  const Axis input = Axis::with_spacing(space.origin, space.back(), config.input_spacing);
  const SampledField samples = target.sample(std::vector<Axis>(target.dim(), input));
  const Sampler sampler = Sampler::build(samples, config.plan);

  const EvaluationSet points = EvaluationSet::grid(config.plan.domain, config.eval_nodes);
  const int order = std::min(config.sobolev.n, 1);
  const Channels reference = target_channels(target, points, order);

  RateExperimentResult result;
  result.mass = sampler.total_mass();
  std::vector<double> ns;
  for (std::size_t n : config.ns) {
    ns.push_back(static_cast<double>(n));
    std::vector<double> errs;
    for (std::uint64_t seed : config.seeds) {
      const std::uint64_t stream = derive_seed(seed, n);
      const Approximant approx = sample_approximant(sampler, n, stream);
      errs.push_back(sobolev_error(reference, approx.evaluate(points, order), config.sobolev, points));
    }
    result.errors.push_back(std::move(errs));
  }
  result.report = fit_rate_samples(ns, result.errors);
  return result;
}

}  // namespace modlab
