#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "modlab/maurey.hpp"

using namespace modlab;

namespace {

constexpr double kPi = std::numbers::pi;

SampledField target_field(double scale = 1.0) {
  return SampledField::sample({Axis::with_spacing(-6, 6, 0.05)}, [&](std::span<const double> x) {
    return scale * std::exp(-x[0] * x[0]) * std::sin(3 * x[0]);
  });
}

}  // namespace

TEST_CASE("sampler mass concentrates at the phase-space center of a Gabor bump") {
  const double x0 = 0.6, w0 = 1.2;
  const SampledField bump = SampledField::sample({Axis::with_spacing(-8, 8, 0.05)}, [&](std::span<const double> x) {
    return std::exp(-kPi * (x[0] - x0) * (x[0] - x0)) * std::polar(1.0, 2 * kPi * w0 * x[0]);
  });
  SamplingPlan plan;
  plan.grid = {Axis::with_spacing(-6, 6, 0.6), Axis::with_spacing(-6, 6, 0.6)};
  const Sampler s = Sampler::build(bump, plan);
  const StftGrid& V = s.coefficients();
  double near = 0.0;
  std::vector<double> y(1), w(1);
  for (std::size_t j = 0; j < V.space_nodes(); ++j) {
    V.space_point(j, y);
    for (std::size_t k = 0; k < V.freq_nodes(); ++k) {
      V.freq_point(k, w);
      if (std::abs(y[0] - x0) <= 3 * 0.6 + 1e-9 && std::abs(w[0] - w0) <= 3 * 0.6 + 1e-9) near += s.cell_probability(V.index(j, k));
    }
  }
  CHECK(near >= 0.99);
}

TEST_CASE("zero target has no representing measure") {
  const SampledField zero = SampledField::sample({Axis::with_spacing(-6, 6, 0.1)}, [](auto) { return 0.0; });
  CHECK_THROWS_AS(Sampler::build(zero, SamplingPlan{}), DegenerateSampler);
}

TEST_CASE("sampler mass is linear in f and equals the l1 mass of every approximant") {
  const Sampler a = Sampler::build(target_field(), SamplingPlan{});
  const Sampler b = Sampler::build(target_field(2.0), SamplingPlan{});
  CHECK(b.total_mass() == doctest::Approx(2.0 * a.total_mass()).epsilon(1e-12));
  for (std::size_t n : {1u, 7u, 300u}) {
    const Approximant ap = sample_approximant(a, n, 99);
    CHECK(ap.size() == n);
    CHECK(ap.l1_mass() == doctest::Approx(a.total_mass()).epsilon(1e-12));
  }
  const Approximant one = sample_approximant(a, 1, 5);
  CHECK(std::abs(one.atoms()[0].coefficient) == doctest::Approx(a.total_mass()).epsilon(1e-15));
}

TEST_CASE("truncated b-marginal matches quadrature of theta") {
  for (WeightKind kind : {WeightKind::Local, WeightKind::Global}) {
    SamplingPlan plan;
    plan.weight = kind;
    const Sampler s = Sampler::build(target_field(), plan);
    for (double e : {0.0, 0.7, 3.5}) {
      const std::vector<double> eta{e};
      auto th = [&](double b) { return s.theta(eta, b); };
      const double flat = kind == WeightKind::Local ? 3.0 * e : 0.0;
      double q = 0.0;
      if (flat > 0) q += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(th, -flat, flat);
      q += 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(th, flat, 40.0, 15, 1e-14);
      CHECK(s.truncated_marginal(eta) == doctest::Approx(q).epsilon(1e-7));
    }
  }
}

TEST_CASE("approximants average to the truncated inversion integral") {
  const SampledField f = target_field();
  const Sampler s = Sampler::build(f, SamplingPlan{});
  const std::vector<double> probes{-2.5, -1.7, -1.1, -0.6, -0.2, 0.15, 0.5, 0.9, 1.6, 2.4};
  const int reps = 200;
  std::vector<double> sum(probes.size(), 0.0), sq(probes.size(), 0.0);
  for (int r = 0; r < reps; ++r) {
    const Approximant ap = sample_approximant(s, 64, 1000 + r);
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double v = ap.value(std::vector<double>{probes[i]});
      sum[i] += v;
      sq[i] += v * v;
    }
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const SampledField inv = istft(s.coefficients(), Window{}, {Axis{probes[i], 1.0, 1}});
    const double mean = sum[i] / reps;
    const double se = std::sqrt((sq[i] / reps - mean * mean) / (reps - 1));
    CAPTURE(probes[i]);
    CHECK(std::abs(mean - inv[0].real()) <= 3.0 * se);
  }
}

TEST_CASE("sampling is deterministic per seed") {
  const Sampler s = Sampler::build(target_field(), SamplingPlan{});
  const Approximant a = sample_approximant(s, 50, 7);
  const Approximant b = sample_approximant(s, 50, 7);
  const Approximant c = sample_approximant(s, 50, 8);
  std::ostringstream oa, ob, oc;
  a.write_csv(oa);
  b.write_csv(ob);
  c.write_csv(oc);
  CHECK(oa.str() == ob.str());
  CHECK(oa.str() != oc.str());
  CHECK(oa.str().rfind("y0,eta0,b,coef_re,coef_im\n", 0) == 0);
}

TEST_CASE("channel evaluation agrees with the dictionary's atom derivatives") {
  const Sampler s = Sampler::build(target_field(), SamplingPlan{});
  const Approximant ap = sample_approximant(s, 40, 3);
  const EvaluationSet pts = EvaluationSet::grid(Box::cube(1, -3, 3), 61);
  const Channels ch = ap.evaluate(pts, 1);
  const FixedConstants c;
  for (std::size_t p = 0; p < pts.size(); p += 7) {
    double v = 0.0, g = 0.0;
    for (const auto& atom : ap.atoms()) {
      const auto d = atom_grad(atom.params, c, Activation::relu(), {}, pts.point(p), 1);
      v += atom.coefficient.real() / atom.theta * d.value;
      g += atom.coefficient.real() / atom.theta * d.gradient[0];
    }
    CHECK(ch.value[p] == doctest::Approx(v).epsilon(1e-12));
    CHECK(ch.first[0][p] == doctest::Approx(g).epsilon(1e-12));
    CHECK(ap.value(pts.point(p)) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("a target that is one atom is recovered by placing that atom") {
  const FixedConstants c;
  const AtomParams p{{0.3}, {1.4}, -0.2};
  const EvaluationSet pts = EvaluationSet::grid(Box::cube(1, -3, 3), 301);
  Channels ref = Channels::zeros(1, 1, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto d = atom_grad(p, c, Activation::relu(), {}, pts.point(i), 1);
    ref.value[i] = 2.5 * d.value;
    ref.first[0][i] = 2.5 * d.gradient[0];
  }
  Approximant ap(1, c);
  ap.add({p, cplx(2.5 * 0.8, 0.3), 0.8});
  CHECK(sobolev_error(ref, ap.evaluate(pts, 1), {1, 2.0}, pts) < 1e-14);
}

TEST_CASE("global variant keeps spatial shifts inside the domain") {
  SamplingPlan plan;
  plan.weight = WeightKind::Global;
  plan.domain = Box::cube(1, -1.0, 1.5);
  const Sampler s = Sampler::build(target_field(), plan);
  const Approximant ap = sample_approximant(s, 500, 1);
  for (const auto& a : ap.atoms()) CHECK(plan.domain.contains(a.params.y));
}

TEST_CASE("rate experiment on a short N ladder") {
  RateExperimentConfig cfg;
  cfg.ns = {16, 64, 256, 1024};
  cfg.seeds = {1, 2, 3, 4, 5};
  const RateExperimentResult r = rate_experiment(Target::parse("target1d"), cfg);
  CHECK(r.report.slope < -0.3);
  CHECK(r.report.slope > -0.7);
  CHECK(r.errors.size() == 4);
  CHECK(r.errors[0].size() == 5);

  cfg.ns = {16, 32, 64};
  CHECK_THROWS_AS(rate_experiment(Target::parse("target1d"), cfg), std::invalid_argument);
  cfg.ns = {16, 32, 64, 1000};
  CHECK_THROWS_AS(rate_experiment(Target::parse("target1d"), cfg), std::invalid_argument);
}

TEST_CASE("doubling the recorded mass doubles small-N errors") {
  RateExperimentConfig cfg;
  cfg.ns = {16, 32, 64, 128};
  for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);
  const auto base = rate_experiment(Target::parse("target1d"), cfg);
  cfg.plan.mass_scale = 2.0;
  const auto doubled = rate_experiment(Target::parse("target1d"), cfg);
  CHECK(doubled.mass == doctest::Approx(2.0 * base.mass).epsilon(1e-12));
  for (std::size_t i = 0; i < 4; ++i) {
    const double ratio = doubled.report.points[i].median / base.report.points[i].median;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
  }
}
