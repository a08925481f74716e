#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "modlab/dictionary.hpp"
#include "modlab/field.hpp"
#include "modlab/random.hpp"
#include "modlab/sobolev.hpp"
#include "modlab/stft.hpp"
#include "modlab/targets.hpp"

namespace modlab {

enum class WeightKind { Local, Global };

struct SamplingPlan {
  StftGridSpec grid;
  /// Omega. Sets R_Omega for the local weight and restricts y for the global one.
  Box domain = Box::cube(1, -3.0, 3.0);
  WeightKind weight = WeightKind::Local;
  int n = 1;
  double local_s = -2.0;
  double global_s = 2.0;
  double b_truncation = 40.0;
  std::size_t b_table_size = 4096;
  /// Multiplies the recorded mass; 1 except in sensitivity experiments.
  double mass_scale = 1.0;
  StftOptions stft_options;

  void validate() const;
};

class DegenerateSampler : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One term of an approximant: the weighted atom rho / theta with a complex coefficient.
struct WeightedAtom {
  AtomParams params;
  cplx coefficient;
  double theta = 1.0;
};

/// Re sum_j c_j rho_j(x) / theta_j + offset, with ReLU atoms and canonical windows.
class Approximant {
 public:
  Approximant(std::size_t dim, FixedConstants constants) : dim_(dim), constants_(constants) {}

  std::size_t dim() const { return dim_; }
  const std::vector<WeightedAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double offset() const { return offset_; }
  void set_offset(double c) { offset_ = c; }
  void add(WeightedAtom atom);

  double l1_mass() const;
  double value(std::span<const double> x) const;
  /// Value and first-order channels at every point of the set.
  Channels evaluate(const EvaluationSet& points, int order) const;

  /// Atom rows carry the effective coefficient c_j / theta_j of the unweighted atom.
  void write_csv(std::ostream& os) const;

 private:
  std::size_t dim_;
  FixedConstants constants_;
  std::vector<WeightedAtom> atoms_;
  double offset_ = 0.0;
};

/// Importance sampler of the representing measure over (y, eta, b).
class Sampler {
 public:
  static Sampler build(const SampledField& f, const SamplingPlan& plan,
                       const FixedConstants& constants = FixedConstants());

  std::size_t dim() const { return coeffs_.dim(); }
  const StftGrid& coefficients() const { return coeffs_; }
  const SamplingPlan& plan() const { return plan_; }
  const FixedConstants& constants() const { return constants_; }
  /// Variation-norm estimate: the l1 mass of every sampled approximant.
  double total_mass() const { return mass_; }

  /// Probability of the STFT cell with the given flat index into coefficients().
  double cell_probability(std::size_t cell) const;

  /// theta(eta, b) and its truncated b-marginal for this plan.
  double theta(std::span<const double> eta, double b) const;
  double truncated_marginal(std::span<const double> eta) const;

  /// Draws one atom with coefficient (total_mass / count) * phase.
  WeightedAtom draw(std::mt19937_64& rng, std::size_t count) const;

 private:
  Sampler(StftGrid coeffs, SamplingPlan plan, FixedConstants constants)
      : coeffs_(std::move(coeffs)), plan_(std::move(plan)), constants_(constants) {}

  double eta_factor(std::span<const double> eta) const;
  double flat_halfwidth(std::span<const double> eta) const;
  double tail(double u) const;
  double tail_mass(double u) const;
  double tail_inverse(double mass) const;
  double sample_b(std::span<const double> eta, double u) const;

  StftGrid coeffs_;
  SamplingPlan plan_;
  FixedConstants constants_;
  cplx kappa_;
  double mass_ = 0.0;
  std::vector<double> prob_;        // per STFT cell
  std::vector<std::size_t> cells_;  // cells with positive mass
  std::vector<double> cdf_;         // cumulative probability over cells_
  std::vector<double> tail_cdf_;    // int_0^u tail on the b table
  double tail_step_ = 0.0;
};

/// N i.i.d. draws; identical (sampler, count, seed) give identical output.
/// rate_experiment seeds run (N, seed) with derive_seed(seed, N).
Approximant sample_approximant(const Sampler& sampler, std::size_t count, std::uint64_t seed);

struct RateExperimentConfig {
  std::vector<std::size_t> ns;
  std::vector<std::uint64_t> seeds;
  SobolevSpec sobolev;
  SamplingPlan plan;
  /// Grid on which the target is sampled before the STFT.
  double input_spacing = 0.05;
  std::size_t eval_nodes = 601;

  void validate() const;
};

struct RateExperimentResult {
  RateReport report;
  /// errors[i][k] for ns[i] and seeds[k].
  std::vector<std::vector<double>> errors;
  double mass = 0.0;
};

RateExperimentResult rate_experiment(const Target& target, const RateExperimentConfig& config);

/// Analytic value and gradient channels of a target on an evaluation set.
Channels target_channels(const Target& target, const EvaluationSet& points, int order);

}  // namespace modlab
