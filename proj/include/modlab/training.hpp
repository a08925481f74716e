#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modlab/networks.hpp"
#include "modlab/sobolev.hpp"
#include "modlab/targets.hpp"

namespace modlab {

enum class OptimizerKind { Adam, AdamW };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled decay; ignored by plain Adam.
  double weight_decay = 1e-2;
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam update at learning rate `lr`. AdamW additionally subtracts
/// lr * weight_decay * theta. Throws std::invalid_argument on a size mismatch.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimizerConfig& config, double lr);
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimizerConfig& config);

struct PlateauSchedulerConfig {
  double factor = 0.9;
  std::size_t patience = 100;
  std::size_t cooldown = 200;
  double min_lr = 1e-8;
  void validate() const;
};

/// Reduce-on-plateau controller. Epochs are counted from 1. A loss improves when it is
/// strictly below the best so far. Inside cooldown the bad-epoch count stays at zero; once
/// it reaches `patience` the rate becomes max(lr * factor, min_lr) and cooldown restarts.
class PlateauScheduler {
 public:
  PlateauScheduler(PlateauSchedulerConfig config, double initial_lr);

  /// Feeds the loss of the epoch just finished; returns the rate for the next one.
  double step(double loss);

  double lr() const { return lr_; }
  std::size_t epoch() const { return epoch_; }
  std::size_t bad_epochs() const { return bad_; }
  std::size_t cooldown_left() const { return cooldown_left_; }
  double best() const { return best_; }
  /// Epochs at which the rate actually decreased.
  const std::vector<std::size_t>& reductions() const { return reductions_; }

 private:
  PlateauSchedulerConfig config_;
  double lr_;
  double best_;
  std::size_t epoch_ = 0;
  std::size_t bad_ = 0;
  std::size_t cooldown_left_ = 0;
  std::vector<std::size_t> reductions_;
};

enum class ModelKind { ModNet, PlainNet };

struct TrainConfig {
  ModelKind model = ModelKind::ModNet;
  std::size_t units = 50;
  Box domain = Box::cube(1, -3.0, 3.0);
  /// 1-D: number of uniform random samples. 2-D: nodes per axis of the uniform grid.
  std::size_t samples = 10000;
  std::size_t grid_nodes = 51;
  std::size_t epochs = 5000;
  OptimizerConfig optimizer;
  bool use_scheduler = false;
  PlateauSchedulerConfig scheduler;
  double t = 0.0;
  double tau = 1.0;

  void validate() const;
};

struct RunRecord {
  std::uint64_t seed = 0;
  /// losses[0] is the initial loss, losses[e] the loss after epoch e.
  std::vector<double> losses;
  /// lrs[e] is the rate used for the update of epoch e (lrs[0] = initial rate).
  std::vector<double> lrs;
  std::optional<Network> final_params;
  double wall_seconds = 0.0;
  /// Epoch whose loss was not finite, when the run stopped early.
  std::optional<std::size_t> aborted_at;

  double final_loss() const { return losses.back(); }
};

/// Training set: seeded uniform samples in 1-D, the uniform grid over the box in 2-D.
Batch make_batch(const Target& target, const TrainConfig& config, std::uint64_t seed);

Network make_network(const TrainConfig& config, std::uint64_t seed);

/// Full-batch training on the H^1 loss; deterministic per (config, seed).
RunRecord train(const Target& target, const TrainConfig& config, std::uint64_t seed);
/// Continues from explicit parameters and data (used by tests).
RunRecord train(Network net, const Batch& batch, const TrainConfig& config, std::uint64_t seed);

/// Columns: epoch,loss,lr
void write_run_csv(std::ostream& os, const RunRecord& run);

}  // namespace modlab
