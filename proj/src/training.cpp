#include "modlab/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "modlab/random.hpp"

namespace modlab {

void OptimizerConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be nonnegative");
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimizerConfig& config, double lr) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument(fmt::format("Adam sizes disagree: params {}, grads {}, moments {}/{}",
                                            params.size(), grads.size(), state.m.size(), state.v.size()));
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  const bool decoupled = config.kind == OptimizerKind::AdamW && config.weight_decay > 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    double update = mhat / (std::sqrt(vhat) + config.eps);
    if (decoupled) update += config.weight_decay * params[i];
    params[i] -= lr * update;
  }
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               const OptimizerConfig& config) {
  adam_step(state, params, grads, config, config.lr);
}

void PlateauSchedulerConfig::validate() const {
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("scheduler factor must lie in (0, 1)");
  if (patience == 0) throw std::invalid_argument("scheduler patience must be positive");
  if (!(min_lr > 0.0)) throw std::invalid_argument("scheduler min_lr must be positive");
}

PlateauScheduler::PlateauScheduler(PlateauSchedulerConfig config, double initial_lr)
    : config_(config), lr_(initial_lr), best_(std::numeric_limits<double>::infinity()) {
  config_.validate();
  if (!(initial_lr > 0.0)) throw std::invalid_argument("initial learning rate must be positive");
}

double PlateauScheduler::step(double loss) {
  ++epoch_;
  if (loss < best_) {
    best_ = loss;
    bad_ = 0;
  } else {
    ++bad_;
  }
  if (cooldown_left_ > 0) {
    --cooldown_left_;
    bad_ = 0;
  }
  if (bad_ >= config_.patience) {
    const double next = std::max(lr_ * config_.factor, config_.min_lr);
    if (next < lr_) reductions_.push_back(epoch_);
    lr_ = next;
    cooldown_left_ = config_.cooldown;
    bad_ = 0;
  }
  return lr_;
}

void TrainConfig::validate() const {
  domain.validate();
  if (domain.dim() != 1 && domain.dim() != 2) throw std::invalid_argument("training supports dimensions 1 and 2");
  if (units == 0) throw std::invalid_argument("network needs at least one unit");
  if (domain.dim() == 1 && samples == 0) throw std::invalid_argument("sample count must be positive");
  if (domain.dim() == 2 && grid_nodes < 2) throw std::invalid_argument("training grid needs at least two nodes per axis");
  optimizer.validate();
  if (use_scheduler) scheduler.validate();
  if (tau == 0.0) throw std::invalid_argument("tau must be nonzero");
}

Batch make_batch(const Target& target, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = config.domain.dim();
  if (target.dim() != d) throw std::invalid_argument("target and training domain dimensions differ");
  Batch batch;
  batch.dim = d;
  if (d == 1) {
    std::mt19937_64 rng(derive_seed(seed, 2));
    for (std::size_t i = 0; i < config.samples; ++i) {
      batch.x.push_back(uniform(rng, config.domain.lo[0], config.domain.hi[0]));
    }
  } else {
    const EvaluationSet grid = EvaluationSet::grid(config.domain, config.grid_nodes);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      for (double v : grid.point(p)) batch.x.push_back(v);
    }
  }
  const std::size_t P = batch.x.size() / d;
  batch.f.resize(P);
  batch.grad.resize(P * d);
  for (std::size_t p = 0; p < P; ++p) {
    batch.f[p] = target.value_and_gradient(batch.point(p), {&batch.grad[p * d], d});
  }
  return batch;
}

Network make_network(const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(derive_seed(seed, 1));
  const std::size_t d = config.domain.dim();
  if (config.model == ModelKind::ModNet) {
    ModNetParams p(d, config.units, FixedConstants(config.t, config.tau));
    initialize(p, config.domain, rng);
    return p;
  }
  PlainNetParams p(d, config.units);
  initialize(p, rng);
  return p;
}

namespace {
std::span<double> params_of(Network& net) {
  return std::visit([](auto& p) { return p.data(); }, net);
}
}  // namespace

RunRecord train(Network net, const Batch& batch, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunRecord run;
  run.seed = seed;
  std::vector<double> grad;
  AdamState state(count_params(net));
  std::optional<PlateauScheduler> scheduler;
  if (config.use_scheduler) scheduler.emplace(config.scheduler, config.optimizer.lr);
  double lr = config.optimizer.lr;

  double loss = loss_and_param_grad(net, batch, grad);
  run.losses.push_back(loss);
  run.lrs.push_back(lr);
  if (!std::isfinite(loss)) {
    run.aborted_at = 0;
  } else {
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      adam_step(state, params_of(net), grad, config.optimizer, lr);
      run.lrs.push_back(lr);
      loss = loss_and_param_grad(net, batch, grad);
      run.losses.push_back(loss);
      if (!std::isfinite(loss)) {
        run.aborted_at = epoch;
        break;
      }
      if (scheduler) lr = scheduler->step(loss);
    }
  }
  run.final_params = std::move(net);
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

RunRecord train(const Target& target, const TrainConfig& config, std::uint64_t seed) {
  const Batch batch = make_batch(target, config, seed);
  return train(make_network(config, seed), batch, config, seed);
}

void write_run_csv(std::ostream& os, const RunRecord& run) {
  os << "epoch,loss,lr\n";
  for (std::size_t e = 0; e < run.losses.size(); ++e) {
    os << fmt::format("{},{:.17g},{:.17g}\n", e, run.losses[e], run.lrs[e]);
  }
}

}  // namespace modlab
