#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "modlab/training.hpp"

using namespace modlab;

TEST_CASE("Adam leaves parameters alone under a zero gradient") {
  AdamState s(3);
  std::vector<double> p{1.0, -2.0, 0.5};
  const auto before = p;
  const std::vector<double> g(3, 0.0);
  OptimizerConfig cfg;
  adam_step(s, p, g, cfg);
  CHECK(p == before);
  CHECK(s.step == 1);
}

TEST_CASE("first Adam step under a constant gradient moves by about lr") {
  OptimizerConfig cfg;
  cfg.lr = 1e-2;
  for (double g0 : {1e-3, 0.7, -40.0}) {
    AdamState s(1);
    std::vector<double> p{3.0};
    const std::vector<double> g{g0};
    adam_step(s, p, g, cfg);
    const double expected = cfg.lr * std::abs(g0) / (std::abs(g0) + cfg.eps);
    CHECK(std::abs(3.0 - p[0]) == doctest::Approx(expected).epsilon(1e-12));
    CHECK((3.0 - p[0]) * g0 > 0.0);
  }
}

TEST_CASE("AdamW shrinks by lr * lambda * theta beyond Adam") {
  OptimizerConfig adam, adamw;
  adamw.kind = OptimizerKind::AdamW;
  adamw.weight_decay = 0.05;
  adam.lr = adamw.lr = 1e-3;
  std::vector<double> pa{2.0, -1.0}, pw = pa;
  const std::vector<double> g{0.3, 0.1};
  AdamState sa(2), sw(2);
  adam_step(sa, pa, g, adam);
  adam_step(sw, pw, g, adamw);
  CHECK(pa[0] - pw[0] == doctest::Approx(1e-3 * 0.05 * 2.0).epsilon(1e-9));
  CHECK(pa[1] - pw[1] == doctest::Approx(1e-3 * 0.05 * -1.0).epsilon(1e-9));
}

TEST_CASE("Adam rejects mismatched sizes") {
  AdamState s(2);
  std::vector<double> p(3, 0.0), g(3, 0.0);
  CHECK_THROWS_AS(adam_step(s, p, g, OptimizerConfig{}), std::invalid_argument);
  AdamState ok(3);
  std::vector<double> short_g(2, 0.0);
  CHECK_THROWS_AS(adam_step(ok, p, short_g, OptimizerConfig{}), std::invalid_argument);
}

TEST_CASE("decreasing losses never trigger a reduction") {
  PlateauScheduler s(PlateauSchedulerConfig{}, 1e-3);
  for (int e = 0; e < 2000; ++e) CHECK(s.step(1.0 / (1.0 + e)) == 1e-3);
  CHECK(s.reductions().empty());
}

TEST_CASE("constant loss reduces at the hand-traced epochs") {
  PlateauScheduler s(PlateauSchedulerConfig{0.9, 100, 200, 1e-8}, 1e-3);
  for (int e = 0; e < 1000; ++e) s.step(1.0);
  CHECK(s.reductions() == std::vector<std::size_t>{101, 401, 701});
  CHECK(s.lr() == doctest::Approx(1e-3 * 0.9 * 0.9 * 0.9).epsilon(1e-15));
}

TEST_CASE("the rate floors at min_lr") {
  PlateauScheduler s(PlateauSchedulerConfig{0.5, 1, 0, 1e-8}, 1e-3);
  for (int e = 0; e < 200; ++e) CHECK(s.step(2.0) >= 1e-8);
  CHECK(s.lr() == 1e-8);
  // 1e-3 * 0.5^k >= 1e-8 for k <= 16; the floor is one more actual reduction
  CHECK(s.reductions().size() == 17);
}

namespace {

// Counts stagnation and cooldown separately per epoch, straight from the rule text.
struct ReferenceScheduler {
  PlateauSchedulerConfig cfg;
  double lr;
  double best = INFINITY;
  std::size_t since_improvement = 0, quiet = 0;
  std::vector<std::size_t> cuts;

  void feed(std::size_t epoch, double loss) {
    const bool improved = loss < best;
    if (improved) best = loss;
    const bool cooling = quiet > 0;
    if (cooling) quiet -= 1;
    since_improvement = (improved || cooling) ? 0 : since_improvement + 1;
    if (since_improvement == cfg.patience) {
      const double next = lr * cfg.factor < cfg.min_lr ? cfg.min_lr : lr * cfg.factor;
      if (next != lr) cuts.push_back(epoch);
      lr = next;
      quiet = cfg.cooldown;
      since_improvement = 0;
    }
  }
};

}  // namespace

TEST_CASE("scheduler agrees with a reference model on random loss sequences") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    PlateauSchedulerConfig cfg;
    cfg.factor = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    cfg.patience = 1 + rng() % 12;
    cfg.cooldown = rng() % 15;
    cfg.min_lr = 1e-6;
    PlateauScheduler s(cfg, 1e-2);
    ReferenceScheduler ref{cfg, 1e-2};
    double loss = 1.0;
    for (std::size_t e = 1; e <= 400; ++e) {
      switch (rng() % 4) {
        case 0: loss *= 0.99; break;
        case 1: loss *= 1.01; break;
        default: break;
      }
      ref.feed(e, loss);
      REQUIRE(s.step(loss) == ref.lr);
    }
    CHECK(s.reductions() == ref.cuts);
  }
}

namespace {
TrainConfig small_config(ModelKind kind) {
  TrainConfig cfg;
  cfg.model = kind;
  cfg.units = 8;
  cfg.samples = 300;
  cfg.epochs = 60;
  return cfg;
}
}  // namespace

TEST_CASE("zero epochs record only the initial loss") {
  TrainConfig cfg = small_config(ModelKind::ModNet);
  cfg.epochs = 0;
  const RunRecord r = train(Target::parse("target1d"), cfg, 5);
  CHECK(r.losses.size() == 1);
  CHECK(r.lrs.size() == 1);
  CHECK(std::isfinite(r.final_loss()));
  CHECK_FALSE(r.aborted_at);
}

TEST_CASE("training is deterministic per seed") {
  const Target target = Target::parse("target1d");
  for (ModelKind kind : {ModelKind::ModNet, ModelKind::PlainNet}) {
    TrainConfig cfg = small_config(kind);
    cfg.use_scheduler = true;
    cfg.scheduler.patience = 5;
    cfg.scheduler.cooldown = 3;
    const RunRecord a = train(target, cfg, 11);
    const RunRecord b = train(target, cfg, 11);
    const RunRecord c = train(target, cfg, 12);
    CHECK(a.losses == b.losses);
    CHECK(a.lrs == b.lrs);
    CHECK(a.losses != c.losses);
    std::ostringstream sa, sb;
    write_run_csv(sa, a);
    write_run_csv(sb, b);
    CHECK(sa.str() == sb.str());
  }
}

TEST_CASE("a vanishing rate keeps the initial parameters") {
  const Target target = Target::parse("target1d");
  TrainConfig cfg = small_config(ModelKind::ModNet);
  cfg.optimizer.lr = 1e-14;
  const Network init = make_network(cfg, 3);
  const RunRecord r = train(target, cfg, 3);
  const auto& p0 = std::get<ModNetParams>(init).data();
  const auto& p1 = std::get<ModNetParams>(*r.final_params).data();
  double worst = 0.0;
  for (std::size_t i = 0; i < p0.size(); ++i) worst = std::max(worst, std::abs(p0[i] - p1[i]));
  CHECK(worst < 1e-11);
  CHECK(r.final_loss() == doctest::Approx(r.losses.front()).epsilon(1e-9));
}

TEST_CASE("loss traces stay finite on default-style configs") {
  for (const char* name : {"target1d", "target2d"}) {
    const Target target = Target::parse(name);
    for (ModelKind kind : {ModelKind::ModNet, ModelKind::PlainNet}) {
      for (OptimizerKind opt : {OptimizerKind::Adam, OptimizerKind::AdamW}) {
        TrainConfig cfg = small_config(kind);
        cfg.domain = Box::cube(target.dim(), -3.0, 3.0);
        cfg.grid_nodes = 11;
        cfg.optimizer.kind = opt;
        cfg.use_scheduler = true;
        const RunRecord r = train(target, cfg, 21);
        CHECK_FALSE(r.aborted_at);
        CHECK(r.losses.size() == cfg.epochs + 1);
        CHECK(std::all_of(r.losses.begin(), r.losses.end(), [](double v) { return std::isfinite(v); }));
        CHECK(r.final_loss() < r.losses.front());
      }
    }
  }
}

TEST_CASE("mismatched target dimension is rejected") {
  TrainConfig cfg = small_config(ModelKind::ModNet);
  CHECK_THROWS_AS(make_batch(Target::parse("target2d"), cfg, 1), std::invalid_argument);
}
