#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "modlab/dictionary.hpp"
#include "modlab/networks.hpp"
#include "modlab/random.hpp"
#include "modlab/targets.hpp"
#include "modlab/training.hpp"
#include "support/gradcheck.hpp"

using namespace modlab;

TEST_CASE("parameter counts for the comparison table") {
  CHECK(count_params(ModNetParams(1, 300)) == 1201);
  CHECK(count_params(PlainNetParams(1, 400)) == 1201);
  CHECK(count_params(ModNetParams(2, 300)) == 1801);
  CHECK(count_params(PlainNetParams(2, 450)) == 1801);
  CHECK(modnet_param_count(1, 51) == plainnet_param_count(1, 68));
}

TEST_CASE("degenerate output layers") {
  ModNetParams m(2, 3);
  m.c() = 0.75;
  for (std::size_t k = 0; k < 3; ++k) {
    m.eta(k, 0) = 1.0;
    m.b(k) = 0.5;
  }
  const std::vector<double> x{0.3, -0.2};
  const NetOutput o = modnet_forward(m, x);
  CHECK(o.value == 0.75);
  CHECK(o.gradient == std::vector<double>{0.0, 0.0});

  PlainNetParams p(1, 2);
  p.z() = -1.5;
  p.omega(0, 0) = 2.0;
  CHECK(plainnet_forward(p, std::vector<double>{1.0}).value == -1.5);
  PlainNetParams one(1, 1);
  one.omega(0, 0) = 1.0;
  one.zeta(0) = 0.4;
  one.z() = 0.1;
  const NetOutput q = plainnet_forward(one, std::vector<double>{2.0});
  CHECK(q.value == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(q.gradient[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("single ModNet unit equals the dictionary atom with unit windows") {
  ModNetParams m(2, 1, FixedConstants(0.0, 1.0));
  m.eta(0, 0) = 0.8;
  m.eta(0, 1) = -0.3;
  m.b(0) = 0.2;
  m.y(0, 0) = 0.1;
  m.y(0, 1) = 0.5;
  m.a(0) = 1.0;
  const AtomParams atom{{0.1, 0.5}, {0.8, -0.3}, 0.2};
  const AtomWindows unit{GaussianNorm::Unit, GaussianNorm::Unit};
  for (double x0 : {-1.0, 0.4, 2.0}) {
    const std::vector<double> x{x0, 0.7};
    const auto ref = atom_grad(atom, FixedConstants(), Activation::relu(), unit, x, 1);
    const NetOutput o = modnet_forward(m, x);
    CHECK(o.value == doctest::Approx(ref.value).epsilon(1e-14));
    CHECK(o.gradient[0] == doctest::Approx(ref.gradient[0]).epsilon(1e-13));
    CHECK(o.gradient[1] == doctest::Approx(ref.gradient[1]).epsilon(1e-13));
  }
}

TEST_CASE("ModNet output is the sum of its units") {
  std::mt19937_64 rng(9);
  ModNetParams m(2, 6);
  initialize(m, Box::cube(2, -3, 3), rng);
  m.c() = 0.3;
  const std::vector<double> x{0.2, -0.9};
  double sum = m.c();
  for (std::size_t k = 0; k < m.units(); ++k) {
    ModNetParams single(2, 1);
    for (std::size_t i = 0; i < 2; ++i) {
      single.eta(0, i) = m.eta(k, i);
      single.y(0, i) = m.y(k, i);
    }
    single.b(0) = m.b(k);
    single.a(0) = m.a(k);
    sum += modnet_forward(single, x).value;
  }
  CHECK(std::abs(modnet_forward(m, x).value - sum) < 1e-12);
}

TEST_CASE("analytic gradients match central differences on 1000 random small networks") {
  const auto r = testing::gradient_check(1000, 2024);
  CHECK(r.configs == 1000);
  CHECK(r.worst_param < 1e-5);
  CHECK(r.worst_input < 1e-5);
}

TEST_CASE("exact fit has zero loss and zero gradient") {
  std::mt19937_64 rng(1);
  ModNetParams m(1, 4);
  initialize(m, Box::cube(1, -3, 3), rng);
  Batch b;
  b.dim = 1;
  for (double x : {-1.0, -0.2, 0.5, 1.7}) {
    const NetOutput o = modnet_forward(m, std::vector<double>{x});
    b.x.push_back(x);
    b.f.push_back(o.value);
    b.grad.push_back(o.gradient[0]);
  }
  std::vector<double> g;
  CHECK(loss_and_param_grad(m, b, g) == 0.0);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("a small step along the negative gradient lowers the loss") {
  const Target target = Target::parse("target1d");
  TrainConfig cfg;
  cfg.samples = 200;
  cfg.units = 10;
  int decreased = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.model = seed % 2 ? ModelKind::ModNet : ModelKind::PlainNet;
    const Batch batch = make_batch(target, cfg, seed);
    Network net = make_network(cfg, seed);
    std::vector<double> g;
    const double before = loss_and_param_grad(net, batch, g);
    auto data = std::visit([](auto& p) { return p.data(); }, net);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= 1e-4 * g[i];
    decreased += h1_loss(net, batch) < before;
  }
  CHECK(decreased == 20);
}

TEST_CASE("loss is independent of batch partitioning") {
  const Target target = Target::parse("target2d");
  TrainConfig cfg;
  cfg.domain = Box::cube(2, -3, 3);
  cfg.grid_nodes = 8;
  cfg.units = 5;
  const Batch full = make_batch(target, cfg, 3);
  const Network net = make_network(cfg, 3);
  std::vector<double> g_full;
  const double l_full = loss_and_param_grad(net, full, g_full);
  Batch lo, hi;
  lo.dim = hi.dim = 2;
  for (std::size_t s = 0; s < full.size(); ++s) {
    Batch& part = s < 20 ? lo : hi;
    part.x.insert(part.x.end(), full.x.begin() + 2 * s, full.x.begin() + 2 * s + 2);
    part.grad.insert(part.grad.end(), full.grad.begin() + 2 * s, full.grad.begin() + 2 * s + 2);
    part.f.push_back(full.f[s]);
  }
  std::vector<double> g_lo, g_hi;
  const double l_lo = loss_and_param_grad(net, lo, g_lo);
  const double l_hi = loss_and_param_grad(net, hi, g_hi);
  const double wl = 20.0 / full.size(), wh = 1.0 - wl;
  CHECK(l_full == doctest::Approx(wl * l_lo + wh * l_hi).epsilon(1e-13));
  for (std::size_t i = 0; i < g_full.size(); ++i) {
    CHECK(g_full[i] == doctest::Approx(wl * g_lo[i] + wh * g_hi[i]).epsilon(1e-10).scale(1e-12));
  }
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(4);
  ModNetParams m(2, 3, FixedConstants(0.25, 1.5));
  initialize(m, Box::cube(2, -1, 1), rng);
  std::stringstream ss;
  write_checkpoint(ss, m);
  CHECK(ss.str().size() == 8 * (6 + count_params(m)));
  const Network back = read_checkpoint(ss);
  const auto& r = std::get<ModNetParams>(back);
  CHECK(r.constants().t() == 0.25);
  CHECK(std::equal(r.data().begin(), r.data().end(), m.data().begin()));

  PlainNetParams p(1, 4);
  initialize(p, rng);
  std::stringstream sp;
  write_checkpoint(sp, p);
  const auto q = std::get<PlainNetParams>(read_checkpoint(sp));
  CHECK(std::equal(q.data().begin(), q.data().end(), p.data().begin()));

  std::stringstream bad(ss.str().substr(0, 20));
  CHECK_THROWS(read_checkpoint(bad));
}
