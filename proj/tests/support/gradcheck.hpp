#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "modlab/networks.hpp"
#include "modlab/random.hpp"

namespace modlab::testing {

struct GradCheckResult {
  double worst_param = 0.0;  // largest relative error over parameter coordinates
  double worst_input = 0.0;  // largest relative error over input partials
  std::size_t configs = 0;
  std::size_t rejected = 0;  // configurations discarded for sitting near a kink
};

/// Relative error with a floor on the scale, so coordinates that vanish analytically are
/// compared in absolute terms against finite-difference roundoff.
inline double rel_error(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-4});
}

inline double min_preactivation(const Network& net, const Batch& batch) {
  double m = INFINITY;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto x = batch.point(s);
    if (const auto* p = std::get_if<ModNetParams>(&net)) {
      for (std::size_t k = 0; k < p->units(); ++k) {
        double z = p->b(k);
        for (std::size_t i = 0; i < p->dim(); ++i) z += p->eta(k, i) * x[i] / p->constants().tau();
        m = std::min(m, std::abs(z));
      }
    } else {
      const auto& q = std::get<PlainNetParams>(net);
      for (std::size_t k = 0; k < q.units(); ++k) {
        double z = q.m(k);
        for (std::size_t i = 0; i < q.dim(); ++i) z += q.omega(k, i) * x[i];
        m = std::min(m, std::abs(z));
      }
    }
  }
  return m;
}

/// Randomized small networks (1-5 units, d in {1, 2}, 4-sample batches) checked against
/// central differences with step h.
inline GradCheckResult gradient_check(std::size_t configs, std::uint64_t seed, double h = 1e-5) {
  std::mt19937_64 rng(seed);
  GradCheckResult out;
  while (out.configs < configs) {
    const std::size_t d = 1 + (rng() % 2);
    const std::size_t units = 1 + (rng() % 5);
    const bool mod = (rng() % 2) == 0;
    Network net = mod ? Network(ModNetParams(d, units, FixedConstants(uniform(rng, -1, 1), uniform(rng, 0.5, 2.0))))
                      : Network(PlainNetParams(d, units));
    std::visit([&](auto& p) {
      for (double& v : p.data()) v = uniform(rng, -2.0, 2.0);
    }, net);
    Batch batch;
    batch.dim = d;
    for (int s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < d; ++i) {
        batch.x.push_back(uniform(rng, -2.0, 2.0));
        batch.grad.push_back(uniform(rng, -1.0, 1.0));
      }
      batch.f.push_back(uniform(rng, -1.0, 1.0));
    }
    if (min_preactivation(net, batch) < 1e-2) {
      ++out.rejected;
      continue;
    }
    ++out.configs;

    std::vector<double> grad;
    loss_and_param_grad(net, batch, grad);
    auto data = std::visit([](auto& p) { return p.data(); }, net);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double keep = data[i];
      data[i] = keep + h;
      const double lp = h1_loss(net, batch);
      data[i] = keep - h;
      const double lm = h1_loss(net, batch);
      data[i] = keep;
      out.worst_param = std::max(out.worst_param, rel_error(grad[i], (lp - lm) / (2 * h)));
    }
    for (std::size_t s = 0; s < batch.size(); ++s) {
      std::vector<double> x(batch.point(s).begin(), batch.point(s).end());
      const NetOutput o = forward(net, x);
      for (std::size_t i = 0; i < d; ++i) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (forward(net, xp).value - forward(net, xm).value) / (2 * h);
        out.worst_input = std::max(out.worst_input, rel_error(o.gradient[i], fd));
      }
    }
  }
  return out;
}

}  // namespace modlab::testing
