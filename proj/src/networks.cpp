#include "modlab/networks.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "modlab/random.hpp"

namespace modlab {

namespace {

double relu(double z) { return z > 0.0 ? z : 0.0; }
double relu_d(double z) { return z >= 0.0 ? 1.0 : 0.0; }

/// Response factor S(z) = ReLU(z) e^{-(z - t)^2 / 2} times the spatial factor, with z-derivatives.
struct ModUnit {
  double S0, S1, S2;  // S, S', S'' each multiplied by P
};

ModUnit mod_unit(double z, double t, double r2) {
  const double u = z - t;
  const double g = std::exp(-0.5 * (u * u + r2));
  const double sv = relu(z);
  const double s1 = relu_d(z);
  return {sv * g, (s1 - sv * u) * g, (-2.0 * s1 * u + sv * (u * u - 1.0)) * g};
}

}  // namespace

ModNetParams::ModNetParams(std::size_t dim, std::size_t units, FixedConstants constants)
    : dim_(dim), units_(units), constants_(constants), data_(modnet_param_count(dim, units), 0.0) {}

PlainNetParams::PlainNetParams(std::size_t dim, std::size_t units)
    : dim_(dim), units_(units), data_(plainnet_param_count(dim, units), 0.0) {}

std::size_t modnet_param_count(std::size_t dim, std::size_t units) {
  if (dim == 0) throw std::invalid_argument("network input dimension must be positive");
  return units * (2 * dim + 2) + 1;
}
std::size_t plainnet_param_count(std::size_t dim, std::size_t units) {
  if (dim == 0) throw std::invalid_argument("network input dimension must be positive");
  return units * (dim + 2) + 1;
}
std::size_t count_params(const ModNetParams& p) { return p.data().size(); }
std::size_t count_params(const PlainNetParams& p) { return p.data().size(); }
std::size_t count_params(const Network& net) {
  return std::visit([](const auto& p) { return count_params(p); }, net);
}

void Batch::validate() const {
  if (f.empty()) throw std::invalid_argument("training batch is empty");
  if (x.size() != f.size() * dim || grad.size() != f.size() * dim) {
    throw std::invalid_argument("training batch arrays disagree in length");
  }
}

NetOutput modnet_forward(const ModNetParams& p, std::span<const double> x) {
  const std::size_t d = p.dim();
  if (x.size() != d) throw std::invalid_argument("input dimension does not match network");
  const double tau = p.constants().tau();
  const double t = p.constants().t();
  NetOutput out{p.c(), std::vector<double>(d, 0.0)};
  for (std::size_t k = 0; k < p.units(); ++k) {
    double z = p.b(k);
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      z += p.eta(k, i) * x[i] / tau;
      const double di = x[i] - p.y(k, i);
      r2 += di * di;
    }
    const ModUnit s = mod_unit(z, t, r2);
    out.value += p.a(k) * s.S0;
    for (std::size_t i = 0; i < d; ++i) {
      out.gradient[i] += p.a(k) * (s.S1 * p.eta(k, i) / tau - s.S0 * (x[i] - p.y(k, i)));
    }
  }
  return out;
}

NetOutput plainnet_forward(const PlainNetParams& p, std::span<const double> x) {
  const std::size_t d = p.dim();
  if (x.size() != d) throw std::invalid_argument("input dimension does not match network");
  NetOutput out{p.z(), std::vector<double>(d, 0.0)};
  for (std::size_t k = 0; k < p.units(); ++k) {
    double z = p.m(k);
    for (std::size_t i = 0; i < d; ++i) z += p.omega(k, i) * x[i];
    out.value += p.zeta(k) * relu(z);
    const double s1 = p.zeta(k) * relu_d(z);
    for (std::size_t i = 0; i < d; ++i) out.gradient[i] += s1 * p.omega(k, i);
  }
  return out;
}

NetOutput forward(const Network& net, std::span<const double> x) {
  if (const auto* m = std::get_if<ModNetParams>(&net)) return modnet_forward(*m, x);
  return plainnet_forward(std::get<PlainNetParams>(net), x);
}

double loss_and_param_grad(const ModNetParams& p, const Batch& batch, std::vector<double>& gradient) {
  batch.validate();
  const std::size_t d = p.dim();
  if (batch.dim != d) throw std::invalid_argument("batch dimension does not match network");
  const std::size_t N = p.units();
  const double tau = p.constants().tau();
  const double t = p.constants().t();
  gradient.assign(count_params(p), 0.0);

  const std::size_t P = batch.size();
  std::vector<double> z(N), r2(N), u(P), du(P * d);
  std::vector<ModUnit> units(N * P);
  double loss = 0.0;
  // Forward pass, caching the unit factors.
  for (std::size_t s = 0; s < P; ++s) {
    const auto x = batch.point(s);
    double val = p.c();
    double* g = &du[s * d];
    for (std::size_t i = 0; i < d; ++i) g[i] = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      double zk = p.b(k);
      double rk = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        zk += p.eta(k, i) * x[i] / tau;
        const double di = x[i] - p.y(k, i);
        rk += di * di;
      }
      const ModUnit m = mod_unit(zk, t, rk);
      units[s * N + k] = m;
      val += p.a(k) * m.S0;
      for (std::size_t i = 0; i < d; ++i) g[i] += p.a(k) * (m.S1 * p.eta(k, i) / tau - m.S0 * (x[i] - p.y(k, i)));
    }
    u[s] = val - batch.f[s];
    loss += u[s] * u[s];
    for (std::size_t i = 0; i < d; ++i) {
      g[i] -= batch.grad[s * d + i];
      loss += g[i] * g[i];
    }
  }
  const double scale = 2.0 / static_cast<double>(P);
  loss /= static_cast<double>(P);

  // Backward pass: residual r0 on the value channel, r_j on the partials.
  for (std::size_t s = 0; s < P; ++s) {
    const auto x = batch.point(s);
    const double r0 = scale * u[s];
    const double* r = &du[s * d];
    gradient.back() += r0;
    for (std::size_t k = 0; k < N; ++k) {
      const ModUnit& m = units[s * N + k];
      if (m.S0 == 0.0 && m.S1 == 0.0 && m.S2 == 0.0) continue;
      const double a = p.a(k);
      double rdot_eta = 0.0;  // sum_j r_j eta_j / tau
      double rdot_diff = 0.0; // sum_j r_j (x_j - y_j)
      for (std::size_t j = 0; j < d; ++j) {
        rdot_eta += scale * r[j] * p.eta(k, j) / tau;
        rdot_diff += scale * r[j] * (x[j] - p.y(k, j));
      }
      gradient[p.a_offset() + k] += r0 * m.S0 + m.S1 * rdot_eta - m.S0 * rdot_diff;
      gradient[p.b_offset() + k] += a * (r0 * m.S1 + m.S2 * rdot_eta - m.S1 * rdot_diff);
      for (std::size_t q = 0; q < d; ++q) {
        const double xm = x[q] / tau;
        const double dm = x[q] - p.y(k, q);
        const double rq = scale * r[q];
        gradient[k * d + q] +=
            a * (r0 * m.S1 * xm + m.S2 * xm * rdot_eta + m.S1 * rq / tau - m.S1 * xm * rdot_diff);
        gradient[p.y_offset() + k * d + q] +=
            a * (r0 * m.S0 * dm + m.S1 * dm * rdot_eta + m.S0 * (rq - dm * rdot_diff));
      }
    }
  }
  return loss;
}

double loss_and_param_grad(const PlainNetParams& p, const Batch& batch, std::vector<double>& gradient) {
  batch.validate();
  const std::size_t d = p.dim();
  if (batch.dim != d) throw std::invalid_argument("batch dimension does not match network");
  const std::size_t M = p.units();
  gradient.assign(count_params(p), 0.0);
  const std::size_t P = batch.size();
  const double scale = 2.0 / static_cast<double>(P);
  std::vector<double> pre(M), g(d);
  double loss = 0.0;
  for (std::size_t s = 0; s < P; ++s) {
    const auto x = batch.point(s);
    double val = p.z();
    for (std::size_t i = 0; i < d; ++i) g[i] = 0.0;
    for (std::size_t k = 0; k < M; ++k) {
      double zk = p.m(k);
      for (std::size_t i = 0; i < d; ++i) zk += p.omega(k, i) * x[i];
      pre[k] = zk;
      val += p.zeta(k) * relu(zk);
      const double s1 = p.zeta(k) * relu_d(zk);
      for (std::size_t i = 0; i < d; ++i) g[i] += s1 * p.omega(k, i);
    }
    const double r0 = val - batch.f[s];
    loss += r0 * r0;
    for (std::size_t i = 0; i < d; ++i) {
      g[i] -= batch.grad[s * d + i];
      loss += g[i] * g[i];
    }
    gradient.back() += scale * r0;
    for (std::size_t k = 0; k < M; ++k) {
      const double sv = relu(pre[k]);
      const double s1 = relu_d(pre[k]);
      if (s1 == 0.0) continue;
      double rdot_omega = 0.0;
      for (std::size_t j = 0; j < d; ++j) rdot_omega += g[j] * p.omega(k, j);
      gradient[p.zeta_offset() + k] += scale * (r0 * sv + s1 * rdot_omega);
      gradient[p.m_offset() + k] += scale * r0 * p.zeta(k) * s1;
      for (std::size_t q = 0; q < d; ++q) {
        gradient[k * d + q] += scale * p.zeta(k) * s1 * (r0 * x[q] + g[q]);
      }
    }
  }
  return loss / static_cast<double>(P);
}

double loss_and_param_grad(const Network& net, const Batch& batch, std::vector<double>& gradient) {
  return std::visit([&](const auto& p) { return loss_and_param_grad(p, batch, gradient); }, net);
}

double h1_loss(const Network& net, const Batch& batch) {
  batch.validate();
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const NetOutput o = forward(net, batch.point(s));
    const double r0 = o.value - batch.f[s];
    loss += r0 * r0;
    for (std::size_t i = 0; i < batch.dim; ++i) {
      const double ri = o.gradient[i] - batch.grad[s * batch.dim + i];
      loss += ri * ri;
    }
  }
  return loss / static_cast<double>(batch.size());
}

void initialize(ModNetParams& p, const Box& domain, std::mt19937_64& rng) {
  if (domain.dim() != p.dim()) throw std::invalid_argument("initialization box dimension does not match network");
  const double sd = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(p.units(), 1)));
  for (std::size_t k = 0; k < p.units(); ++k) {
    for (std::size_t i = 0; i < p.dim(); ++i) p.eta(k, i) = uniform(rng, -3.0, 3.0);
    p.b(k) = uniform(rng, -3.0, 3.0);
    for (std::size_t i = 0; i < p.dim(); ++i) p.y(k, i) = uniform(rng, domain.lo[i], domain.hi[i]);
    p.a(k) = normal(rng, sd);
  }
  p.c() = 0.0;
}

void initialize(PlainNetParams& p, std::mt19937_64& rng) {
  const double sd = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(p.units(), 1)));
  for (std::size_t k = 0; k < p.units(); ++k) {
    for (std::size_t i = 0; i < p.dim(); ++i) p.omega(k, i) = uniform(rng, -3.0, 3.0);
    p.m(k) = uniform(rng, -3.0, 3.0);
    p.zeta(k) = normal(rng, sd);
  }
  p.z() = 0.0;
}

void write_checkpoint(std::ostream& os, const Network& net) {
  const bool mod = std::holds_alternative<ModNetParams>(net);
  std::span<const double> data;
  std::size_t dim = 0, units = 0;
  double t = 0.0, tau = 1.0;
  if (mod) {
    const auto& p = std::get<ModNetParams>(net);
    data = p.data();
    dim = p.dim();
    units = p.units();
    t = p.constants().t();
    tau = p.constants().tau();
  } else {
    const auto& p = std::get<PlainNetParams>(net);
    data = p.data();
    dim = p.dim();
    units = p.units();
  }
  binary::put_u64(os, mod ? 0 : 1);
  binary::put_u64(os, dim);
  binary::put_u64(os, units);
  binary::put_u64(os, data.size());
  binary::put_f64(os, t);
  binary::put_f64(os, tau);
  for (double v : data) binary::put_f64(os, v);
}

Network read_checkpoint(std::istream& is) {
  const auto kind = binary::get_u64(is);
  const auto dim = binary::get_u64(is);
  const auto units = binary::get_u64(is);
  const auto count = binary::get_u64(is);
  const double t = binary::get_f64(is);
  const double tau = binary::get_f64(is);
  if (kind > 1) throw std::runtime_error(fmt::format("unknown checkpoint kind {}", kind));
  const std::size_t expected = kind == 0 ? modnet_param_count(dim, units) : plainnet_param_count(dim, units);
  if (count != expected) {
    throw std::runtime_error(fmt::format("checkpoint holds {} parameters, layout needs {}", count, expected));
  }
  auto fill = [&](std::span<double> data) {
    for (double& v : data) v = binary::get_f64(is);
  };
  if (kind == 0) {
    ModNetParams p(dim, units, FixedConstants(t, tau));
    fill(p.data());
    return p;
  }
  PlainNetParams p(dim, units);
  fill(p.data());
  return p;
}

}  // namespace modlab
