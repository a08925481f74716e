#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "modlab/dictionary.hpp"
#include "modlab/sobolev.hpp"

namespace modlab {

/// Shallow modulation network
///   u(x) = sum_k a_k ReLU(z_k) e^{-(z_k - t)^2 / 2} e^{-|x - y_k|^2 / 2} + c,  z_k = eta_k.x / tau + b_k.
/// Flat parameter order: eta (units x dim, row-major), b (units), y (units x dim), a (units), c.
class ModNetParams {
 public:
  ModNetParams(std::size_t dim, std::size_t units, FixedConstants constants = FixedConstants());

  std::size_t dim() const { return dim_; }
  std::size_t units() const { return units_; }
  const FixedConstants& constants() const { return constants_; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& eta(std::size_t k, std::size_t i) { return data_[k * dim_ + i]; }
  double eta(std::size_t k, std::size_t i) const { return data_[k * dim_ + i]; }
  double& b(std::size_t k) { return data_[b_offset() + k]; }
  double b(std::size_t k) const { return data_[b_offset() + k]; }
  double& y(std::size_t k, std::size_t i) { return data_[y_offset() + k * dim_ + i]; }
  double y(std::size_t k, std::size_t i) const { return data_[y_offset() + k * dim_ + i]; }
  double& a(std::size_t k) { return data_[a_offset() + k]; }
  double a(std::size_t k) const { return data_[a_offset() + k]; }
  double& c() { return data_.back(); }
  double c() const { return data_.back(); }

  std::size_t b_offset() const { return units_ * dim_; }
  std::size_t y_offset() const { return units_ * (dim_ + 1); }
  std::size_t a_offset() const { return units_ * (2 * dim_ + 1); }

 private:
  std::size_t dim_;
  std::size_t units_;
  FixedConstants constants_;
  std::vector<double> data_;
};

/// Plain ReLU network u(x) = sum_k zeta_k ReLU(omega_k.x + m_k) + z.
/// Flat parameter order: omega (units x dim, row-major), m (units), zeta (units), z.
class PlainNetParams {
 public:
  PlainNetParams(std::size_t dim, std::size_t units);

  std::size_t dim() const { return dim_; }
  std::size_t units() const { return units_; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& omega(std::size_t k, std::size_t i) { return data_[k * dim_ + i]; }
  double omega(std::size_t k, std::size_t i) const { return data_[k * dim_ + i]; }
  double& m(std::size_t k) { return data_[m_offset() + k]; }
  double m(std::size_t k) const { return data_[m_offset() + k]; }
  double& zeta(std::size_t k) { return data_[zeta_offset() + k]; }
  double zeta(std::size_t k) const { return data_[zeta_offset() + k]; }
  double& z() { return data_.back(); }
  double z() const { return data_.back(); }

  std::size_t m_offset() const { return units_ * dim_; }
  std::size_t zeta_offset() const { return units_ * (dim_ + 1); }

 private:
  std::size_t dim_;
  std::size_t units_;
  std::vector<double> data_;
};

using Network = std::variant<ModNetParams, PlainNetParams>;

/// N (2d + 2) + 1 and M (d + 2) + 1.
std::size_t count_params(const ModNetParams& p);
std::size_t count_params(const PlainNetParams& p);
std::size_t count_params(const Network& net);
std::size_t modnet_param_count(std::size_t dim, std::size_t units);
std::size_t plainnet_param_count(std::size_t dim, std::size_t units);

struct NetOutput {
  double value = 0.0;
  std::vector<double> gradient;
};

NetOutput modnet_forward(const ModNetParams& p, std::span<const double> x);
NetOutput plainnet_forward(const PlainNetParams& p, std::span<const double> x);
NetOutput forward(const Network& net, std::span<const double> x);

/// Training samples with analytic target values and gradients; x and grad are row-major by sample.
struct Batch {
  std::size_t dim = 1;
  std::vector<double> x;
  std::vector<double> f;
  std::vector<double> grad;

  std::size_t size() const { return f.size(); }
  std::span<const double> point(std::size_t i) const { return {&x[i * dim], dim}; }
  void validate() const;
};

/// mean over the batch of (u - f)^2 + |grad u - grad f|^2; fills `gradient` with d loss / d params.
double loss_and_param_grad(const ModNetParams& p, const Batch& batch, std::vector<double>& gradient);
double loss_and_param_grad(const PlainNetParams& p, const Batch& batch, std::vector<double>& gradient);
double loss_and_param_grad(const Network& net, const Batch& batch, std::vector<double>& gradient);
double h1_loss(const Network& net, const Batch& batch);

/// Initialization: eta, omega ~ U[-3,3]^d; b, m ~ U[-3,3]; y ~ U(Omega); a, zeta ~ N(0, 1/units); c = z = 0.
void initialize(ModNetParams& p, const Box& domain, std::mt19937_64& rng);
void initialize(PlainNetParams& p, std::mt19937_64& rng);

/// Checkpoint layout (little-endian): u64 kind (0 ModNet, 1 PlainNet), u64 dim, u64 units,
/// u64 parameter count, f64 t, f64 tau, then the flat f64 parameters in the order above.
/// PlainNet checkpoints store t = 0, tau = 1.
void write_checkpoint(std::ostream& os, const Network& net);
Network read_checkpoint(std::istream& is);

}  // namespace modlab
