#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "modlab/maurey.hpp"
#include "modlab/training.hpp"

namespace modlab {

/// Invalid configuration; `field()` is the dotted path (section.key) at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind { Rate, TrainCompare };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Rate;
  /// Builtin name or an expression over the target grammar.
  std::string target = "target1d";
  Box domain = Box::cube(1, -3.0, 3.0);
  std::vector<std::uint64_t> seeds{1};
  std::string out;

  RateExperimentConfig rate;

  /// Everything but the model kind and width.
  TrainConfig train;
  /// Paired widths; entry i of both lists is one comparison.
  std::vector<std::size_t> modnet_units{51};
  std::vector<std::size_t> plainnet_units{68};

  /// Checks every field and the downstream module preconditions.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& is, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(write_config(c)) reproduces c.
void write_config(std::ostream& os, const ExperimentConfig& config);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

const char* to_string(ExperimentKind kind);
const char* to_string(WeightKind kind);
const char* to_string(OptimizerKind kind);
WeightKind parse_weight_kind(const std::string& text);
OptimizerKind parse_optimizer_kind(const std::string& text);

}  // namespace modlab
