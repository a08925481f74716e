#include "modlab/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace modlab {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

const char* to_string(ExperimentKind kind) { return kind == ExperimentKind::Rate ? "rate" : "train-compare"; }
const char* to_string(WeightKind kind) { return kind == WeightKind::Local ? "local" : "global"; }
const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "adamw"; }

WeightKind parse_weight_kind(const std::string& text) {
  if (text == "local") return WeightKind::Local;
  if (text == "global") return WeightKind::Global;
  throw ConfigError("rate.weight", fmt::format("expected local or global, got '{}'", text));
}

OptimizerKind parse_optimizer_kind(const std::string& text) {
  if (text == "adam") return OptimizerKind::Adam;
  if (text == "adamw") return OptimizerKind::AdamW;
  throw ConfigError("optimizer.kind", fmt::format("expected adam or adamw, got '{}'", text));
}

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& text, const std::string& field) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ConfigError(field, fmt::format("'{}' is not a valid number", text));
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(trim(item), field));
  if (out.empty()) throw ConfigError(field, "list is empty");
  return out;
}

// Typed access to the parsed tree; remembers what was consumed so that typos surface as errors.
class Reader {
 public:
  explicit Reader(const pt::ptree& root) : root_(root) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto sec = root_.find(section);
    if (sec == root_.not_found()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.not_found()) return std::nullopt;
    return trim(it->second.data());
  }

  template <class T>
  void number(const std::string& section, const std::string& key, T& out) {
    if (auto v = raw(section, key)) out = parse_number<T>(*v, section + "." + key);
  }

  template <class T>
  void list(const std::string& section, const std::string& key, std::vector<T>& out) {
    if (auto v = raw(section, key)) out = parse_list<T>(*v, section + "." + key);
  }

  void text(const std::string& section, const std::string& key, std::string& out) {
    if (auto v = raw(section, key)) out = *v;
  }

  void boolean(const std::string& section, const std::string& key, bool& out) {
    const auto v = raw(section, key);
    if (!v) return;
    if (*v == "true" || *v == "1" || *v == "yes") {
      out = true;
    } else if (*v == "false" || *v == "0" || *v == "no") {
      out = false;
    } else {
      throw ConfigError(section + "." + key, fmt::format("expected true or false, got '{}'", *v));
    }
  }

  void reject_unknown() const {
    for (const auto& [section, body] : root_) {
      if (body.empty() && !body.data().empty()) {
        throw ConfigError(section, "keys must live inside a [section]");
      }
      for (const auto& [key, value] : body) {
        const std::string path = section + "." + key;
        if (!used_.count(path)) throw ConfigError(path, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& root_;
  std::set<std::string> used_;
};

// Runs a module-level check and attaches the config path to its message.
template <class F>
void check(const std::string& field, F&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

std::string join(const auto& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += fmt::format("{}", v);
  }
  return out;
}

std::string real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void ExperimentConfig::validate() const {
  check("domain", [&] { domain.validate(); });
  if (domain.dim() != 1 && domain.dim() != 2) throw ConfigError("domain.dim", "must be 1 or 2");
  check("experiment.target", [&] { Target::parse(target, domain.dim()); });
  if (seeds.empty()) throw ConfigError("experiment.seeds", "needs at least one seed");

  if (kind == ExperimentKind::Rate) {
    check("stft", [&] {
      rate.plan.grid.space.validate();
      rate.plan.grid.freq.validate();
    });
    if (!(rate.input_spacing > 0.0)) throw ConfigError("stft.input_spacing", "must be positive");
    check("rate.ns", [&] {
      RateExperimentConfig probe;
      probe.ns = rate.ns;
      probe.seeds = {1};
      probe.validate();
    });
    if (rate.eval_nodes < 2) throw ConfigError("rate.eval_nodes", "must be at least 2");
    check("rate.r", [&] { rate.sobolev.validate(); });
    if (rate.sobolev.n > 1) throw ConfigError("rate.n", "the rate experiment measures orders 0 and 1");
    const char* s_field = rate.plan.weight == WeightKind::Local ? "rate.local_s" : "rate.global_s";
    check(s_field, [&] { rate.plan.validate(); });
    return;
  }

  check("train", [&] { train.validate(); });
  check("train.tau", [&] { FixedConstants(train.t, train.tau); });
  if (modnet_units.size() != plainnet_units.size()) {
    throw ConfigError("compare.plainnet_units",
                      fmt::format("{} ModNet widths but {} PlainNet widths", modnet_units.size(), plainnet_units.size()));
  }
  for (std::size_t i = 0; i < modnet_units.size(); ++i) {
    if (modnet_units[i] == 0 || plainnet_units[i] == 0) throw ConfigError("compare", "widths must be positive");
    const std::size_t a = modnet_param_count(domain.dim(), modnet_units[i]);
    const std::size_t b = plainnet_param_count(domain.dim(), plainnet_units[i]);
    if (a != b) {
      throw ConfigError("compare.plainnet_units",
                        fmt::format("parameter counts differ: ModNet {} units has {} params, PlainNet {} units has {}",
                                    modnet_units[i], a, plainnet_units[i], b));
    }
  }
}

ExperimentConfig parse_config(std::istream& is, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", fmt::format("{}: line {}: {}", source, e.line(), e.message()));
  }
  Reader in(tree);
  ExperimentConfig c;

  std::string kind = to_string(c.kind);
  in.text("experiment", "kind", kind);
  if (kind == "rate") {
    c.kind = ExperimentKind::Rate;
  } else if (kind == "train-compare") {
    c.kind = ExperimentKind::TrainCompare;
  } else {
    throw ConfigError("experiment.kind", fmt::format("expected rate or train-compare, got '{}'", kind));
  }
  in.text("experiment", "target", c.target);
  in.list("experiment", "seeds", c.seeds);
  in.text("experiment", "out", c.out);

  std::size_t dim = 1;
  double lo = -3.0, hi = 3.0;
  in.number("domain", "dim", dim);
  in.number("domain", "lo", lo);
  in.number("domain", "hi", hi);
  if (dim != 1 && dim != 2) throw ConfigError("domain.dim", "must be 1 or 2");
  c.domain = Box::cube(dim, lo, hi);

  RateExperimentConfig& r = c.rate;
  r.ns = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  double space_lo = -6.0, space_hi = 6.0, space_step = 0.1;
  double freq_lo = -6.0, freq_hi = 6.0, freq_step = 0.1;
  in.number("stft", "space_lo", space_lo);
  in.number("stft", "space_hi", space_hi);
  in.number("stft", "space_step", space_step);
  in.number("stft", "freq_lo", freq_lo);
  in.number("stft", "freq_hi", freq_hi);
  in.number("stft", "freq_step", freq_step);
  in.number("stft", "input_spacing", r.input_spacing);
  in.number("stft", "tail_threshold", r.plan.stft_options.tail_threshold);
  if (!(space_step > 0.0) || !(space_lo < space_hi)) throw ConfigError("stft.space_step", "space axis is empty");
  if (!(freq_step > 0.0) || !(freq_lo < freq_hi)) throw ConfigError("stft.freq_step", "frequency axis is empty");
  r.plan.grid.space = Axis::with_spacing(space_lo, space_hi, space_step);
  r.plan.grid.freq = Axis::with_spacing(freq_lo, freq_hi, freq_step);

  in.list("rate", "ns", r.ns);
  std::string weight = to_string(r.plan.weight);
  in.text("rate", "weight", weight);
  r.plan.weight = parse_weight_kind(weight);
  in.number("rate", "n", r.sobolev.n);
  in.number("rate", "r", r.sobolev.r);
  r.plan.n = r.sobolev.n;
  in.number("rate", "local_s", r.plan.local_s);
  in.number("rate", "global_s", r.plan.global_s);
  in.number("rate", "b_truncation", r.plan.b_truncation);
  in.number("rate", "b_table_size", r.plan.b_table_size);
  in.number("rate", "eval_nodes", r.eval_nodes);
  r.plan.domain = c.domain;

  TrainConfig& t = c.train;
  t.domain = c.domain;
  in.number("train", "samples", t.samples);
  in.number("train", "grid_nodes", t.grid_nodes);
  in.number("train", "epochs", t.epochs);
  in.number("train", "t", t.t);
  in.number("train", "tau", t.tau);
  in.list("compare", "modnet_units", c.modnet_units);
  in.list("compare", "plainnet_units", c.plainnet_units);

  std::string opt = to_string(t.optimizer.kind);
  in.text("optimizer", "kind", opt);
  t.optimizer.kind = parse_optimizer_kind(opt);
  in.number("optimizer", "lr", t.optimizer.lr);
  in.number("optimizer", "beta1", t.optimizer.beta1);
  in.number("optimizer", "beta2", t.optimizer.beta2);
  in.number("optimizer", "eps", t.optimizer.eps);
  in.number("optimizer", "weight_decay", t.optimizer.weight_decay);

  in.boolean("scheduler", "enabled", t.use_scheduler);
  in.number("scheduler", "factor", t.scheduler.factor);
  in.number("scheduler", "patience", t.scheduler.patience);
  in.number("scheduler", "cooldown", t.scheduler.cooldown);
  in.number("scheduler", "min_lr", t.scheduler.min_lr);

  in.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", fmt::format("cannot open config file '{}'", path));
  return parse_config(is, path);
}

void write_config(std::ostream& os, const ExperimentConfig& c) {
  os << "[experiment]\n";
  os << "kind = " << to_string(c.kind) << '\n';
  os << "target = " << c.target << '\n';
  os << "seeds = " << join(c.seeds) << '\n';
  if (!c.out.empty()) os << "out = " << c.out << '\n';
  os << "\n[domain]\n";
  os << "dim = " << c.domain.dim() << '\n';
  os << "lo = " << real(c.domain.lo[0]) << '\n';
  os << "hi = " << real(c.domain.hi[0]) << '\n';

  if (c.kind == ExperimentKind::Rate) {
    const auto& r = c.rate;
    os << "\n[stft]\n";
    os << "space_lo = " << real(r.plan.grid.space.origin) << '\n';
    os << "space_hi = " << real(r.plan.grid.space.back()) << '\n';
    os << "space_step = " << real(r.plan.grid.space.spacing) << '\n';
    os << "freq_lo = " << real(r.plan.grid.freq.origin) << '\n';
    os << "freq_hi = " << real(r.plan.grid.freq.back()) << '\n';
    os << "freq_step = " << real(r.plan.grid.freq.spacing) << '\n';
    os << "input_spacing = " << real(r.input_spacing) << '\n';
    os << "tail_threshold = " << real(r.plan.stft_options.tail_threshold) << '\n';
    os << "\n[rate]\n";
    os << "ns = " << join(r.ns) << '\n';
    os << "weight = " << to_string(r.plan.weight) << '\n';
    os << "n = " << r.sobolev.n << '\n';
    os << "r = " << real(r.sobolev.r) << '\n';
    os << "local_s = " << real(r.plan.local_s) << '\n';
    os << "global_s = " << real(r.plan.global_s) << '\n';
    os << "b_truncation = " << real(r.plan.b_truncation) << '\n';
    os << "b_table_size = " << r.plan.b_table_size << '\n';
    os << "eval_nodes = " << r.eval_nodes << '\n';
    return;
  }

  const auto& t = c.train;
  os << "\n[train]\n";
  os << "samples = " << t.samples << '\n';
  os << "grid_nodes = " << t.grid_nodes << '\n';
  os << "epochs = " << t.epochs << '\n';
  os << "t = " << real(t.t) << '\n';
  os << "tau = " << real(t.tau) << '\n';
  os << "\n[compare]\n";
  os << "modnet_units = " << join(c.modnet_units) << '\n';
  os << "plainnet_units = " << join(c.plainnet_units) << '\n';
  os << "\n[optimizer]\n";
  os << "kind = " << to_string(t.optimizer.kind) << '\n';
  os << "lr = " << real(t.optimizer.lr) << '\n';
  os << "beta1 = " << real(t.optimizer.beta1) << '\n';
  os << "beta2 = " << real(t.optimizer.beta2) << '\n';
  os << "eps = " << real(t.optimizer.eps) << '\n';
  os << "weight_decay = " << real(t.optimizer.weight_decay) << '\n';
  os << "\n[scheduler]\n";
  os << "enabled = " << (t.use_scheduler ? "true" : "false") << '\n';
  os << "factor = " << real(t.scheduler.factor) << '\n';
  os << "patience = " << t.scheduler.patience << '\n';
  os << "cooldown = " << t.scheduler.cooldown << '\n';
  os << "min_lr = " << real(t.scheduler.min_lr) << '\n';
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  return parse_list<std::uint64_t>(text, "--seed-list");
}

}  // namespace modlab
