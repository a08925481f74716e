#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "modlab/config.hpp"
#include "modlab/dictionary.hpp"
#include "modlab/relu_stft.hpp"
#include "modlab/stft.hpp"
#include "modlab/svg.hpp"

namespace fs = std::filesystem;
using namespace modlab;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

// Shared flags; a value is applied only when the flag was given.
struct Overrides {
  std::string config;
  std::string seed_list;
  std::string out;
  std::string weight;
  std::string optimizer;
};

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int report(const std::vector<Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    fmt::print("{:<6} {}: {}\n", c.pass ? "pass" : "FAIL", c.name, c.detail);
    ok = ok && c.pass;
  }
  return ok ? kPass : kCheckFailed;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", (dir / name).string()));
  return os;
}

ExperimentConfig load(const Overrides& o, ExperimentKind expected) {
  ExperimentConfig c;
  if (o.config.empty()) {
    c.kind = expected;
    c.rate.ns = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  } else {
    c = load_config(o.config);
  }
  if (c.kind != expected) {
    throw ConfigError("experiment.kind", fmt::format("this command runs '{}' configs, got '{}'", to_string(expected),
                                                     to_string(c.kind)));
  }
  if (!o.seed_list.empty()) c.seeds = parse_seed_list(o.seed_list);
  if (!o.out.empty()) c.out = o.out;
  if (!o.weight.empty()) c.rate.plan.weight = parse_weight_kind(o.weight);
  if (!o.optimizer.empty()) c.train.optimizer.kind = parse_optimizer_kind(o.optimizer);
  c.rate.seeds = c.seeds;
  c.rate.plan.domain = c.domain;
  c.train.domain = c.domain;
  c.validate();
  return c;
}

void echo_config(const ExperimentConfig& c, const std::string& command) {
  if (c.out.empty()) return;
  auto os = open_out(c.out, "config.ini");
  os << "# modlab " << command << "\n";
  os << "# non-source defaults: optimizer.lr = 1e-3, optimizer.weight_decay = 1e-2, full-batch updates\n";
  write_config(os, c);
}

// Closed form with term1 scaled by (1 + eps): a stand-in for a perturbed erfc.
ReluStftEvaluator evaluator(double erfc_fault) {
  if (erfc_fault == 0.0) return relu_stft;
  return [erfc_fault](double x, double w) {
    ReluStftValue v = relu_stft(x, w);
    v.term1 *= 1.0 + erfc_fault;
    v.value = v.term1 + v.term2;
    return v;
  };
}

int cmd_verify_appendix(const Overrides& o, bool strict, double erfc_fault) {
  const ReluStftEvaluator eval = evaluator(erfc_fault);
  std::vector<Check> checks;

  const Axis grid41 = Axis::span(-3.0, 3.0, 41);
  double worst = 0.0;
  double wx = 0.0, ww = 0.0;
  std::optional<std::pair<double, double>> first_bad;
  std::ostringstream csv;
  csv << "x,omega,closed_re,closed_im,quadrature_re,quadrature_im,abs_error\n";
  for (std::size_t i = 0; i < grid41.length; ++i) {
    for (std::size_t j = 0; j < grid41.length; ++j) {
      const double x = grid41.at(i), w = grid41.at(j);
      const cplx closed = eval(x, w).value;
      const cplx quad = relu_stft_quadrature(x, w);
      const double err = std::abs(closed - quad);
      if (err > worst) {
        worst = err;
        wx = x;
        ww = w;
      }
      if (err >= 1e-8 && !first_bad) first_bad = {x, w};
      csv << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", x, w, closed.real(), closed.imag(),
                         quad.real(), quad.imag(), err);
    }
  }
  std::string detail = fmt::format("max deviation {:.3g} at ({:g}, {:g}) on 41x41 over [-3,3]^2", worst, wx, ww);
  if (first_bad) detail += fmt::format("; first failing point ({:g}, {:g})", first_bad->first, first_bad->second);
  checks.push_back({"closed form vs quadrature < 1e-8", !first_bad, detail});

  const cplx origin = eval(0.0, 0.0).value;
  const double origin_err = std::abs(origin - 1.0 / (2.0 * std::numbers::pi));
  checks.push_back({"origin value 1/(2 pi)", origin_err < 1e-12,
                    fmt::format("relu_stft(0,0) = {:.6f} (error {:.2g})", origin.real(), origin_err)});

  const ConditionA cond = check_condition_a(0.0, 1.0);
  checks.push_back({"condition (A) at (t, tau) = (0, 1)", cond.holds, fmt::format("|V| = {:.6g}", cond.magnitude)});

  const Axis grid101 = Axis::span(-4.0, 4.0, 101);
  const BoundsReport bounds = verify_bounds(grid101, grid101, 1e-12, eval);
  checks.push_back({"non-vanishing on 101x101 over [-4,4]^2", bounds.min_modulus > 0.0,
                    fmt::format("min |V| = {:.3g}", bounds.min_modulus)});
  std::string lb = fmt::format("{} violations, {} equality cases", bounds.violations, bounds.equality_cases);
  if (bounds.first_violation) {
    const auto& p = *bounds.first_violation;
    lb += fmt::format("; first at ({:g}, {:g}): |V| = {:.3g} < {:.3g}", p.x, p.omega, p.modulus, p.lower_bound);
  }
  if (!strict) lb += " (informational; --strict-lower-bound gates on it)";
  checks.push_back({"lower bound e^{-pi x^2}/(2 pi)", !strict || bounds.violations == 0, lb});
  checks.push_back({"term1 decay fit", std::isfinite(bounds.decay_constant) && bounds.decay_constant > 0.0,
                    fmt::format("C = {:.4g} on [-4,4]^2", bounds.decay_constant)});

  if (!o.out.empty()) {
    auto g = open_out(o.out, "closed_form.csv");
    g << csv.str();
    auto b = open_out(o.out, "bounds.csv");
    write_bounds_csv(b, bounds);
  }
  return report(checks);
}

int cmd_stft(const Overrides& o, const std::string& target_src, double step, double extent) {
  const Target target = Target::parse(target_src);
  if (!(step > 0.0) || !(extent > 0.0)) throw ConfigError("--step", "step and extent must be positive");
  StftGridSpec spec;
  spec.space = Axis::with_spacing(-extent, extent, step);
  spec.freq = Axis::with_spacing(-extent, extent, step);
  const Axis input = Axis::with_spacing(-extent, extent, 0.05);
  const SampledField f = target.sample(std::vector<Axis>(target.dim(), input));
  const StftGrid V = stft(f, Window{}, spec);
  const SampledField back = istft(V, Window{}, f.axes());
  const double err = relative_l2_error(back, f);
  if (!o.out.empty()) {
    auto os = open_out(o.out, "stft.csv");
    write_csv(os, V);
    auto rs = open_out(o.out, "reconstruction.csv");
    write_csv(rs, back);
  }
  return report({{"round-trip relative L2 error < 1e-6", err < 1e-6,
                  fmt::format("{:.3g} for {} on {} nodes per axis", err, target.source(), spec.space.length)}});
}

int cmd_phase_identity(const Overrides& o, std::uint64_t seed, std::size_t count, double b_truncation, double t,
                       double tau) {
  const FixedConstants c(t, tau);
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  std::ostringstream csv;
  csv << "eta,x,residual\n";
  for (std::size_t k = 0; k < count; ++k) {
    const double eta = uniform(rng, -3.0, 3.0);
    const double x = uniform(rng, -3.0, 3.0);
    const double r = verify_phase_identity(std::span(&eta, 1), std::span(&x, 1), c, b_truncation);
    worst = std::max(worst, r);
    csv << fmt::format("{:.17g},{:.17g},{:.17g}\n", eta, x, r);
  }
  if (!o.out.empty()) {
    auto os = open_out(o.out, "phase_identity.csv");
    os << csv.str();
  }
  return report({{"phase identity residual < 1e-6", worst < 1e-6,
                  fmt::format("max {:.3g} over {} draws, B = {:g}, (t, tau) = ({:g}, {:g})", worst, count, b_truncation,
                              t, tau)}});
}

std::size_t median_inversions(const RateReport& r) {
  std::size_t inv = 0;
  for (std::size_t i = 1; i < r.points.size(); ++i) inv += r.points[i].median > r.points[i - 1].median;
  return inv;
}

int cmd_rate(const Overrides& o) {
  const ExperimentConfig c = load(o, ExperimentKind::Rate);
  const Target target = Target::parse(c.target, c.domain.dim());
  const auto start = std::chrono::steady_clock::now();
  const RateExperimentResult result = rate_experiment(target, c.rate);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const RateReport& r = result.report;

  if (!c.out.empty()) {
    echo_config(c, "rate");
    auto os = open_out(c.out, "rate.csv");
    write_rate_csv(os, r);
    auto es = open_out(c.out, "rate_errors.csv");
    es << "N,seed,error\n";
    for (std::size_t i = 0; i < c.rate.ns.size(); ++i) {
      for (std::size_t k = 0; k < c.seeds.size(); ++k) {
        es << fmt::format("{},{},{:.17g}\n", c.rate.ns[i], c.seeds[k], result.errors[i][k]);
      }
    }
    // The largest-N approximant of the first seed, as used in the table above.
    const Axis& space = c.rate.plan.grid.space;
    const Axis input = Axis::with_spacing(space.origin, space.back(), c.rate.input_spacing);
    const Sampler sampler = Sampler::build(target.sample(std::vector<Axis>(target.dim(), input)), c.rate.plan);
    const std::size_t n = c.rate.ns.back();
    auto as = open_out(c.out, "approximant.csv");
    sample_approximant(sampler, n, derive_seed(c.seeds.front(), n)).write_csv(as);
  }
  fmt::print("{:>6} {:>12} {:>12} {:>12}\n", "N", "median", "q25", "q75");
  for (const auto& p : r.points) fmt::print("{:>6} {:>12.5g} {:>12.5g} {:>12.5g}\n", p.n, p.median, p.q25, p.q75);
  fmt::print("slope {:.4f}, fit residual {:.3f}, mass {:.4g}, {} weight, {} seeds, {:.1f} s\n", r.slope, r.residual,
             result.mass, to_string(c.rate.plan.weight), c.seeds.size(), secs);
  const std::size_t inv = median_inversions(r);
  return report({{"fitted slope in [-0.65, -0.35]", r.slope >= -0.65 && r.slope <= -0.35, fmt::format("{:.4f}", r.slope)},
                 {"median error nonincreasing (<= 1 inversion)", inv <= 1, fmt::format("{} inversions", inv)}});
}

struct Job {
  ModelKind model;
  std::size_t units;
  std::uint64_t seed;
};

std::string label(ModelKind m, std::size_t units) {
  return fmt::format("{}_{}", m == ModelKind::ModNet ? "modnet" : "plainnet", units);
}

LossBand band_of(const std::string& name, const std::vector<const RunRecord*>& runs) {
  LossBand b;
  b.label = name;
  std::size_t len = runs.front()->losses.size();
  for (const auto* r : runs) len = std::min(len, r->losses.size());
  std::vector<double> col(runs.size());
  for (std::size_t e = 0; e < len; ++e) {
    for (std::size_t k = 0; k < runs.size(); ++k) col[k] = runs[k]->losses[e];
    b.median.push_back(quantile(col, 0.5));
    b.q25.push_back(quantile(col, 0.25));
    b.q75.push_back(quantile(col, 0.75));
  }
  return b;
}

int cmd_train_compare(const Overrides& o, std::size_t jobs_limit) {
  const ExperimentConfig c = load(o, ExperimentKind::TrainCompare);
  const Target target = Target::parse(c.target, c.domain.dim());

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < c.modnet_units.size(); ++p) {
    for (std::uint64_t s : c.seeds) jobs.push_back({ModelKind::ModNet, c.modnet_units[p], s});
    for (std::uint64_t s : c.seeds) jobs.push_back({ModelKind::PlainNet, c.plainnet_units[p], s});
  }
  std::vector<RunRecord> runs(jobs.size());
  const std::size_t workers =
      std::max<std::size_t>(1, jobs_limit ? jobs_limit : std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      TrainConfig tc = c.train;
      tc.model = jobs[i].model;
      tc.units = jobs[i].units;
      runs[i] = train(target, tc, jobs[i].seed);
    }
  };
  std::vector<std::future<void>> pool;
  for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();

  std::vector<LossBand> bands;
  std::vector<Check> checks;
  std::ostringstream table;
  table << "architecture,units,params,median_final_loss\n";
  fmt::print("{:<10} {:>6} {:>7} {:>18}\n", "arch", "units", "params", "median final H1");
  bool aborted = false;
  for (std::size_t p = 0; p < c.modnet_units.size(); ++p) {
    double finals[2];
    for (int m = 0; m < 2; ++m) {
      const ModelKind kind = m == 0 ? ModelKind::ModNet : ModelKind::PlainNet;
      const std::size_t units = m == 0 ? c.modnet_units[p] : c.plainnet_units[p];
      std::vector<const RunRecord*> rs;
      std::vector<double> fl;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].model == kind && jobs[i].units == units) {
          rs.push_back(&runs[i]);
          fl.push_back(runs[i].final_loss());
          if (runs[i].aborted_at) {
            aborted = true;
            fmt::print("run {} seed {} aborted at epoch {}\n", label(kind, units), jobs[i].seed, *runs[i].aborted_at);
          }
        }
      }
      const std::size_t params = kind == ModelKind::ModNet ? modnet_param_count(c.domain.dim(), units)
                                                           : plainnet_param_count(c.domain.dim(), units);
      finals[m] = quantile(fl, 0.5);
      const char* arch = m == 0 ? "modnet" : "plainnet";
      table << fmt::format("{},{},{},{:.17g}\n", arch, units, params, finals[m]);
      fmt::print("{:<10} {:>6} {:>7} {:>18.6g}\n", arch, units, params, finals[m]);
      bands.push_back(band_of(label(kind, units), rs));
    }
    checks.push_back({fmt::format("ModNet {} below PlainNet {}", c.modnet_units[p], c.plainnet_units[p]),
                      finals[0] < finals[1], fmt::format("{:.4g} vs {:.4g}", finals[0], finals[1])});
  }
  checks.push_back({"all runs finite", !aborted, aborted ? "non-finite loss encountered" : "no aborted runs"});

  if (!c.out.empty()) {
    echo_config(c, "train-compare");
    const fs::path runs_dir = fs::path(c.out) / "runs";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto os = open_out(runs_dir, fmt::format("{}_seed{}.csv", label(jobs[i].model, jobs[i].units), jobs[i].seed));
      write_run_csv(os, runs[i]);
    }
    {
      auto os = open_out(c.out, "compare.csv");
      write_band_csv(os, bands);
    }
    auto fs_table = open_out(c.out, "final.csv");
    fs_table << table.str();
    std::ifstream back(fs::path(c.out) / "compare.csv");
    const auto parsed = read_band_csv(back);
    auto svg = open_out(c.out, "loss.svg");
    write_loss_svg(svg, parsed,
                   fmt::format("H1 training loss, d = {}, median and IQR over {} seeds", c.domain.dim(), c.seeds.size()));
  }
  double wall = 0.0;
  for (const auto& r : runs) wall += r.wall_seconds;
  fmt::print("{} runs, {:.1f} s of training\n", runs.size(), wall);
  return report(checks);
}

int cmd_params(std::size_t dim, std::optional<std::size_t> modnet, std::optional<std::size_t> plainnet) {
  if (dim != 1 && dim != 2) throw ConfigError("--dim", "must be 1 or 2");
  std::vector<Check> checks;
  if (modnet) fmt::print("modnet   d={} units={}: {} params\n", dim, *modnet, modnet_param_count(dim, *modnet));
  if (plainnet) fmt::print("plainnet d={} units={}: {} params\n", dim, *plainnet, plainnet_param_count(dim, *plainnet));
  if (modnet && plainnet) {
    const std::size_t a = modnet_param_count(dim, *modnet), b = plainnet_param_count(dim, *plainnet);
    checks.push_back({"equal parameter budgets", a == b, fmt::format("{} vs {}", a, b)});
  }
  return report(checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulation-dictionary laboratory"};
  app.require_subcommand(1);
  Overrides o;

  auto* verify = app.add_subcommand("verify-appendix", "closed-form ReLU STFT against quadrature and its bounds");
  bool strict = false;
  double erfc_fault = 0.0;
  verify->add_flag("--strict-lower-bound", strict, "fail on lower-bound violations");
  verify->add_option("--inject-erfc-fault", erfc_fault, "test hook: scale the erfc term by (1 + eps)")->group("");
  verify->add_option("--out", o.out, "output directory");

  auto* stft_cmd = app.add_subcommand("stft", "STFT of a target and its round-trip error");
  std::string target = "target1d";
  double step = 0.1, extent = 6.0;
  stft_cmd->add_option("--target", target, "builtin id or expression");
  stft_cmd->add_option("--step", step, "time-frequency grid spacing");
  stft_cmd->add_option("--extent", extent, "grid covers [-extent, extent] per axis");
  stft_cmd->add_option("--out", o.out, "output directory");

  auto* phase = app.add_subcommand("phase-identity", "residual of the exponential expansion over the dictionary");
  std::uint64_t seed = 1;
  std::size_t count = 100;
  double b_truncation = 40.0, t = 0.0, tau = 1.0;
  phase->add_option("--seed", seed);
  phase->add_option("--count", count);
  phase->add_option("--b-truncation", b_truncation);
  phase->add_option("--t", t);
  phase->add_option("--tau", tau);
  phase->add_option("--out", o.out, "output directory");

  auto* rate = app.add_subcommand("rate", "Maurey sampling rate experiment");
  rate->add_option("--config", o.config, "experiment config")->check(CLI::ExistingFile);
  rate->add_option("--seed-list", o.seed_list, "comma separated seeds");
  rate->add_option("--out", o.out, "output directory");
  rate->add_option("--weight", o.weight, "local or global")->check(CLI::IsMember({"local", "global"}));

  auto* compare = app.add_subcommand("train-compare", "train ModNet and PlainNet at equal parameter counts");
  std::size_t jobs = 0;
  compare->add_option("--config", o.config, "experiment config")->check(CLI::ExistingFile);
  compare->add_option("--seed-list", o.seed_list, "comma separated seeds");
  compare->add_option("--out", o.out, "output directory");
  compare->add_option("--optimizer", o.optimizer, "adam or adamw")->check(CLI::IsMember({"adam", "adamw"}));
  compare->add_option("--jobs", jobs, "parallel runs (0: hardware threads)");

  auto* params = app.add_subcommand("params", "parameter counts");
  std::size_t dim = 1;
  std::optional<std::size_t> modnet, plainnet;
  params->add_option("--dim", dim);
  params->add_option("--modnet-units", modnet);
  params->add_option("--plainnet-units", plainnet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*verify) return cmd_verify_appendix(o, strict, erfc_fault);
    if (*stft_cmd) return cmd_stft(o, target, step, extent);
    if (*phase) return cmd_phase_identity(o, seed, count, b_truncation, t, tau);
    if (*rate) return cmd_rate(o);
    if (*compare) return cmd_train_compare(o, jobs);
    if (*params) return cmd_params(dim, modnet, plainnet);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const ExpressionError& e) {
    fmt::print(stderr, "config error: target: {}\n", e.what());
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kCheckFailed;
  }
  return kConfigError;
}
