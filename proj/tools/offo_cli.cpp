// offo: command-line front end for the solvers, the benchmark harness and the bound checks.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "offo/offo.hpp"

namespace fs = std::filesystem;
using namespace offo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitUnknownConstants = 3;
constexpr int kExitUsage = 64;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0   success (converged run, completed plan, no bound violated)\n"
    "  1   error, failed run, violated bound, or empty record directory\n"
    "  2   solve stopped at the iteration limit\n"
    "  3   theory check needs a Lipschitz constant or lower bound the problem lacks\n"
    "  64  invalid arguments\n";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unsectioned keys of a key=value config file belong to the selected subcommand.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == "default")) {
        item.parents = {subs.front()->get_name()};
      }
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

// Settings shared by solve and theory.
struct RunOptions {
  std::string problem;
  std::optional<std::size_t> dim;
  std::string algo = "astr1b0";
  std::string weights = "adagrad";
  double noise = 0.0;
  std::uint64_t seed = 0;
  double eps = 1e-3;
  std::size_t max_iter = 100000;
  double sigma = 0.01;
  double theta = 1.0;
  double tau = 1.0;
  double nu = 0.1;
  double mu = 0.1;
  std::optional<std::size_t> memory;
  std::string out;

  void add_to(CLI::App* app) {
    app->add_option("--problem", problem, "registry problem name")->required();
    app->add_option("--dim", dim, "problem dimension (default: the suite size)");
    app->add_option("--algo", algo, "preset")
        ->capture_default_str()
        ->check(CLI::IsMember(preset_names()));
    app->add_option("--weights", weights, "weight scheme")
        ->capture_default_str()
        ->check(CLI::IsMember({"adagrad", "maxchi"}));
    app->add_option("--noise", noise, "relative gradient (and value) noise level")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--seed", seed, "noise seed")->capture_default_str();
    app->add_option("--eps", eps, "criticality tolerance")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--max-iter", max_iter, "iteration limit")->capture_default_str();
    app->add_option("--sigma", sigma, "weight floor constant")->capture_default_str();
    app->add_option("--theta", theta, "weight interval constant")->capture_default_str();
    app->add_option("--tau", tau, "model decrease fraction")->capture_default_str();
    app->add_option("--nu", nu, "diminishing weight exponent")->capture_default_str();
    app->add_option("--mu", mu, "diminishing rate exponent")->capture_default_str();
    app->add_option("--memory", memory, "secant pairs (default: from the preset)");
  }

  SolverConfig config() const {
    SolverConfig c = preset(algo);
    c.weights.scheme = weight_scheme_from_string(weights);
    c.weights.sigma = sigma;
    c.weights.theta = theta;
    c.weights.nu = nu;
    c.weights.mu = mu;
    c.tau = tau;
    c.epsilon = eps;
    c.max_iter = max_iter;
    if (memory) c.memory = *memory;
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }

  Problem build_problem() const {
    try {
      return registry_get(problem, dim.value_or(default_dim(problem)));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  NoiseSpec noise_spec() const { return NoiseSpec{noise, seed, 0}; }
};

void dump_config(std::ostream& os, const Problem& p, const SolverConfig& c, const NoiseSpec& n) {
  os << "problem=" << p.name << "\n"
     << "dim=" << p.dim << "\n"
     << "algo=" << c.name << "\n"
     << "weights=" << to_string(c.weights.scheme) << "\n"
     << "memory=" << c.memory << "\n"
     << "noise=" << n.level << "\n"
     << "seed=" << n.seed << "\n"
     << "eps=" << c.epsilon << "\n"
     << "max-iter=" << c.max_iter << "\n"
     << "sigma=" << c.weights.sigma << "\n"
     << "theta=" << c.weights.theta << "\n"
     << "tau=" << c.tau << "\n"
     << "nu=" << c.weights.nu << "\n"
     << "mu=" << c.weights.mu << "\n";
}

int cmd_solve(const RunOptions& o, bool dump, bool timing) {
  const Problem p = o.build_problem();
  const SolverConfig c = o.config();
  const NoiseSpec n = o.noise_spec();
  if (dump) {
    dump_config(std::cout, p, c, n);
    return kExitOk;
  }
  const RunRecord r = solve(p, c, n);
  if (!o.out.empty()) save_run_record(o.out, r, {true, timing});
  std::cout << "problem=" << r.problem << " dim=" << r.dim << " algo=" << c.name
            << " status=" << to_string(r.termination) << " iterations=" << r.iterations
            << " criticality=" << r.final_criticality << " f_evals=" << r.evals.f << " g_evals=" << r.evals.g
            << "\n";
  if (!r.message.empty()) std::cerr << r.message << "\n";
  switch (r.termination) {
    case Termination::converged: return kExitOk;
    case Termination::max_iter: return kExitMaxIter;
    case Termination::oracle_failure: return kExitError;
  }
  return kExitError;
}

int emit_theory(const TheoryReport& rep, const std::string& out) {
  const std::string text = to_json(rep).dump(2);
  if (out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + out + "' for writing");
    os << text << "\n";
  }
  std::cerr << rep.rate.name << ": checked=" << rep.rate.checked << " violations=" << rep.rate.violations << "\n";
  return rep.passed() ? kExitOk : kExitError;
}

int cmd_theory(const RunOptions& o, const std::string& record_path, double eta) {
  RunRecord r;
  Problem p;
  if (!record_path.empty()) {
    r = load_run_record(record_path);
    p = registry_get(r.problem, r.dim);
  } else {
    if (o.problem.empty()) throw UsageError("theory: give --record or --problem");
    p = o.build_problem();
    SolverConfig c = o.config();
    if (c.algorithm != Algorithm::astr1b) throw UsageError("theory: bounds apply to astr1b presets only");
    if (!p.known_lipschitz || !p.known_flow) {
      throw UnknownConstants("problem '" + p.name + "' lacks a known Lipschitz constant or lower bound");
    }
    r = solve(p, c, o.noise_spec());
  }
  TheoryParams params = theory_params(p, r);
  TheoryReport rep = theory_report(p, r);
  if (eta > 0.0 && rep.diminishing) {
    params.eta = eta;
    rep.params = params;
    rep.diminishing = diminishing_constants(params);
    rep.rate = check_diminishing_rate(r, params);
  }
  return emit_theory(rep, o.out);
}

struct BenchOptions {
  std::vector<std::string> problems;
  std::vector<std::size_t> dims;
  std::vector<std::string> algos;
  std::vector<double> noise;
  std::size_t seeds = 10;
  std::uint64_t seed = 0;
  double eps = 1e-3;
  std::size_t max_iter = 100000;
  double skip_trinf_above = 0.05;
  bool run_all = false;
  std::size_t workers = 1;
  std::string out = "bench";
  std::string format = "both";
  std::string runs_dir;
};

ExperimentPlan make_plan(const BenchOptions& b) {
  ExperimentPlan plan;
  if (!b.problems.empty()) {
    if (!b.dims.empty() && b.dims.size() != b.problems.size()) {
      throw UsageError("bench: give one --dim per --problem, or none");
    }
    plan.suite.clear();
    for (std::size_t i = 0; i < b.problems.size(); ++i) {
      try {
        const std::size_t d = b.dims.empty() ? default_dim(b.problems[i]) : b.dims[i];
        (void)registry_get(b.problems[i], d);
        plan.suite.push_back({b.problems[i], d});
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (!b.algos.empty()) plan.algorithms = b.algos;
  if (!b.noise.empty()) plan.noise_levels = b.noise;
  plan.seeds = b.seeds;
  plan.base_seed = b.seed;
  plan.epsilon = b.eps;
  plan.max_iter = b.max_iter;
  plan.skip_trinf_above = b.run_all ? std::nullopt : std::optional<double>(b.skip_trinf_above);
  plan.workers = b.workers;
  plan.log_iterations = !b.runs_dir.empty();
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return plan;
}

std::string run_file_name(const RunRecord& r) {
  char noise[32];
  std::snprintf(noise, sizeof noise, "%g", r.noise.level);
  return r.config.name + "__" + r.problem + "-" + std::to_string(r.dim) + "__s" + noise + "__r" +
         std::to_string(r.noise.stream_id) + ".jsonl";
}

int cmd_bench(const BenchOptions& b) {
  const ExperimentPlan plan = make_plan(b);
  const auto records = run_plan(plan);
  if (!b.runs_dir.empty()) {
    fs::create_directories(b.runs_dir);
    for (const auto& r : records) save_run_record((fs::path(b.runs_dir) / run_file_name(r)).string(), r);
  }
  const auto runs = summarize(records);
  const ProfileReport rep = reliability_table(runs, plan.algorithms);
  if (b.format == "json" || b.format == "both") export_report(rep, runs, b.out + ".json", ReportFormat::json, &plan);
  if (b.format == "csv" || b.format == "both") export_report(rep, runs, b.out + ".csv", ReportFormat::csv);
  std::cout << report_csv(rep);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.message.rfind("run failed", 0) == 0 ? 1 : 0;
  if (failed) std::cerr << failed << " run(s) failed; see the JSON report\n";
  return kExitOk;
}

int cmd_profile(const std::string& dir, const std::vector<std::string>& algos_in, const std::string& out) {
  std::vector<fs::path> files;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
  }
  if (files.empty()) {
    std::cerr << "profile: no run records (*.jsonl) in '" << dir << "'\n";
    return kExitError;
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> records;
  for (const auto& f : files) records.push_back(load_run_record(f.string()));
  const auto runs = summarize(records);
  std::vector<std::string> algos = algos_in;
  if (algos.empty()) {
    for (const auto& r : runs) {
      if (std::find(algos.begin(), algos.end(), r.algorithm) == algos.end()) algos.push_back(r.algorithm);
    }
    std::sort(algos.begin(), algos.end());
  }
  std::ostringstream csv;
  csv << "algo,kind,t,value\n";
  for (const auto& c : profile_curves(runs, algos)) {
    // rho(t) jumps at every ratio; emit the value reached at each jump.
    for (std::size_t i = 0; i < c.ratios.size(); ++i) {
      if (i + 1 < c.ratios.size() && c.ratios[i + 1] == c.ratios[i]) continue;
      csv << c.algorithm << ",point," << c.ratios[i] << ","
          << static_cast<double>(i + 1) / static_cast<double>(c.instances) << "\n";
    }
    csv << c.algorithm << ",area,," << c.area << "\n";
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + out + "' for writing");
    os << csv.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Objective-free adaptive trust-region solvers for bound-constrained problems"};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  app.set_version_flag("--version", "offo 0.1.0");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key=value file; command-line flags take precedence", false);
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));

  RunOptions solve_opt;
  bool dump = false, timing = false;
  auto* solve_cmd = app.add_subcommand("solve", "run one solver on one problem");
  solve_opt.add_to(solve_cmd);
  solve_cmd->add_option("--out", solve_opt.out, "write the run record (JSON lines) here");
  solve_cmd->add_flag("--dump-config", dump, "print the resolved settings and exit");
  solve_cmd->add_flag("--timing", timing, "include wall time in the run record");

  BenchOptions bench_opt;
  auto* bench_cmd = app.add_subcommand("bench", "run the experiment matrix and write the report");
  bench_cmd->add_option("--problem", bench_opt.problems, "restrict the suite (repeatable)");
  bench_cmd->add_option("--dim", bench_opt.dims, "dimension for each --problem");
  bench_cmd->add_option("--algo", bench_opt.algos, "presets (repeatable; default: all six)")
      ->check(CLI::IsMember(preset_names()));
  bench_cmd->add_option("--noise", bench_opt.noise, "noise levels (repeatable; default 0 0.01 0.05 0.15 0.25)")
      ->check(CLI::Range(0.0, 1.0));
  bench_cmd->add_option("--seeds", bench_opt.seeds, "runs per noisy cell")->capture_default_str();
  bench_cmd->add_option("--seed", bench_opt.seed, "base seed")->capture_default_str();
  bench_cmd->add_option("--eps", bench_opt.eps, "criticality tolerance")->capture_default_str();
  bench_cmd->add_option("--max-iter", bench_opt.max_iter, "iteration limit")->capture_default_str();
  bench_cmd->add_option("--skip-trinf-above", bench_opt.skip_trinf_above, "skip trinf cells above this noise")
      ->capture_default_str();
  bench_cmd->add_flag("--run-all", bench_opt.run_all, "do not skip any cell");
  bench_cmd->add_option("--workers", bench_opt.workers, "parallel runs")->capture_default_str();
  bench_cmd->add_option("--out", bench_opt.out, "output prefix (.json / .csv appended)")->capture_default_str();
  bench_cmd->add_option("--format", bench_opt.format, "report format")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv", "both"}));
  bench_cmd->add_option("--runs-dir", bench_opt.runs_dir, "also write every run record into this directory");

  RunOptions theory_opt;
  std::string record_path;
  double eta = 0.0;
  auto* theory_cmd = app.add_subcommand("theory", "check the proved rate bounds on a record or a fresh run");
  theory_opt.add_to(theory_cmd);
  theory_cmd->get_option("--problem")->required(false);
  theory_cmd->add_option("--record", record_path, "run record to check instead of running");
  theory_cmd->add_option("--eta", eta, "diminishing-scheme constant (default tau*theta*sigma/2)");
  theory_cmd->add_option("--out", theory_opt.out, "write the JSON report here (default stdout)");

  std::string profile_dir, profile_out;
  std::vector<std::string> profile_algos;
  auto* profile_cmd = app.add_subcommand("profile", "performance profile of a directory of run records");
  profile_cmd->add_option("--dir", profile_dir, "directory of *.jsonl run records")->required();
  profile_cmd->add_option("--algo", profile_algos, "algorithms to include (default: all found)");
  profile_cmd->add_option("--out", profile_out, "CSV output (default stdout)");

  for (auto* sub : {solve_cmd, bench_cmd, theory_cmd, profile_cmd}) {
    sub->fallthrough();
    sub->allow_config_extras(CLI::config_extras_mode::error);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_opt, dump, timing);
    if (bench_cmd->parsed()) return cmd_bench(bench_opt);
    if (theory_cmd->parsed()) return cmd_theory(theory_opt, record_path, eta);
    if (profile_cmd->parsed()) return cmd_profile(profile_dir, profile_algos, profile_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << "Run with --help for more information.\n";
    return kExitUsage;
  } catch (const UnknownConstants& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUnknownConstants;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
