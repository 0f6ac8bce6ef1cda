#pragma once

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "offo/record_io.hpp"
#include "offo/registry.hpp"

namespace offo {

struct ExperimentPlan {
  std::vector<SuiteEntry> suite = desk_suite();
  std::vector<std::string> algorithms = preset_names();
  std::vector<double> noise_levels{0.0, 0.01, 0.05, 0.15, 0.25};
  std::size_t seeds = 10;
  std::uint64_t base_seed = 0;
  double epsilon = 1e-3;
  std::size_t max_iter = 100000;
  std::optional<double> skip_trinf_above = 0.05;  // trinf cells with noise above this are not run
  std::size_t workers = 1;
  bool log_iterations = false;

  void validate() const {
    if (suite.empty()) throw std::invalid_argument("plan: empty suite");
    if (algorithms.empty()) throw std::invalid_argument("plan: no algorithms");
    if (noise_levels.empty()) throw std::invalid_argument("plan: no noise levels");
    if (seeds == 0) throw std::invalid_argument("plan: seeds must be positive");
    for (const auto& a : algorithms) (void)preset(a);
    for (double s : noise_levels) {
      if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("plan: noise level outside [0,1]");
    }
  }
};

/// One cell of the experiment matrix.
struct RunKey {
  std::string algorithm;
  SuiteEntry problem;
  double noise = 0.0;
  std::size_t seed = 0;
};

/// Noise stream of a cell. Algorithms share streams so they face the same perturbations.
inline NoiseSpec noise_for(const ExperimentPlan& plan, const SuiteEntry& e, double level, std::size_t seed) {
  std::uint64_t h = fnv1a(e.name.data(), e.name.size());
  h = splitmix64(h ^ splitmix64(e.dim));
  h = splitmix64(h ^ splitmix64(plan.base_seed));
  return NoiseSpec{level, h, seed};
}

/// Cells in canonical order (algorithm, problem, noise, seed), honoring the trinf skip rule.
inline std::vector<RunKey> plan_cells(const ExperimentPlan& plan) {
  std::vector<RunKey> out;
  for (const auto& a : plan.algorithms) {
    const bool baseline = preset(a).algorithm == Algorithm::trinf;
    for (const auto& p : plan.suite) {
      for (double s : plan.noise_levels) {
        if (baseline && plan.skip_trinf_above && s > *plan.skip_trinf_above) continue;
        for (std::size_t seed = 0; seed < plan.seeds; ++seed) out.push_back({a, p, s, seed});
      }
    }
  }
  return out;
}

inline RunRecord run_cell(const ExperimentPlan& plan, const RunKey& key) {
  SolverConfig cfg = preset(key.algorithm);
  cfg.epsilon = plan.epsilon;
  cfg.max_iter = plan.max_iter;
  cfg.log_iterations = plan.log_iterations;
  const NoiseSpec noise = noise_for(plan, key.problem, key.noise, key.seed);
  try {
    const Problem p = registry_get(key.problem.name, key.problem.dim);
    return solve(p, cfg, noise);
  } catch (const std::exception& e) {
    RunRecord r;
    r.problem = key.problem.name;
    r.dim = key.problem.dim;
    r.config = cfg;
    r.noise = noise;
    r.termination = Termination::oracle_failure;
    r.message = std::string("run failed: ") + e.what();
    return r;
  }
}

/// Execute every cell. Output order is canonical regardless of the worker count.
inline std::vector<RunRecord> run_plan(const ExperimentPlan& plan) {
  plan.validate();
  const auto cells = plan_cells(plan);
  std::vector<RunRecord> out(cells.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(plan.workers, cells.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) out[i] = run_cell(plan, cells[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) out[i] = run_cell(plan, cells[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

/// Noiseless criticality at the final iterate of a run.
inline double true_criticality(const RunRecord& r, const Problem& p) {
  if (r.x_final.size() != p.dim || !p.bounds.contains(r.x_final)) return kInf;
  try {
    const auto res = evaluate(p, r.x_final, false, true);
    return criticality_norm(chi(r.x_final, *res.gradient, p.bounds));
  } catch (const std::exception&) {
    return kInf;
  }
}

/// Ground-truth success: noiseless criticality at the final iterate within the run's epsilon.
inline bool convergence_judgment(const RunRecord& r, const Problem& p) {
  if (r.termination == Termination::oracle_failure) return false;
  return true_criticality(r, p) <= r.config.epsilon;
}

/// Compact per-run result used for profiles, reliability and export.
struct RunSummary {
  std::string problem;
  std::size_t dim = 0;
  std::string algorithm;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string termination;
  std::size_t iterations = 0;
  std::uint64_t f_evals = 0;
  std::uint64_t g_evals = 0;
  double final_criticality = kInf;
  double true_criticality = kInf;
  bool success = false;
};

inline RunSummary summarize(const RunRecord& r, const Problem& p) {
  RunSummary s;
  s.problem = r.problem;
  s.dim = r.dim;
  s.algorithm = r.config.name;
  s.noise = r.noise.level;
  s.seed = r.noise.stream_id;
  s.termination = to_string(r.termination);
  s.iterations = r.iterations;
  s.f_evals = r.evals.f;
  s.g_evals = r.evals.g;
  s.final_criticality = r.final_criticality;
  s.true_criticality = r.termination == Termination::oracle_failure ? kInf : true_criticality(r, p);
  s.success = r.termination != Termination::oracle_failure && s.true_criticality <= r.config.epsilon;
  return s;
}

/// Summaries for records whose problems come from the registry.
inline std::vector<RunSummary> summarize(const std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, std::size_t>, Problem> cache;
  std::vector<RunSummary> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto key = std::make_pair(r.problem, r.dim);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, registry_get(r.problem, r.dim)).first;
    out.push_back(summarize(r, it->second));
  }
  return out;
}

/// Step-function performance profile of one algorithm: sorted ratios of solved instances.
struct ProfileCurve {
  std::string algorithm;
  std::vector<double> ratios;  // finite ratios, ascending
  std::size_t instances = 0;
  double area = 0.0;
};

/// Performance-profile curves over instances (problem, dim, noise, seed); cost = iterations.
/// Ratios use max(cost, 1) so instances solved at k = 0 stay finite. Area = (1/10) int_0^10 rho(t) dt.
inline std::vector<ProfileCurve> profile_curves(const std::vector<RunSummary>& runs,
                                                const std::vector<std::string>& algorithms) {
  if (runs.empty()) throw std::invalid_argument("profile_area: no records");
  using Instance = std::tuple<std::string, std::size_t, double, std::uint64_t>;
  std::map<Instance, std::map<std::string, std::optional<double>>> table;
  for (const auto& r : runs) {
    auto& cell = table[{r.problem, r.dim, r.noise, r.seed}][r.algorithm];
    cell = r.success ? std::optional<double>(std::max<double>(static_cast<double>(r.iterations), 1.0)) : std::nullopt;
  }
  std::vector<ProfileCurve> curves;
  for (const auto& a : algorithms) curves.push_back({a, {}, table.size(), 0.0});
  for (const auto& [inst, row] : table) {
    double best = kInf;
    for (const auto& [a, c] : row) {
      if (c) best = std::min(best, *c);
    }
    for (auto& curve : curves) {
      auto it = row.find(curve.algorithm);
      if (it != row.end() && it->second && std::isfinite(best)) curve.ratios.push_back(*it->second / best);
    }
  }
  for (auto& curve : curves) {
    std::sort(curve.ratios.begin(), curve.ratios.end());
    double acc = 0.0;
    for (double r : curve.ratios) {
      if (r <= 10.0) acc += 10.0 - r;
    }
    curve.area = acc / (10.0 * static_cast<double>(curve.instances));
  }
  return curves;
}

inline std::map<std::string, double> profile_area(const std::vector<RunSummary>& runs,
                                                  const std::vector<std::string>& algorithms) {
  std::map<std::string, double> out;
  for (const auto& c : profile_curves(runs, algorithms)) out[c.algorithm] = c.area;
  return out;
}

struct ReliabilityCell {
  double percent = 0.0;  // rounded to one decimal
  std::size_t runs = 0;
  std::size_t successes = 0;

  friend bool operator==(const ReliabilityCell&, const ReliabilityCell&) = default;
};

struct ProfileReport {
  std::vector<std::string> algorithms;
  std::vector<double> noise_levels;
  std::map<std::string, double> areas;  // noiseless instances only
  std::map<std::string, std::map<double, ReliabilityCell>> reliability;

  friend bool operator==(const ProfileReport&, const ProfileReport&) = default;
};

inline double round1(double v) { return std::round(v * 10.0) / 10.0; }

/// Areas from the noiseless runs and per-(algorithm, noise) reliability:
/// percentage of solved problems per seed, averaged over seeds, rounded to one decimal.
inline ProfileReport reliability_table(const std::vector<RunSummary>& runs,
                                       const std::vector<std::string>& algorithms) {
  ProfileReport rep;
  rep.algorithms = algorithms;
  std::vector<RunSummary> noiseless;
  std::map<std::string, std::map<double, std::map<std::uint64_t, std::pair<std::size_t, std::size_t>>>> tally;
  for (const auto& r : runs) {
    if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end()) continue;
    if (std::find(rep.noise_levels.begin(), rep.noise_levels.end(), r.noise) == rep.noise_levels.end()) {
      rep.noise_levels.push_back(r.noise);
    }
    if (r.noise == 0.0) noiseless.push_back(r);
    auto& t = tally[r.algorithm][r.noise][r.seed];
    ++t.first;
    t.second += r.success ? 1 : 0;
  }
  std::sort(rep.noise_levels.begin(), rep.noise_levels.end());
  if (!noiseless.empty()) rep.areas = profile_area(noiseless, algorithms);
  for (const auto& [alg, by_noise] : tally) {
    for (const auto& [s, by_seed] : by_noise) {
      ReliabilityCell cell;
      double acc = 0.0;
      for (const auto& [seed, t] : by_seed) {
        cell.runs += t.first;
        cell.successes += t.second;
        acc += 100.0 * static_cast<double>(t.second) / static_cast<double>(t.first);
      }
      cell.percent = round1(acc / static_cast<double>(by_seed.size()));
      rep.reliability[alg][s] = cell;
    }
  }
  return rep;
}

inline Json to_json(const ExperimentPlan& p) {
  Json suite = Json::array();
  for (const auto& e : p.suite) suite.push_back({{"problem", e.name}, {"dim", e.dim}});
  return {{"suite", suite},
          {"algorithms", p.algorithms},
          {"noise_levels", p.noise_levels},
          {"seeds", p.seeds},
          {"base_seed", p.base_seed},
          {"epsilon", p.epsilon},
          {"max_iter", p.max_iter},
          {"skip_trinf_above", p.skip_trinf_above ? Json(*p.skip_trinf_above) : Json(nullptr)}};
}

inline Json to_json(const RunSummary& s) {
  return {{"problem", s.problem},
          {"dim", s.dim},
          {"algorithm", s.algorithm},
          {"noise", s.noise},
          {"seed", s.seed},
          {"termination", s.termination},
          {"iterations", s.iterations},
          {"f_evals", s.f_evals},
          {"g_evals", s.g_evals},
          {"final_criticality", detail::real_json(s.final_criticality)},
          {"true_criticality", detail::real_json(s.true_criticality)},
          {"success", s.success}};
}

inline Json to_json(const ProfileReport& r) {
  Json rel = Json::array();
  for (const auto& [alg, row] : r.reliability) {
    for (const auto& [s, c] : row) {
      rel.push_back({{"algorithm", alg},
                     {"noise", s},
                     {"percent", c.percent},
                     {"runs", c.runs},
                     {"successes", c.successes}});
    }
  }
  Json areas = Json::object();
  for (const auto& [a, v] : r.areas) areas[a] = v;
  return {{"algorithms", r.algorithms}, {"noise_levels", r.noise_levels}, {"areas", areas}, {"reliability", rel}};
}

inline ProfileReport report_from_json(const Json& j) {
  ProfileReport r;
  r.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  r.noise_levels = j.at("noise_levels").get<std::vector<double>>();
  for (const auto& [a, v] : j.at("areas").items()) r.areas[a] = v.get<double>();
  for (const auto& c : j.at("reliability")) {
    r.reliability[c.at("algorithm").get<std::string>()][c.at("noise").get<double>()] =
        ReliabilityCell{c.at("percent").get<double>(), c.at("runs").get<std::size_t>(),
                        c.at("successes").get<std::size_t>()};
  }
  return r;
}

inline constexpr int kReportSchemaVersion = 1;

/// Full bench document: plan, per-run summaries and the aggregated report.
inline Json bench_document(const ExperimentPlan* plan, const std::vector<RunSummary>& runs,
                           const ProfileReport& report) {
  Json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["plan"] = plan ? to_json(*plan) : Json(nullptr);
  Json rs = Json::array();
  for (const auto& s : runs) rs.push_back(to_json(s));
  doc["runs"] = rs;
  doc["report"] = to_json(report);
  return doc;
}

inline ProfileReport report_from_document(const Json& doc) {
  const int v = doc.at("schema_version").get<int>();
  if (v != kReportSchemaVersion) throw std::invalid_argument("report: unsupported schema_version " + std::to_string(v));
  return report_from_json(doc.at("report"));
}

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace detail

/// Long-format CSV: `noise,algo,metric,value`. Areas at noise 0 (4 decimals), reliability with one decimal.
inline std::string report_csv(const ProfileReport& r) {
  std::string out = "noise,algo,metric,value\n";
  for (const auto& a : r.algorithms) {
    auto it = r.areas.find(a);
    if (it != r.areas.end()) out += "0," + a + ",area," + detail::fmt("%.4f", it->second) + "\n";
  }
  for (double s : r.noise_levels) {
    for (const auto& a : r.algorithms) {
      auto row = r.reliability.find(a);
      if (row == r.reliability.end()) continue;
      auto cell = row->second.find(s);
      if (cell == row->second.end()) continue;
      out += detail::fmt("%g", s) + "," + a + ",reliability," + detail::fmt("%.1f", cell->second.percent) + "\n";
    }
  }
  return out;
}

enum class ReportFormat { json, csv };

inline void export_report(const ProfileReport& report, const std::vector<RunSummary>& runs, const std::string& path,
                          ReportFormat format, const ExperimentPlan* plan = nullptr) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == ReportFormat::json) {
    os << bench_document(plan, runs, report).dump(2) << '\n';
  } else {
    os << report_csv(report);
  }
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline ProfileReport import_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return report_from_document(Json::parse(is));
}

}  // namespace offo
