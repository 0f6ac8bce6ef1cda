#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "offo/solvers.hpp"

namespace offo {

using Json = nlohmann::json;

namespace detail {

// Non-finite reals are written as strings to keep the JSON standard.
inline Json real_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double real_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::invalid_argument("expected a real, got '" + s + "'");
}

inline Json vector_json(ConstSpan v) {
  Json a = Json::array();
  for (double x : v) a.push_back(real_json(x));
  return a;
}

inline Vector vector_from_json(const Json& j) {
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(real_from_json(e));
  return v;
}

template <class T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace detail

inline Json to_json(const SolverConfig& c) {
  Json j;
  j["name"] = c.name;
  j["algorithm"] = to_string(c.algorithm);
  j["weights"] = {{"scheme", to_string(c.weights.scheme)},
                  {"sigma", c.weights.sigma},
                  {"theta", c.weights.theta},
                  {"nu", c.weights.nu},
                  {"mu", c.weights.mu}};
  j["memory"] = c.memory;
  j["tau"] = c.tau;
  j["epsilon"] = c.epsilon;
  j["max_iter"] = c.max_iter;
  j["alpha"] = c.alpha;
  j["max_inner"] = c.max_inner ? Json(*c.max_inner) : Json(nullptr);
  j["inner_tolerance"] = c.inner_tolerance;
  j["trinf"] = {{"eta1", c.trinf.eta1},
                {"eta2", c.trinf.eta2},
                {"contract", c.trinf.contract},
                {"expand", c.trinf.expand},
                {"initial_radius", c.trinf.initial_radius},
                {"max_radius", detail::real_json(c.trinf.max_radius)}};
  j["log_iterations"] = c.log_iterations;
  return j;
}

inline SolverConfig config_from_json(const Json& j) {
  SolverConfig c;
  c.name = j.at("name").get<std::string>();
  c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  const auto& w = j.at("weights");
  c.weights.scheme = weight_scheme_from_string(w.at("scheme").get<std::string>());
  c.weights.sigma = w.at("sigma").get<double>();
  c.weights.theta = w.at("theta").get<double>();
  c.weights.nu = w.at("nu").get<double>();
  c.weights.mu = w.at("mu").get<double>();
  c.memory = j.at("memory").get<std::size_t>();
  c.tau = j.at("tau").get<double>();
  c.epsilon = j.at("epsilon").get<double>();
  c.max_iter = j.at("max_iter").get<std::size_t>();
  c.alpha = j.at("alpha").get<double>();
  if (!j.at("max_inner").is_null()) c.max_inner = j.at("max_inner").get<std::size_t>();
  c.inner_tolerance = j.at("inner_tolerance").get<double>();
  const auto& t = j.at("trinf");
  c.trinf.eta1 = t.at("eta1").get<double>();
  c.trinf.eta2 = t.at("eta2").get<double>();
  c.trinf.contract = t.at("contract").get<double>();
  c.trinf.expand = t.at("expand").get<double>();
  c.trinf.initial_radius = t.at("initial_radius").get<double>();
  c.trinf.max_radius = detail::real_from_json(t.at("max_radius"));
  c.log_iterations = j.at("log_iterations").get<bool>();
  return c;
}

inline Json to_json(const NoiseSpec& n) {
  return {{"level", n.level}, {"seed", n.seed}, {"stream_id", n.stream_id}};
}

inline NoiseSpec noise_from_json(const Json& j) {
  return {j.at("level").get<double>(), j.at("seed").get<std::uint64_t>(), j.at("stream_id").get<std::uint64_t>()};
}

inline Json to_json(const IterationLog& e) {
  Json j;
  j["type"] = "iter";
  j["k"] = e.k;
  j["x"] = e.x_digest;
  if (e.f) j["f"] = detail::real_json(*e.f);
  j["criticality"] = detail::real_json(e.criticality);
  j["chi_sq"] = detail::real_json(e.chi_sq);
  if (e.has_step) {
    j["step"] = {{"w_min", detail::real_json(e.w_min)},
                 {"w_max", detail::real_json(e.w_max)},
                 {"radius_max", detail::real_json(e.radius_max)},
                 {"gamma", detail::real_json(e.gamma)},
                 {"norm", detail::real_json(e.step_norm)},
                 {"model", detail::real_json(e.model_value)},
                 {"kappa_b", detail::real_json(e.kappa_b)}};
  }
  if (e.tr_radius) j["tr_radius"] = detail::real_json(*e.tr_radius);
  if (e.rho) j["rho"] = detail::real_json(*e.rho);
  detail::put_opt(j, "accepted", e.accepted);
  return j;
}

inline IterationLog iteration_from_json(const Json& j) {
  IterationLog e;
  e.k = j.at("k").get<std::size_t>();
  e.x_digest = j.at("x").get<std::string>();
  if (j.contains("f")) e.f = detail::real_from_json(j["f"]);
  e.criticality = detail::real_from_json(j.at("criticality"));
  e.chi_sq = detail::real_from_json(j.at("chi_sq"));
  if (j.contains("step")) {
    const auto& s = j["step"];
    e.has_step = true;
    e.w_min = detail::real_from_json(s.at("w_min"));
    e.w_max = detail::real_from_json(s.at("w_max"));
    e.radius_max = detail::real_from_json(s.at("radius_max"));
    e.gamma = detail::real_from_json(s.at("gamma"));
    e.step_norm = detail::real_from_json(s.at("norm"));
    e.model_value = detail::real_from_json(s.at("model"));
    e.kappa_b = detail::real_from_json(s.at("kappa_b"));
  }
  if (j.contains("tr_radius")) e.tr_radius = detail::real_from_json(j["tr_radius"]);
  if (j.contains("rho")) e.rho = detail::real_from_json(j["rho"]);
  if (j.contains("accepted")) e.accepted = j["accepted"].get<bool>();
  return e;
}

struct WriteOptions {
  bool include_iterations = true;
  bool include_timing = false;  // wall time breaks bitwise reproducibility
};

/// Line-delimited JSON: header, one object per logged iteration, footer.
inline void write_run_record(std::ostream& os, const RunRecord& r, const WriteOptions& opt = {}) {
  Json header{{"type", "header"},
              {"problem", r.problem},
              {"dim", r.dim},
              {"config", to_json(r.config)},
              {"noise", to_json(r.noise)}};
  os << header.dump() << '\n';
  if (opt.include_iterations) {
    for (const auto& e : r.log) os << to_json(e).dump() << '\n';
  }
  Json footer{{"type", "footer"},
              {"termination", to_string(r.termination)},
              {"iterations", r.iterations},
              {"evals", {{"f", r.evals.f}, {"g", r.evals.g}}},
              {"final_criticality", detail::real_json(r.final_criticality)},
              {"kappa_b_max", detail::real_json(r.kappa_b_max)},
              {"x_final", detail::vector_json(r.x_final)},
              {"message", r.message}};
  if (opt.include_timing) footer["wall_seconds"] = r.wall_seconds;
  os << footer.dump() << '\n';
}

inline std::string run_record_string(const RunRecord& r, const WriteOptions& opt = {}) {
  std::ostringstream os;
  write_run_record(os, r, opt);
  return os.str();
}

inline RunRecord read_run_record(std::istream& is) {
  RunRecord r;
  std::string line;
  bool have_header = false, have_footer = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw std::invalid_argument("run record line " + std::to_string(lineno) + ": " + e.what());
    }
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      r.problem = j.at("problem").get<std::string>();
      r.dim = j.at("dim").get<std::size_t>();
      r.config = config_from_json(j.at("config"));
      r.noise = noise_from_json(j.at("noise"));
      have_header = true;
    } else if (type == "iter") {
      r.log.push_back(iteration_from_json(j));
    } else if (type == "footer") {
      r.termination = termination_from_string(j.at("termination").get<std::string>());
      r.iterations = j.at("iterations").get<std::size_t>();
      r.evals.f = j.at("evals").at("f").get<std::size_t>();
      r.evals.g = j.at("evals").at("g").get<std::size_t>();
      r.final_criticality = detail::real_from_json(j.at("final_criticality"));
      r.kappa_b_max = detail::real_from_json(j.at("kappa_b_max"));
      r.x_final = detail::vector_from_json(j.at("x_final"));
      r.message = j.at("message").get<std::string>();
      if (j.contains("wall_seconds")) r.wall_seconds = j["wall_seconds"].get<double>();
      have_footer = true;
    } else {
      throw std::invalid_argument("run record line " + std::to_string(lineno) + ": unknown type '" + type + "'");
    }
  }
  if (!have_header || !have_footer) throw std::invalid_argument("run record: missing header or footer");
  return r;
}

inline void save_run_record(const std::string& path, const RunRecord& r, const WriteOptions& opt = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_run_record(os, r, opt);
  if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

inline RunRecord load_run_record(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_run_record(is);
}

}  // namespace offo
