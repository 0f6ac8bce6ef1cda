#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"

using namespace offo;

TEST(RunRecordIo, RoundTripAstr1b) {
  const Problem p = registry_get("torsion", 16);
  SolverConfig c = preset("astr1b3");
  c.max_iter = 50;
  const RunRecord r = solve(p, c, {0.05, 3, 1});
  const std::string text = run_record_string(r);
  std::istringstream is(text);
  const RunRecord back = read_run_record(is);
  EXPECT_EQ(back.problem, r.problem);
  EXPECT_EQ(back.dim, r.dim);
  EXPECT_EQ(back.config.name, "astr1b3");
  EXPECT_EQ(back.noise.seed, 3U);
  EXPECT_EQ(back.log.size(), r.log.size());
  EXPECT_EQ(back.x_final, r.x_final);
  EXPECT_EQ(back.evals, r.evals);
  EXPECT_EQ(back.termination, r.termination);
  EXPECT_EQ(run_record_string(back), text);
}

TEST(RunRecordIo, RoundTripTrinfWithNonFiniteFields) {
  const Problem p = registry_get("bqp-band", 8);
  SolverConfig c = preset("trinf1");
  c.max_iter = 30;
  RunRecord r = solve(p, c, {0.25, 1, 0});
  r.kappa_b_max = kInf;
  r.log.front().rho = -kInf;
  const std::string text = run_record_string(r);
  std::istringstream is(text);
  const RunRecord back = read_run_record(is);
  EXPECT_EQ(back.kappa_b_max, kInf);
  EXPECT_EQ(*back.log.front().rho, -kInf);
  EXPECT_EQ(run_record_string(back), text);
  // the unset refinement limit is the only null in the file
  const auto first = text.find("null");
  EXPECT_EQ(first, text.find("\"max_inner\":null") + 12);
  EXPECT_EQ(text.find("null", first + 1), std::string::npos);
}

TEST(RunRecordIo, TimingIsOptIn) {
  const RunRecord r = solve(registry_get("quad-1d", 1), preset("astr1b0"));
  EXPECT_EQ(run_record_string(r).find("wall_seconds"), std::string::npos);
  EXPECT_NE(run_record_string(r, {true, true}).find("wall_seconds"), std::string::npos);
  EXPECT_EQ(run_record_string(r, {false, false}).find("\"iter\""), std::string::npos);
}

TEST(RunRecordIo, MalformedInput) {
  std::istringstream missing("{\"type\":\"header\"}\n");
  EXPECT_ANY_THROW(read_run_record(missing));
  std::istringstream garbage("not json\n");
  EXPECT_THROW(read_run_record(garbage), std::invalid_argument);
  std::istringstream empty("");
  EXPECT_THROW(read_run_record(empty), std::invalid_argument);
}

TEST(RunRecordIo, FilesAreBitwiseReproducible) {
  const auto dir = std::filesystem::temp_directory_path() / "offo_test_record";
  std::filesystem::create_directories(dir);
  const Problem p = registry_get("explin", 12);
  auto write = [&](const std::string& name) {
    const auto path = (dir / name).string();
    save_run_record(path, solve(p, preset("astr1b1"), {0.15, 8, 2}));
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(write("a.jsonl"), write("b.jsonl"));
  EXPECT_EQ(load_run_record((dir / "a.jsonl").string()).problem, "explin");
  std::filesystem::remove_all(dir);
}

TEST(ConfigIo, RoundTripAllPresets) {
  for (const auto& name : preset_names()) {
    SolverConfig c = preset(name);
    c.max_inner = 7;
    const SolverConfig back = config_from_json(Json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back), to_json(c));
  }
}
