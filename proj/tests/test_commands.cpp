#include "fastslow/commands.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace fastslow;
namespace fs = std::filesystem;

namespace {

Scenario load(const std::string& rel) {
  std::ifstream in(std::string(FASTSLOW_SOURCE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fastslow_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

double metric(const Report& r, const std::string& prefix) {
  for (const auto& [k, v] : r.metrics)
    if (k.rfind(prefix, 0) == 0) return v;
  ADD_FAILURE() << "no metric " << prefix;
  return std::nan("");
}

}  // namespace

TEST(Analyze, Benchmark) {
  CommandOptions o;
  o.write_files = false;
  const Report r = cmd_analyze(parse_scenario(kBenchmarkScenario), o);
  ASSERT_TRUE(r.ros && r.bls && r.rho2 && r.lyapunov && r.hypotheses_hold);
  EXPECT_EQ(r.ros->verdict, Verdict::stable);
  EXPECT_NEAR(r.ros->spectral_abscissa, -2.0, 1e-12);
  EXPECT_EQ(r.bls->verdict, Verdict::stable);
  EXPECT_NEAR(r.bls->spectral_abscissa, -0.5 * std::log(2.0), 1e-9);
  EXPECT_NEAR(r.rho2->infimum, 1.5, 1e-6);
  EXPECT_FALSE(r.lyapunov->holds);
  EXPECT_TRUE(*r.hypotheses_hold);
  ASSERT_EQ(r.sweep.size(), 4u);
  EXPECT_EQ(r.sweep[0].verdict, Verdict::unstable);
  for (int i = 1; i < 4; ++i) EXPECT_EQ(r.sweep[i].verdict, Verdict::stable) << r.sweep[i].eps;
  ASSERT_TRUE(r.eps_star);
  EXPECT_GT(*r.eps_star, 0.1);
  EXPECT_LT(*r.eps_star, 0.2);
}

TEST(Analyze, Decoupled) {
  CommandOptions o;
  o.write_files = false;
  const Report r = cmd_analyze(load("scenarios/decoupled.scenario"), o);
  EXPECT_EQ(r.ros->verdict, Verdict::stable);
  EXPECT_EQ(r.bls->verdict, Verdict::stable);
  EXPECT_TRUE(r.rho2->criterion_holds);
  EXPECT_TRUE(r.lyapunov->holds);
  EXPECT_TRUE(*r.hypotheses_hold);
  for (const auto& row : r.sweep) EXPECT_EQ(row.verdict, Verdict::stable);
  ASSERT_TRUE(r.eps_star);
}

TEST(Analyze, UnstableReducedOrder) {
  CommandOptions o;
  o.write_files = false;
  const Report r = cmd_analyze(load("scenarios/unstable_ros.scenario"), o);
  EXPECT_EQ(r.ros->verdict, Verdict::unstable);
  EXPECT_FALSE(*r.hypotheses_hold);
  EXPECT_FALSE(r.eps_star);
  bool noted = false;
  for (const auto& n : r.notes) noted = noted || n.rfind("NoStableEpsilonFound", 0) == 0;
  EXPECT_TRUE(noted);
}

TEST(Simulate, BothSolversAgree) {
  CommandOptions o;
  o.out = scratch("simulate_both");
  o.solver = SolverChoice::both;
  o.eps = std::vector<double>{0.01};
  o.T = 1.0;
  const Report r = cmd_simulate(parse_scenario(kBenchmarkScenario), o);
  EXPECT_TRUE(fs::exists(o.out / "eps_0.01_characteristics.csv"));
  EXPECT_TRUE(fs::exists(o.out / "eps_0.01_upwind.csv"));
  EXPECT_TRUE(fs::exists(o.out / "eps_0.01_characteristics" / profile_file_name(0.08)));
  // Upwind snapshots sit at the nearest upwind step, so only count them.
  const auto files = std::distance(fs::directory_iterator(o.out / "eps_0.01_upwind"), fs::directory_iterator{});
  EXPECT_EQ(files, 4);
  EXPECT_LT(metric(r, "max |z_upwind - z_characteristics|"), 0.05);
  const auto csv = lines(slurp(o.out / "eps_0.01_characteristics.csv"));
  EXPECT_EQ(csv.front(), "t,z_1,norm_z,norm_y_L1,norm_y_L2,norm_y_Linf");
  fs::remove_all(o.out);
}

TEST(Simulate, ZeroHorizonWritesOneRow) {
  CommandOptions o;
  o.out = scratch("simulate_t0");
  o.eps = std::vector<double>{0.1};
  o.T = 0.0;
  cmd_simulate(parse_scenario(kBenchmarkScenario), o);
  const auto csv = lines(slurp(o.out / "eps_0.1_characteristics.csv"));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[1].rfind("0,1,", 0), 0u) << csv[1];
  fs::remove_all(o.out);
}

TEST(Simulate, ForcedUnstableUpwindStep) {
  CommandOptions o;
  o.write_files = false;
  o.solver = SolverChoice::upwind;
  o.upwind_dt = 0.1;
  try {
    cmd_simulate(parse_scenario(kBenchmarkScenario), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CflViolation);
  }
}

TEST(Reproduce, BoundaryLayerTarget) {
  CommandOptions o;
  o.out = scratch("example1");
  const Report r = cmd_reproduce("example1", o);
  ASSERT_TRUE(r.bls && r.rho2 && r.lyapunov);
  EXPECT_EQ(r.bls->verdict, Verdict::stable);
  for (auto s : r.bls->roots) {
    EXPECT_NEAR(s.real(), -0.5 * std::log(2.0), 1e-6);
    // w = e^{-s} solves 1 - w + w^2 / 2 = 0, so arg w = +-pi/4.
    const double d1 = std::remainder(std::abs(s.imag()) - 0.25 * kPi, 2.0 * kPi);
    const double d2 = std::remainder(std::abs(s.imag()) + 0.25 * kPi, 2.0 * kPi);
    EXPECT_LT(std::min(std::abs(d1), std::abs(d2)), 1e-6) << s;
  }
  EXPECT_EQ(r.bls->roots.size(), 6u);
  EXPECT_NEAR(r.rho2->infimum, 1.5, 1e-6);
  EXPECT_FALSE(r.lyapunov->holds);
  EXPECT_EQ(metric(r, "random Lyapunov witnesses"), 0.0);
  EXPECT_NEAR(metric(r, "boundary-layer decay rate"), 0.5 * std::log(2.0), 0.01 * 0.5 * std::log(2.0));
  EXPECT_TRUE(fs::exists(o.out / "bls_roots.csv"));
  EXPECT_TRUE(fs::exists(o.out / "bls_trajectory.csv"));
  EXPECT_THROW(cmd_reproduce("example2", o), Error);
  fs::remove_all(o.out);
}

TEST(Reproduce, SweepTarget) {
  CommandOptions o;
  o.out = scratch("section5");
  const Report r = cmd_reproduce("section5", o);
  const double e1 = metric(r, "sup |z - zbar| eps_0.1");
  const double e2 = metric(r, "sup |z - zbar| eps_0.05");
  const double e3 = metric(r, "sup |z - zbar| eps_0.01");
  EXPECT_GT(e1, e2);
  EXPECT_GT(e2, e3);
  EXPECT_LT(metric(r, "spatial oscillation"), 0.1);
  ASSERT_EQ(r.sweep.size(), 4u);
  for (const auto& row : r.sweep) {
    ASSERT_TRUE(row.nu);
    if (row.sign_agrees) EXPECT_TRUE(*row.sign_agrees) << row.eps;
  }
  for (const char* f : {"ode_z.csv", "ros.csv", "sweep.csv", "trace_eps_0.01.csv"})
    EXPECT_TRUE(fs::exists(o.out / f)) << f;
  EXPECT_TRUE(fs::exists(o.out / "profiles_eps_0.01" / profile_file_name(0.08)));
  const auto trace = lines(slurp(o.out / "trace_eps_0.01.csv"));
  EXPECT_EQ(trace.front(), "t,y0_1,y0_2,y1_1,y1_2,ystar_1,ystar_2");
  fs::remove_all(o.out);
}

TEST(Determinism, RepeatedRunsAreByteIdentical) {
  const Scenario sc = parse_scenario(kBenchmarkScenario);
  std::string texts[2], csvs[2];
  for (int k = 0; k < 2; ++k) {
    CommandOptions o;
    o.out = scratch("det" + std::to_string(k));
    o.workers = k == 0 ? 1 : 2;
    o.T = 1.0;
    const Report r = cmd_sweep(sc, o);
    Report normalized = r;
    normalized.files.clear();
    texts[k] = render_text(normalized) + report_json(normalized).dump();
    csvs[k] = slurp(o.out / "sweep.csv") + slurp(o.out / "eps_0.05_characteristics.csv");
    fs::remove_all(o.out);
  }
  EXPECT_EQ(texts[0], texts[1]);
  EXPECT_EQ(csvs[0], csvs[1]);
}

TEST(Parallel, ResultsByIndexAndLowestError) {
  const auto v = parallel_map<int>(50, [](std::size_t i) { return static_cast<int>(i * i); }, 4);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  try {
    parallel_map<int>(
        20,
        [](std::size_t i) -> int {
          if (i == 7 || i == 13) throw std::runtime_error(std::to_string(i));
          return 0;
        },
        3);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
}

TEST(Csv, AtomicWriteAndFormat) {
  const fs::path dir = scratch("csv");
  write_file_atomic(dir / "a" / "b.txt", "hello\n");
  EXPECT_EQ(slurp(dir / "a" / "b.txt"), "hello\n");
  EXPECT_FALSE(fs::exists(dir / "a" / "b.txt.tmp"));
  EXPECT_EQ(std::stod(format_g17(0.1)), 0.1);
  fs::remove_all(dir);
}
