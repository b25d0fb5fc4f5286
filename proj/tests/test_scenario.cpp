#include "fastslow/commands.hpp"
#include "fastslow/scenario.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace fastslow;

namespace {

std::string read_file(const std::string& rel) {
  std::ifstream in(std::string(FASTSLOW_SOURCE_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<ErrorKind> kind_of(const std::string& text, std::string* message = nullptr) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  return std::nullopt;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  EXPECT_NE(p, std::string::npos) << from;
  if (p != std::string::npos) s.replace(p, from.size(), to);
  return s;
}

}  // namespace

TEST(Scenario, BenchmarkFileMatchesEmbedded) {
  const Scenario file = parse_scenario(read_file("scenarios/section5.scenario"));
  const Scenario embedded = parse_scenario(kBenchmarkScenario);
  EXPECT_TRUE(file == embedded);
  EXPECT_EQ(file.system, fixtures::benchmark());
  EXPECT_EQ(file.run.eps, (std::vector<double>{0.2, 0.1, 0.05, 0.01}));
  EXPECT_DOUBLE_EQ(file.analysis.alpha, 0.5);
  EXPECT_DOUBLE_EQ(file.fit_start(), 1.25);
  EXPECT_DOUBLE_EQ(file.fit_end(), 5.0);
  EXPECT_TRUE(file.initial_condition().compatible);
  EXPECT_NEAR(file.y0()(0.4)(0), -std::cos(kPi), 1e-15);
}

TEST(Scenario, AllShippedScenariosParse) {
  for (const char* f : {"scenarios/section5.scenario", "scenarios/example1.scenario", "scenarios/decoupled.scenario",
                        "scenarios/unstable_ros.scenario"}) {
    const std::string text = read_file(f);
    ASSERT_FALSE(text.empty()) << f;
    EXPECT_NO_THROW(parse_scenario(text)) << f;
  }
}

TEST(Scenario, Defaults) {
  const Scenario sc = parse_scenario(R"({"system": {"A": [[-1]], "B": [[1]], "G1": [[0.5]], "G2": [[1]],
    "Lambda": [1]}, "initial": {"z0": [0], "y0": ["0"]}})");
  EXPECT_TRUE(sc.run == RunSettings{});
  EXPECT_TRUE(sc.analysis == AnalysisSettings{});
  EXPECT_DOUBLE_EQ(sc.eps_max(), 0.2);
}

TEST(Scenario, EmptyAndMalformedInput) {
  std::string msg;
  EXPECT_EQ(kind_of("", &msg), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("[1, 2]"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("{\n  \"name\": \"x\",\n  \"system\": {,\n}", &msg), ErrorKind::ParseError);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Scenario, SingularBoundaryIsValidationError) {
  const std::string text = replace(kBenchmarkScenario, R"("G1": [[1.0, -2.0], [0.25, -0.5]])",
                                   R"("G1": [[1.0, 0.0], [0.0, 1.0]])");
  try {
    parse_scenario(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_EQ(e.cause(), ErrorKind::SingularIminusG1);
  }
}

TEST(Scenario, SchemaErrorsNameTheField) {
  std::string msg;
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("T": 5.0)", R"("T": -1)"), &msg), ErrorKind::ParseError);
  EXPECT_NE(msg.find("run.T"), std::string::npos) << msg;
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("name": "section5")", R"("nmae": "section5")"), &msg),
            ErrorKind::ParseError);
  EXPECT_NE(msg.find("nmae"), std::string::npos) << msg;
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("solver": "characteristics")", R"("solver": "spectral")")),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("0"])", R"("0 +"])"), &msg), ErrorKind::ParseError);
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("0"])", R"("1/x"])")), ErrorKind::ParseError);
}

TEST(Scenario, DimensionErrors) {
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("B": [[1.0, 2.0]])", R"("B": [[1.0]])")),
            ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("z0": [1.0])", R"("z0": [1.0, 2.0])")),
            ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"x("y0": ["-cos(5*pi/2*x)", "0"])x", R"("y0": ["0"])")),
            ErrorKind::ValidationError);
  EXPECT_EQ(kind_of(replace(kBenchmarkScenario, R"("Lambda": [1.0, 0.5])", R"("Lambda": [1.0, -0.5])")),
            ErrorKind::ValidationError);
}

TEST(Scenario, RoundTrip) {
  Scenario sc = parse_scenario(kBenchmarkScenario);
  sc.run.solver = SolverChoice::both;
  sc.run.upwind_dt = 1e-4;
  sc.analysis.im_max = 12.5;
  sc.analysis.fit_start = 0.5;
  const std::string text = serialize_scenario(sc);
  const Scenario back = parse_scenario(text);
  EXPECT_TRUE(back == sc);
  EXPECT_EQ(serialize_scenario(back), text);
}

TEST(Scenario, SampledInitialProfile) {
  const Scenario sc = parse_scenario(R"({"system": {"A": [[-1]], "B": [[1]], "G1": [[0.5]], "G2": [[1]],
    "Lambda": [1]}, "initial": {"z0": [1], "y0_grid": [[1.5, 1.25, 1]]}})");
  ASSERT_TRUE(sc.initial.y0_grid);
  EXPECT_DOUBLE_EQ(sc.y0()(0.25)(0), 1.375);
  EXPECT_TRUE(sc.initial_condition().compatible);
  EXPECT_TRUE(parse_scenario(serialize_scenario(sc)) == sc);
}
