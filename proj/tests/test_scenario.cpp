#include "attackdet/scenario.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace attackdet;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string small_json = slurp(std::string(TEST_DATA_DIR) + "/small.json");

std::string config_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos == std::string::npos) throw std::logic_error("fixture text not found: " + from);
  return s.replace(pos, from.size(), to);
}

}  // namespace

TEST(PaperScenario, MatchesExampleData) {
  const auto s = paper_scenario();
  EXPECT_TRUE(validate(s.models).empty());
  EXPECT_EQ(s.models.node_count(), 6);
  EXPECT_EQ(s.graph.edges().size(), 6u);
  EXPECT_EQ(in_neighbors(s.graph, 1), std::vector<int>{6});
  EXPECT_EQ(in_neighbors(s.graph, 2), std::vector<int>{1});
  EXPECT_DOUBLE_EQ(s.models.plant.A(2, 0), 1.4751);
  EXPECT_TRUE(s.models.plant.B.isApprox(0.1 * Eigen::MatrixXd::Identity(6, 6)));
  EXPECT_EQ(s.models.nodes[5].sensor.C(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.models.nodes[0].sensor.Dbar(1, 1), 0.01);
  EXPECT_DOUBLE_EQ(s.params.gamma_sq, 0.5);
  EXPECT_DOUBLE_EQ(s.params.alpha[3], 2.0);
  EXPECT_DOUBLE_EQ(s.params.pi[3], 2.0);
  const auto& step = std::get<attack::Step>(s.simulation.attacks[1]);
  EXPECT_DOUBLE_EQ(step.amplitude(0), 5.0);
  EXPECT_DOUBLE_EQ(step.t_on, 2.0);
  EXPECT_DOUBLE_EQ(step.t_off, 7.0);
  EXPECT_EQ(paper_scenario(0.0).simulation.process_noise, 0.0);
}

TEST(Config, ParsesSmallNetwork) {
  const auto s = parse_scenario(small_json);
  EXPECT_EQ(s.models.node_count(), 2);
  EXPECT_TRUE(s.models.plant.B.isApprox(0.1 * Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(s.models.consensus.H.isIdentity());
  EXPECT_EQ(s.models.nodes[1].tracker.dim(), 2);
  EXPECT_DOUBLE_EQ(s.params.gamma_sq, 1.0);
  EXPECT_DOUBLE_EQ(s.params.alpha[1], 0.5);
  EXPECT_TRUE(s.params.weights_defaulted);
  EXPECT_EQ(*s.params.injection_rate_bound, 200.0);
  EXPECT_DOUBLE_EQ(s.simulation.horizon, 6.0);
  EXPECT_EQ(s.simulation.seed, 3u);
  EXPECT_TRUE(std::holds_alternative<attack::Step>(s.simulation.attacks[0]));
  EXPECT_TRUE(std::holds_alternative<attack::Zero>(s.simulation.attacks[1]));
  EXPECT_EQ(s.outputs.csv, "small.csv");
}

TEST(Config, MatrixForms) {
  auto text = replace(small_json, R"("A": [[0.5, 1.0], [0.0, -1.0]])", R"("A": {"rows": 2, "cols": 2, "data": [0.5, 1, 0, -1]})");
  const auto s = parse_scenario(text);
  EXPECT_DOUBLE_EQ(s.models.plant.A(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.models.plant.A(1, 1), -1.0);
}

TEST(Config, ExplicitTrackerAndWeights) {
  auto text = replace(small_json, R"("tracker": { "beta": 2, "d": 1 } },)",
                      R"("tracker": { "Omega": [[-1]], "Gamma": [[1]], "Upsilon": [[-1]] } },)");
  text = replace(text, R"("alpha": 0.5,)", R"("alpha": [0.5, 0.7], "Qtilde": 0.01, "Qcheck": [0.02, 0.03],)");
  const auto s = parse_scenario(text);
  EXPECT_EQ(s.models.nodes[0].tracker.dim(), 1);
  EXPECT_FALSE(s.params.weights_defaulted);
  EXPECT_DOUBLE_EQ(s.params.alpha[1], 0.7);
  EXPECT_TRUE(s.params.Qtilde[1].isApprox(0.01 * Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(s.params.Qcheck[0](0, 0), 0.02);
  EXPECT_DOUBLE_EQ(s.params.Qcheck[1](1, 1), 0.03);
}

TEST(Config, SyntaxErrorReportsPosition) {
  const auto msg = config_error("{\n  \"plant\": {\n    \"A\": [[1, 2],\n  }\n}");
  EXPECT_NE(msg.find("syntax error"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error(replace(small_json, R"("B": 0.1)", R"("B": "x")")).find("plant.B"), std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"("horizon": 6,)", R"("horizon": "long",)")).find("simulation.horizon"),
            std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"("node": 1,)", R"("node": 7,)")).find("attacks[0].node"),
            std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"("type": "step")", R"("type": "ramp")")).find("attacks[0].type"),
            std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"([[1, 2], [2, 1]])", R"([[1, 1]])")).find("graph.edges"),
            std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"("consensus": { "H": 1.0 },)", "")).find("consensus"),
            std::string::npos);
  EXPECT_NE(config_error(replace(small_json, R"("nodes": 2,)", R"("nodes": 3,)")).find("graph.nodes"),
            std::string::npos);
}

TEST(Config, SingularNoiseCovarianceFailsValidation) {
  const auto msg = config_error(slurp(std::string(TEST_DATA_DIR) + "/noiseless.json"));
  EXPECT_NE(msg.find("model validation failed"), std::string::npos) << msg;
  EXPECT_NE(msg.find("node 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("positive definite"), std::string::npos) << msg;
}

TEST(Config, UnreadablePath) { EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ConfigError); }

TEST(Gains, JsonRoundTripIsExact) {
  const auto& sol = fixture::paper_solution();
  const auto back = gains_from_json(gains_to_json(sol));
  ASSERT_EQ(back.nodes.size(), sol.nodes.size());
  EXPECT_EQ(back.gamma_sq, sol.gamma_sq);
  EXPECT_EQ(back.margin, sol.margin);
  EXPECT_EQ(back.rho, sol.rho);
  EXPECT_EQ(back.alpha, sol.alpha);
  EXPECT_EQ(back.pi, sol.pi);
  EXPECT_EQ(back.P, sol.P);
  for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
    const auto& a = sol.nodes[i];
    const auto& b = back.nodes[i];
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.M, b.M);
    EXPECT_EQ(a.L_aug, b.L_aug);
    EXPECT_EQ(a.K_aug, b.K_aug);
    EXPECT_EQ(a.L, b.L);
    EXPECT_EQ(a.K, b.K);
    EXPECT_EQ(a.Lbar, b.Lbar);
    EXPECT_EQ(a.Kbar, b.Kbar);
    EXPECT_EQ(a.Lcheck, b.Lcheck);
    EXPECT_EQ(a.Kcheck, b.Kcheck);
    EXPECT_EQ(a.Q, b.Q);
    EXPECT_EQ(a.Qbar, b.Qbar);
  }
  EXPECT_EQ(gains_to_json(back), gains_to_json(sol));
}

TEST(Gains, FileRoundTripAndVerification) {
  const auto& s = fixture::paper();
  const auto path = (std::filesystem::temp_directory_path() / "attackdet-gains-test.json").string();
  write_gains(path, fixture::paper_solution());
  const auto back = read_gains(path);
  std::filesystem::remove(path);
  EXPECT_NO_THROW(check_gains(back, s.models));
  EXPECT_TRUE(verify_solution(back, s.models, s.graph, s.params).passed());
}

TEST(Gains, DimensionMismatchRejected) {
  const auto small = parse_scenario(small_json);
  EXPECT_THROW(check_gains(fixture::paper_solution(), small.models), ConfigError);
  auto sol = fixture::paper_solution();
  sol.P = Eigen::MatrixXd::Zero(5, 5);
  EXPECT_THROW(check_gains(sol, fixture::paper().models), ConfigError);
  EXPECT_THROW(gains_from_json("{\"gamma_sq\": 1}"), ConfigError);
  EXPECT_THROW(gains_from_json("not json"), ConfigError);
  EXPECT_THROW(read_gains("/nonexistent/gains.json"), ConfigError);
}
