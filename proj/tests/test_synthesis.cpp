#include "attackdet/detectability.hpp"
#include "attackdet/synthesis.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace attackdet;
using fixture::random_matrix;
using fixture::random_spd;

namespace {

// Two nodes exchanging the full state, one attack channel each.
struct Small {
  ModelSet models;
  DirectedGraph graph{2, {{1, 2}, {2, 1}}};
  SynthesisParams params;
};

Small small_network() {
  Small s;
  s.models.plant.A = (Eigen::MatrixXd(2, 2) << 0.5, 1.0, 0.0, -1.0).finished();
  s.models.plant.B = 0.1 * Eigen::MatrixXd::Identity(2, 2);
  s.models.consensus.H = Eigen::MatrixXd::Identity(2, 2);
  for (int i = 0; i < 2; ++i) {
    NodeModel node;
    node.sensor.C = Eigen::MatrixXd::Zero(1, 2);
    node.sensor.C(0, i) = 1.0;
    node.sensor.D = Eigen::MatrixXd::Zero(1, 2);
    node.sensor.Dbar = 0.1 * Eigen::MatrixXd::Identity(1, 1);
    node.attack.F = Eigen::MatrixXd::Ones(2, 1);
    node.tracker = build_tracker(2.0, 1.0, 1);
    s.models.nodes.push_back(node);
  }
  s.params = default_params(s.models, s.graph, 1.0, 0.5);
  return s;
}

}  // namespace

TEST(Params, DefaultPiAndRate) {
  const auto pi = default_pi({2.0, 1.0, 3.0}, (Eigen::VectorXi(3) << 1, 0, 2).finished());
  EXPECT_DOUBLE_EQ(pi[0], 2.0);
  EXPECT_DOUBLE_EQ(pi[1], 2.0);
  EXPECT_DOUBLE_EQ(pi[2], 2.0);
  EXPECT_DOUBLE_EQ(dissipation_rate({2.0, 2.0}, {2.0, 2.0}, (Eigen::VectorXi(2) << 1, 1).finished()), 2.0);
  EXPECT_DOUBLE_EQ(dissipation_rate({2.0, 1.0}, {1.0, 1.0}, (Eigen::VectorXi(2) << 3, 1).finished()), -1.0 + 2.0);
}

TEST(Params, DefaultWeights) {
  const auto& s = fixture::paper();
  const auto p = default_params(s.models, s.graph, 0.5, 2.0);
  EXPECT_TRUE(p.weights_defaulted);
  ASSERT_EQ(p.Qtilde.size(), 6u);
  EXPECT_TRUE(p.Qtilde[0].isApprox(1e-3 * Eigen::MatrixXd::Identity(6, 6)));
  EXPECT_TRUE(p.Qcheck[0].isApprox(1e-3 * Eigen::MatrixXd::Identity(2, 2)));
}

TEST(Params, RejectedBeforeSolving) {
  auto s = small_network();
  auto p = s.params;
  p.pi[0] = 2.0 * p.alpha[0];
  EXPECT_THROW(synthesize(s.models, s.graph, p), std::invalid_argument);
  p = s.params;
  p.gamma_sq = 0.0;
  EXPECT_THROW(synthesize(s.models, s.graph, p), std::invalid_argument);
  p = s.params;
  p.Qcheck[1] = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(synthesize(s.models, s.graph, p), std::invalid_argument);
  p = s.params;
  p.injection_rate_bound = -1.0;
  EXPECT_THROW(synthesize(s.models, s.graph, p), std::invalid_argument);
  EXPECT_THROW(synthesize(s.models, DirectedGraph(3, {}), s.params), std::invalid_argument);
}

TEST(Layout, RoundTripsSymmetricBlocks) {
  VariableLayout layout({3, 2}, 2);
  EXPECT_EQ(layout.size(), 6 + 3 + 3 * 2 + 2 * 2);
  std::mt19937_64 rng(1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
  const Eigen::MatrixXd x1 = random_spd(rng, 2);
  layout.set_x(v, 1, x1);
  EXPECT_TRUE(layout.x_of(v, 1).isApprox(x1));
  EXPECT_EQ(layout.x_index(0, 1, 2), layout.x_index(0, 2, 1));
  EXPECT_EQ(layout.m_of(v, 0).rows(), 3);
  EXPECT_EQ(layout.m_of(v, 0).cols(), 2);
  v(layout.m_index(1, 1, 0)) = 4.0;
  EXPECT_EQ(layout.m_of(v, 1)(1, 0), 4.0);
}

TEST(Lmi, AffineAssemblyMatchesDirectEvaluation) {
  const auto& s = fixture::paper();
  const auto data = lmi_node_data(s.models, s.graph, s.params);
  std::vector<Eigen::Index> dims;
  for (const auto& d : data) dims.push_back(d.aug.A.rows());
  VariableLayout layout(dims, s.models.consensus.H.rows());
  std::mt19937_64 rng(12);
  Eigen::VectorXd v = fixture::random_vector(rng, layout.size());
  for (int i = 0; i < 6; ++i) layout.set_x(v, i, random_spd(rng, dims[static_cast<std::size_t>(i)]));
  for (int i = 0; i < 6; ++i) {
    const auto& d = data[static_cast<std::size_t>(i)];
    std::vector<Eigen::MatrixXd> nx;
    for (int j : d.neighbors) nx.push_back(layout.x_of(v, j));
    const auto direct = lmi_matrix(d, layout.x_of(v, i), layout.m_of(v, i), nx);
    const auto affine = eval(assemble_lmi(d, i, layout), v);
    EXPECT_LT((direct - affine).norm(), 1e-10 * (1.0 + direct.norm())) << "node " << i + 1;
    EXPECT_TRUE(direct.isApprox(direct.transpose()));
  }
}

TEST(Gains, RecoveryFormulas) {
  std::mt19937_64 rng(7);
  const auto& node = fixture::paper().models.nodes[0];
  const auto& m = fixture::paper().models;
  const auto aug = augment(m.plant, node.sensor, node.tracker, node.attack, m.consensus);
  const Eigen::MatrixXd X = random_spd(rng, aug.A.rows());
  const Eigen::MatrixXd M = random_matrix(rng, aug.A.rows(), 6);
  Eigen::MatrixXd L, K;
  recover_gains(aug, 0.5, X, M, L, K);
  EXPECT_LT((X * K + M).norm(), 1e-10 * M.norm());
  EXPECT_LT((X * L * aug.E - (0.5 * aug.C.transpose() - X * aug.B2 * aug.D.transpose())).norm(), 1e-10);
  Eigen::MatrixXd singular = Eigen::MatrixXd::Identity(aug.A.rows(), aug.A.rows());
  singular(0, 0) = 1e-14;
  EXPECT_THROW(recover_gains(aug, 0.5, singular, M, L, K), SynthesisError);
}

TEST(Gains, ClosedLoopMatrixMatchesNetworkAssembly) {
  std::mt19937_64 rng(21);
  const auto& s = fixture::paper();
  std::vector<Eigen::MatrixXd> Lt, Kt, Lc, Kc;
  for (int i = 0; i < 6; ++i) {
    Lt.push_back(random_matrix(rng, 6, 2));
    Kt.push_back(random_matrix(rng, 6, 6));
    Lc.push_back(random_matrix(rng, 2, 2));
    Kc.push_back(random_matrix(rng, 2, 6));
  }
  const auto net = network_matrices(s.models, s.graph);
  Eigen::MatrixXd G(48, 48);
  G << block_diagonal(Lt), block_diagonal(Kt), block_diagonal(Lc), block_diagonal(Kc);
  const Eigen::MatrixXd want = net.Acal - G * net.Ccal;
  EXPECT_LT((closed_loop_error_matrix(s.models, s.graph, Lt, Kt, Lc, Kc) - want).norm(), 1e-12 * want.norm());
}

TEST(Synthesize, SmallNetworkVerifies) {
  const auto s = small_network();
  const auto sol = synthesize(s.models, s.graph, s.params);
  const auto rep = verify_solution(sol, s.models, s.graph, s.params);
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.abscissa, 0.0);
  for (const auto& n : sol.nodes) {
    EXPECT_LT((n.X * n.K_aug + n.M).norm(), 1e-8 * (1.0 + n.M.norm()));
    EXPECT_TRUE(n.Ltilde.isApprox(n.L_aug.topRows(2)));
    EXPECT_TRUE(n.Lcheck.isApprox(n.L_aug.bottomRows(2)));
    EXPECT_TRUE(n.Lbar.isApprox(n.Ltilde - n.L));
    EXPECT_TRUE(n.Kbar.isApprox(n.Ktilde - n.K));
  }
  EXPECT_DOUBLE_EQ(sol.rho, dissipation_rate(s.params.alpha, s.params.pi, degrees(s.graph).out));
}

TEST(Synthesize, MixedTrackerDimensions) {
  // node 2 carries no attack channel, so its X is 2x2 while node 1's is 4x4
  auto s = small_network();
  s.models.nodes[1].attack.F = Eigen::MatrixXd(2, 0);
  s.models.nodes[1].tracker = safe_tracker();
  s.params = default_params(s.models, s.graph, 1.0, 0.5);
  const auto data = lmi_node_data(s.models, s.graph, s.params);
  VariableLayout layout({4, 2}, 2);
  std::mt19937_64 rng(33);
  Eigen::VectorXd v = fixture::random_vector(rng, layout.size());
  layout.set_x(v, 0, random_spd(rng, 4));
  layout.set_x(v, 1, random_spd(rng, 2));
  for (int i = 0; i < 2; ++i) {
    const auto& d = data[static_cast<std::size_t>(i)];
    const auto direct = lmi_matrix(d, layout.x_of(v, i), layout.m_of(v, i), {layout.x_of(v, 1 - i)});
    EXPECT_EQ(direct.rows(), d.aug.A.rows() + d.aug.B1.cols() + d.aug.B2.cols() + layout.x_dim(1 - i));
    EXPECT_LT((direct - eval(assemble_lmi(d, i, layout), v)).norm(), 1e-10 * (1.0 + direct.norm()));
  }
  const auto sol = synthesize(s.models, s.graph, s.params);
  EXPECT_TRUE(verify_solution(sol, s.models, s.graph, s.params).passed());
  EXPECT_EQ(sol.nodes[0].X.rows(), 4);
  EXPECT_EQ(sol.nodes[1].X.rows(), 2);
}

TEST(Synthesize, PaperExampleVerifies) {
  const auto& s = fixture::paper();
  const auto& sol = fixture::paper_solution();
  const auto rep = verify_solution(sol, s.models, s.graph, s.params);
  EXPECT_TRUE(rep.passed());
  for (double l : rep.lmi_lambda_max) EXPECT_LE(l, -1e-8);
  for (double l : rep.x_lambda_min) EXPECT_GE(l, 1e-8);
  // the weights stored with the gains absorb the rho X shift
  for (std::size_t i = 0; i < 6; ++i) {
    const double shift = sol.rho * lambda_extremes(sol.nodes[i].X).lambda_min;
    EXPECT_TRUE(sol.nodes[i].Qbar.isApprox(s.params.Qtilde[i] + shift * Eigen::MatrixXd::Identity(6, 6)));
  }
}

TEST(Synthesize, InjectionRateBoundHolds) {
  const auto& s = fixture::paper();
  const auto& sol = fixture::paper_solution();
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& n = sol.nodes[i];
    const auto aug = augment(s.models.plant, s.models.nodes[i].sensor, s.models.nodes[i].tracker,
                             s.models.nodes[i].attack, s.models.consensus);
    const Eigen::MatrixXd rate = s.params.gamma_sq * n.X.inverse() * aug.C.transpose() * aug.E.inverse() * aug.C;
    Eigen::EigenSolver<Eigen::MatrixXd> es(rate, false);
    EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), *s.params.injection_rate_bound * (1.0 + 1e-9));
  }
}

TEST(Verify, DetectsCorruptedSolution) {
  const auto& s = fixture::paper();
  auto sol = fixture::paper_solution();
  sol.nodes[3].X = -sol.nodes[3].X;
  const auto rep = verify_solution(sol, s.models, s.graph, s.params);
  EXPECT_FALSE(rep.x_ok);
  EXPECT_FALSE(rep.passed());

  sol = fixture::paper_solution();
  sol.nodes[0].Lcheck *= 50.0;
  sol.nodes[0].L_aug.bottomRows(2) *= 50.0;
  EXPECT_FALSE(verify_solution(sol, s.models, s.graph, s.params).passed());
}

TEST(Synthesize, InfeasibleGammaRaises) {
  auto s = small_network();
  s.params.gamma_sq = 1e-6;
  s.params.budget = 3000;
  EXPECT_THROW(synthesize(s.models, s.graph, s.params), SynthesisError);
}

TEST(Spectral, AbscissaOfKnownMatrix) {
  Eigen::MatrixXd a(2, 2);
  a << -1, 5, 0, -3;
  EXPECT_DOUBLE_EQ(spectral_abscissa(a), -1.0);
}
