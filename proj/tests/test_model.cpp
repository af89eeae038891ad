#include "attackdet/model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace attackdet;

TEST(Tracker, CanonicalRealization) {
  const auto t = build_tracker(10.0, 1.0, 2);
  ASSERT_EQ(t.dim(), 4);
  ASSERT_EQ(t.attack_dim(), 2);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(4, 4);
  omega.topRightCorner(2, 2).setIdentity();
  omega.bottomRightCorner(2, 2) = -20.0 * Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(t.Omega, omega);
  EXPECT_EQ(t.Gamma.topRows(2), Eigen::MatrixXd::Zero(2, 2));
  EXPECT_EQ(t.Gamma.bottomRows(2), -Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(t.Upsilon.leftCols(2), Eigen::MatrixXd::Identity(2, 2));
}

// s^2 + 20 s + 1 = 0
TEST(Tracker, ClosedLoopRoots) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(tracker_closed_loop(build_tracker(10.0, 1.0, 1)), false);
  std::vector<double> re{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], -10.0 - std::sqrt(99.0), 1e-12);
  EXPECT_NEAR(re[1], -10.0 + std::sqrt(99.0), 1e-12);
  EXPECT_NEAR(re[0], -19.9499, 1e-4);
  EXPECT_NEAR(re[1], -0.0501, 1e-4);
  EXPECT_EQ(es.eigenvalues()(0).imag(), 0.0);
}

TEST(Tracker, SafeTrackerIsEmpty) {
  const auto t = safe_tracker();
  EXPECT_EQ(t.dim(), 0);
  EXPECT_EQ(t.attack_dim(), 0);
}

TEST(Augment, BlockStructure) {
  std::mt19937_64 rng(3);
  PlantModel plant{fixture::random_matrix(rng, 3, 3), fixture::random_matrix(rng, 3, 2)};
  SensorModel sensor{fixture::random_matrix(rng, 2, 3), fixture::random_matrix(rng, 2, 2),
                     0.1 * Eigen::MatrixXd::Identity(2, 2)};
  ConsensusModel cons{fixture::random_matrix(rng, 1, 3)};
  AttackEntry att{fixture::random_matrix(rng, 3, 1)};
  const auto tr = build_tracker(2.0, 3.0, 1);
  const auto aug = augment(plant, sensor, tr, att, cons);

  EXPECT_EQ(aug.A.topLeftCorner(3, 3), plant.A);
  EXPECT_EQ(aug.A.topRightCorner(3, 2), -att.F * tr.Upsilon);
  EXPECT_EQ(aug.A.bottomLeftCorner(2, 3), Eigen::MatrixXd::Zero(2, 3));
  EXPECT_EQ(aug.A.bottomRightCorner(2, 2), tr.Omega);
  EXPECT_EQ(aug.B1.topRows(3), att.F);
  EXPECT_EQ(aug.B1.bottomRows(2), tr.Gamma);
  EXPECT_EQ(aug.B2.topLeftCorner(3, 2), -plant.B);
  EXPECT_TRUE(aug.B2.rightCols(2).isZero());
  EXPECT_TRUE(aug.B2.bottomRows(2).isZero());
  EXPECT_EQ(aug.D.leftCols(2), sensor.D);
  EXPECT_EQ(aug.D.rightCols(2), sensor.Dbar);
  EXPECT_EQ(aug.C.leftCols(3), sensor.C);
  EXPECT_TRUE(aug.C.rightCols(2).isZero());
  EXPECT_EQ(aug.H.leftCols(3), cons.H);
  EXPECT_TRUE(aug.E.isApprox(sensor.D * sensor.D.transpose() + sensor.Dbar * sensor.Dbar.transpose()));
}

TEST(Augment, RejectsSingularNoiseCovariance) {
  PlantModel plant{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  SensorModel sensor{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 1)};
  ConsensusModel cons{Eigen::MatrixXd::Identity(2, 2)};
  AttackEntry att{Eigen::MatrixXd(2, 0)};
  EXPECT_THROW(augment(plant, sensor, safe_tracker(), att, cons), std::invalid_argument);
}

TEST(Validate, PaperExampleIsClean) { EXPECT_TRUE(validate(fixture::paper().models).empty()); }

TEST(Validate, NoMeasurementNoiseNamesTheCovariance) {
  auto m = fixture::paper().models;
  m.nodes[2].sensor.Dbar.setZero();
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].node, 3);
  EXPECT_EQ(v[0].matrix, "E_i");
  EXPECT_NE(to_string(v[0]).find("positive definite"), std::string::npos);
}

TEST(Validate, DimensionErrors) {
  auto m = fixture::paper().models;
  m.nodes[0].sensor.C = Eigen::MatrixXd::Zero(2, 5);
  m.nodes[1].attack.F = Eigen::MatrixXd::Ones(6, 2);
  const auto v = validate(m);
  ASSERT_GE(v.size(), 2u);
  EXPECT_EQ(v[0].node, 1);
  EXPECT_EQ(v[0].matrix, "C");
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.node == 2 && x.matrix == "tracker"; }));
}

TEST(Validate, UnstableTrackingLoop) {
  auto m = fixture::paper().models;
  m.nodes[4].tracker.Gamma *= -1.0;
  const auto v = validate(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].node, 5);
  EXPECT_EQ(v[0].matrix, "tracker");
}

TEST(Validate, WithoutAttacksDeclaresEveryNodeSafe) {
  const auto m = without_attacks(fixture::paper().models);
  EXPECT_TRUE(validate(m).empty());
  for (const auto& node : m.nodes) {
    EXPECT_EQ(node.attack.F.cols(), 0);
    EXPECT_EQ(node.attack.F.rows(), 6);
    EXPECT_EQ(node.tracker.dim(), 0);
  }
}
