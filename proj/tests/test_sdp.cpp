#include "attackdet/sdp.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace attackdet;
using fixture::random_matrix;
using fixture::random_spd;
using fixture::random_symmetric;

TEST(AffineMap, EvalSumsTerms) {
  AffineMatrixMap m;
  m.constant = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 2, 2, 0;
  b << 0, 0, 0, 3;
  m.add_term(0, a);
  m.add_term(4, b);
  m.add_term(2, Eigen::MatrixXd::Zero(2, 2));
  EXPECT_EQ(m.terms.size(), 2u);
  EXPECT_EQ(m.min_decision_length(), 5);
  Eigen::VectorXd v(5);
  v << 2, 9, 9, 9, -1;
  EXPECT_TRUE(eval(m, v).isApprox(Eigen::MatrixXd::Identity(2, 2) + 2 * a - b));
  EXPECT_THROW(eval(m, Eigen::VectorXd::Zero(4)), std::invalid_argument);
  EXPECT_THROW(m.add_term(0, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST(AffineMap, DenseTermsAreSymmetrized) {
  AffineMatrixMap m;
  m.constant = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd a(2, 2);
  a << 0, 4, 0, 0;
  m.add_term(0, a);
  const auto f = eval(m, Eigen::VectorXd::Ones(1));
  EXPECT_EQ(f(0, 1), 2.0);
  EXPECT_EQ(f(1, 0), 2.0);
}

// For a 3x3 symmetric S the extremes must be roots of det(S - l I), bound
// every Rayleigh quotient, and come with a unit eigenvector.
TEST(Spectral, ExtremesMatchCharacteristicPolynomial) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd s = random_symmetric(rng, 3, 2.0);
    const auto ex = lambda_extremes(s);
    const double scale = 1.0 + s.norm();
    for (double l : {ex.lambda_min, ex.lambda_max}) {
      const double det = (s - l * Eigen::MatrixXd::Identity(3, 3)).determinant();
      EXPECT_LT(std::abs(det), 1e-10 * scale * scale * scale);
    }
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd x = fixture::random_vector(rng, 3);
      const double q = x.dot(s * x) / x.squaredNorm();
      EXPECT_LE(q, ex.lambda_max + 1e-12 * scale);
      EXPECT_GE(q, ex.lambda_min - 1e-12 * scale);
    }
    EXPECT_NEAR(ex.top_vector.norm(), 1.0, 1e-12);
    EXPECT_LT((s * ex.top_vector - ex.lambda_max * ex.top_vector).norm(), 1e-12 * scale);
  }
}

TEST(Spectral, UsesSymmetricPart) {
  Eigen::MatrixXd s(2, 2);
  s << 0, 2, 0, 0;  // symmetric part [[0,1],[1,0]]
  const auto ex = lambda_extremes(s);
  EXPECT_NEAR(ex.lambda_max, 1.0, 1e-15);
  EXPECT_NEAR(ex.lambda_min, -1.0, 1e-15);
  EXPECT_THROW(lambda_extremes(Eigen::MatrixXd(2, 3)), std::invalid_argument);
  EXPECT_THROW(lambda_extremes(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  s(0, 0) = std::nan("");
  EXPECT_THROW(lambda_extremes(s), std::invalid_argument);
}

TEST(Spectral, WorksInLongDouble) {
  Eigen::Matrix<long double, 2, 2> s;
  s << 2, 1, 1, 2;
  const auto ex = lambda_extremes(s);
  EXPECT_NEAR(static_cast<double>(ex.lambda_max), 3.0, 1e-15);
  EXPECT_NEAR(static_cast<double>(ex.lambda_min), 1.0, 1e-15);
}

TEST(ProjectPsd, IdempotentAndPsd) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd s = random_matrix(rng, 5, 5);
    const Eigen::MatrixXd p = project_psd(s);
    EXPECT_TRUE(p.isApprox(p.transpose()));
    EXPECT_GE(lambda_extremes(p).lambda_min, -1e-12);
    EXPECT_LT((project_psd(p) - p).norm(), 1e-12 * (1.0 + p.norm()));
  }
  const Eigen::MatrixXd spd = random_spd(rng, 4);
  EXPECT_TRUE(project_psd(spd).isApprox(spd, 1e-12));
}

// No PSD matrix is closer in Frobenius norm than the projection.
TEST(ProjectPsd, NearestAgainstRandomCompetitors) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> step(0.0, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd s = random_symmetric(rng, 4, 2.0);
    const Eigen::MatrixXd p = project_psd(s);
    const double best = (s - p).norm();
    for (int k = 0; k < 2000; ++k) {
      // perturb the projection and re-project onto the cone, or draw a fresh PSD matrix
      const Eigen::MatrixXd y = (k % 2 == 0) ? project_psd(p + step(rng) * random_symmetric(rng, 4))
                                             : [&] { const Eigen::MatrixXd g = random_matrix(rng, 4, 2); return Eigen::MatrixXd(g * g.transpose()); }();
      EXPECT_GE((s - y).norm(), best - 1e-12);
    }
  }
}

TEST(Solver, FindsPlantedFeasiblePoints) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 15; ++trial) {
    const auto planted = fixture::planted_feasible(rng);
    const auto res = solve_feasibility(planted.problem);
    ASSERT_EQ(res.status, FeasibilityStatus::feasible) << "trial " << trial << " merit " << res.merit;
    EXPECT_LE(fixture::worst_lambda_max(planted.problem, res.point), -planted.problem.margin);
    EXPECT_NEAR(res.merit, res.certificate.maxCoeff(), 0.0);
  }
}

TEST(Solver, KnownInteriorStart) {
  std::mt19937_64 rng(99);
  const auto planted = fixture::planted_feasible(rng);
  const auto res = solve_feasibility(planted.problem, planted.interior);
  EXPECT_EQ(res.status, FeasibilityStatus::feasible);
}

TEST(Solver, ReportsContradictoryConstraints) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = fixture::contradictory(rng);
    const auto res = solve_feasibility(p);
    EXPECT_EQ(res.status, FeasibilityStatus::not_found_within_budget);
    EXPECT_GT(res.merit, 0.0);
    EXPECT_LE(res.iterations, p.budget);
  }
}

TEST(Solver, Deterministic) {
  std::mt19937_64 rng(31);
  const auto planted = fixture::planted_feasible(rng);
  const auto a = solve_feasibility(planted.problem);
  const auto b = solve_feasibility(planted.problem);
  EXPECT_EQ(a.point, b.point);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solver, IterateLogIsCsv) {
  std::mt19937_64 rng(4);
  const auto planted = fixture::planted_feasible(rng);
  std::ostringstream os;
  const auto res = solve_feasibility(planted.problem, std::nullopt, IterateCsvWriter(os));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,merit,step,smoothing");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_GT(rows, 0);
  EXPECT_LE(rows, res.iterations + 1);
}

TEST(Solver, DefaultMarginScalesWithConstants) {
  AffineMatrixMap m;
  m.constant = Eigen::MatrixXd::Identity(2, 2) * -300.0;
  EXPECT_NEAR(default_margin({m}), 1e-6 * 301.0, 1e-15);
}
