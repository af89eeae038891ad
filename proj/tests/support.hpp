#pragma once

#include "attackdet/scenario.hpp"
#include "attackdet/sdp.hpp"
#include "attackdet/synthesis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <limits>
#include <random>

namespace attackdet::fixture {

// Noise-free six-node example with its synthesized gains, computed once.
inline const Scenario& paper() {
  static const Scenario s = paper_scenario(0.0);
  return s;
}

inline const SynthesisSolution& paper_solution() {
  static const SynthesisSolution sol = synthesize(paper().models, paper().graph, paper().params);
  return sol;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  const Eigen::MatrixXd m = random_matrix(rng, n, n, scale);
  return (m + m.transpose()) / 2.0;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double floor = 0.1) {
  const Eigen::MatrixXd m = random_matrix(rng, n, n);
  return m * m.transpose() + floor * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace attackdet::fixture

namespace attackdet::fixture {

// Random problem with a known strictly feasible point v*: F_k(v*) <= -I.
struct PlantedProblem {
  FeasibilityProblem problem;
  Eigen::VectorXd interior;
};

inline PlantedProblem planted_feasible(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvars(1, 6), ncons(1, 3), dim(1, 5);
  PlantedProblem out;
  const int m = nvars(rng);
  out.interior = random_vector(rng, m, 2.0);
  out.problem.decision_length = m;
  const int c = ncons(rng);
  for (int k = 0; k < c; ++k) {
    const int d = dim(rng);
    AffineMatrixMap map;
    map.constant = -random_spd(rng, d, 1.0);
    for (int j = 0; j < m; ++j) {
      const Eigen::MatrixXd a = random_symmetric(rng, d);
      map.add_term(j, a);
      map.constant -= out.interior(j) * a;
    }
    out.problem.constraints.push_back(std::move(map));
  }
  out.problem.margin = 1e-6;
  return out;
}

// a1 + s1 v0 <= 0 and a2 - s2 v0 <= 0 with a, s > 0 cannot both hold; extra
// variables and a benign matrix block ride along.
inline FeasibilityProblem contradictory(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  FeasibilityProblem p;
  p.decision_length = 3;
  auto scalar = [](double c) {
    AffineMatrixMap m;
    m.constant = Eigen::MatrixXd::Constant(1, 1, c);
    return m;
  };
  auto f1 = scalar(pos(rng));
  f1.add_term(0, Eigen::MatrixXd::Constant(1, 1, pos(rng)));
  auto f2 = scalar(pos(rng));
  f2.add_term(0, Eigen::MatrixXd::Constant(1, 1, -pos(rng)));
  AffineMatrixMap f3;
  f3.constant = -random_spd(rng, 2, 1.0);
  f3.add_term(1, random_symmetric(rng, 2));
  f3.add_term(2, random_symmetric(rng, 2));
  p.constraints = {f1, f2, f3};
  p.margin = 1e-6;
  p.budget = 5000;
  return p;
}

// lambda_max recomputed from scratch, independent of the solver's certificate.
inline double worst_lambda_max(const FeasibilityProblem& p, const Eigen::VectorXd& v) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : p.constraints) {
    Eigen::MatrixXd f = c.constant;
    for (const auto& t : c.terms) f += v(t.variable) * Eigen::MatrixXd(t.matrix);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return worst;
}

}  // namespace attackdet::fixture

namespace attackdet::fixture {

// Small network with integer data, so that eigenvalue coincidences and rank
// deficiencies occur often. Tracker realizations do not need a Hurwitz loop
// for detectability analysis.
struct SmallNetwork {
  ModelSet models;
  DirectedGraph graph{1, {}};
};

inline SmallNetwork random_small_network(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_n(1, 3), pick_N(1, 3), entry(-1, 2), coin(0, 1), eig(-1, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto int_matrix = [&](Eigen::Index r, Eigen::Index c, double density) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j)
        if (u(rng) < density) m(i, j) = entry(rng);
    return m;
  };
  SmallNetwork out;
  const int n = pick_n(rng), N = pick_N(rng);
  out.models.plant.A = int_matrix(n, n, 0.5);
  out.models.plant.B = Eigen::MatrixXd::Identity(n, n);
  out.models.consensus.H = int_matrix(std::uniform_int_distribution<int>(0, n)(rng), n, 0.6);
  for (int i = 0; i < N; ++i) {
    NodeModel node;
    const int r = std::uniform_int_distribution<int>(1, n)(rng);
    node.sensor.C = int_matrix(r, n, 0.4);
    node.sensor.D = Eigen::MatrixXd::Zero(r, n);
    node.sensor.Dbar = Eigen::MatrixXd::Identity(r, r);
    if (coin(rng)) {
      node.attack.F = int_matrix(n, 1, 0.7);
      if (coin(rng)) {
        node.tracker = build_tracker(0.5 + u(rng), 1.0, 1);
      } else {
        const double s = eig(rng);  // may coincide with an eigenvalue of A
        node.tracker.Omega = Eigen::MatrixXd::Constant(1, 1, s);
        node.tracker.Gamma = Eigen::MatrixXd::Constant(1, 1, -1.0);
        node.tracker.Upsilon = Eigen::MatrixXd::Constant(1, 1, 1.0);
      }
    } else {
      node.attack.F = Eigen::MatrixXd(n, 0);
      node.tracker = safe_tracker();
    }
    out.models.nodes.push_back(node);
  }
  std::vector<DirectedGraph::Edge> edges;
  for (int a = 1; a <= N; ++a)
    for (int b = 1; b <= N; ++b)
      if (a != b && u(rng) < 0.5) edges.push_back({a, b});
  out.graph = DirectedGraph(N, edges);
  return out;
}

}  // namespace attackdet::fixture
