#include "attackdet/model.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>
#include <stdexcept>

namespace attackdet {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::string dims(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

TrackerModel build_tracker(double beta, double d, int attack_dim) {
  if (!(beta > 0.0)) throw std::invalid_argument("tracker: beta must be positive");
  if (!(d > 0.0)) throw std::invalid_argument("tracker: d must be positive");
  if (attack_dim <= 0) throw std::invalid_argument("tracker: attack dimension must be positive");
  const Eigen::Index k = attack_dim;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  TrackerModel t;
  t.Omega = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  t.Omega.topRightCorner(k, k) = id;
  t.Omega.bottomRightCorner(k, k) = -2.0 * beta * id;
  t.Gamma = Eigen::MatrixXd::Zero(2 * k, k);
  t.Gamma.bottomRows(k) = -d * id;
  t.Upsilon = Eigen::MatrixXd::Zero(k, 2 * k);
  t.Upsilon.leftCols(k) = id;
  return t;
}

TrackerModel safe_tracker() {
  return TrackerModel{Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0)};
}

Eigen::MatrixXd tracker_closed_loop(const TrackerModel& tracker) {
  return tracker.Omega + tracker.Gamma * tracker.Upsilon;
}

AugmentedNodeMatrices augment(const PlantModel& plant, const SensorModel& sensor,
                              const TrackerModel& tracker, const AttackEntry& attack,
                              const ConsensusModel& consensus) {
  const Eigen::Index n = plant.n();
  const Eigen::Index m = plant.m();
  const Eigen::Index mi = sensor.Dbar.cols();
  const Eigen::Index r = sensor.C.rows();
  const Eigen::Index h = consensus.H.rows();
  const Eigen::Index k = tracker.dim();
  const Eigen::Index nf = attack.F.cols();

  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("augment: " + what);
  };
  require(plant.A.cols() == n && plant.B.rows() == n, "plant A must be square and B must have n rows");
  require(sensor.C.cols() == n, "C has " + std::to_string(sensor.C.cols()) + " columns, expected n");
  require(sensor.D.rows() == r && sensor.D.cols() == m, "D must be r_i x m");
  require(sensor.Dbar.rows() == r, "Dbar must have r_i rows");
  require(consensus.H.cols() == n, "H must have n columns");
  require(attack.F.rows() == n, "F must have n rows");
  require(tracker.Omega.cols() == k && tracker.Gamma.rows() == k && tracker.Upsilon.cols() == k,
          "tracker matrices have inconsistent state dimension");
  require(tracker.Upsilon.rows() == nf && tracker.Gamma.cols() == nf,
          "tracker input/output dimension must equal the attack dimension");

  AugmentedNodeMatrices out;
  out.A = Eigen::MatrixXd::Zero(n + k, n + k);
  out.A.topLeftCorner(n, n) = plant.A;
  if (k > 0) {
    out.A.topRightCorner(n, k) = -attack.F * tracker.Upsilon;
    out.A.bottomRightCorner(k, k) = tracker.Omega;
  }
  out.B1 = Eigen::MatrixXd::Zero(n + k, nf);
  if (nf > 0) {
    out.B1.topRows(n) = attack.F;
    out.B1.bottomRows(k) = tracker.Gamma;
  }
  out.B2 = Eigen::MatrixXd::Zero(n + k, m + mi);
  out.B2.topLeftCorner(n, m) = -plant.B;
  out.D.resize(r, m + mi);
  out.D << sensor.D, sensor.Dbar;
  out.C = Eigen::MatrixXd::Zero(r, n + k);
  out.C.leftCols(n) = sensor.C;
  out.H = Eigen::MatrixXd::Zero(h, n + k);
  out.H.leftCols(n) = consensus.H;
  out.E = out.D * out.D.transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(out.E);
  require(r > 0 && llt.info() == Eigen::Success,
          "E_i = D D' + Dbar Dbar' is not positive definite");
  return out;
}

std::string to_string(const Violation& v) {
  std::ostringstream os;
  if (v.node > 0) os << "node " << v.node << ": ";
  os << v.matrix << ": " << v.check;
  return os.str();
}

std::vector<Violation> validate(const ModelSet& models) {
  std::vector<Violation> out;
  const auto& A = models.plant.A;
  const auto& B = models.plant.B;
  const Eigen::Index n = A.rows();
  if (A.cols() != n) out.push_back({0, "A", "not square (" + dims(A) + ")"});
  if (B.rows() != n) out.push_back({0, "B", "row count " + std::to_string(B.rows()) + " != n"});
  if (!all_finite(A) || !all_finite(B)) out.push_back({0, "A/B", "non-finite entries"});
  if (models.consensus.H.cols() != n)
    out.push_back({0, "H", "column count " + std::to_string(models.consensus.H.cols()) + " != n"});
  if (models.nodes.empty()) out.push_back({0, "nodes", "no nodes declared"});

  for (std::size_t idx = 0; idx < models.nodes.size(); ++idx) {
    const int node = static_cast<int>(idx) + 1;
    const auto& s = models.nodes[idx].sensor;
    const auto& F = models.nodes[idx].attack.F;
    const auto& t = models.nodes[idx].tracker;
    bool dims_ok = true;
    auto fail = [&](const std::string& mat, const std::string& check) {
      out.push_back({node, mat, check});
      dims_ok = false;
    };
    if (s.C.cols() != n) fail("C", "column count " + std::to_string(s.C.cols()) + " != n");
    if (s.D.rows() != s.C.rows() || s.D.cols() != B.cols())
      fail("D", "expected " + std::to_string(s.C.rows()) + "x" + std::to_string(B.cols()) + ", got " + dims(s.D));
    if (s.Dbar.rows() != s.C.rows()) fail("Dbar", "row count must match C");
    if (F.rows() != n) fail("F", "row count " + std::to_string(F.rows()) + " != n");
    if (t.Omega.rows() != t.Omega.cols()) fail("Omega", "not square");
    if (t.Gamma.rows() != t.Omega.rows() || t.Upsilon.cols() != t.Omega.rows())
      fail("tracker", "Gamma rows / Upsilon columns must equal dim Omega");
    if (t.Upsilon.rows() != F.cols() || t.Gamma.cols() != F.cols())
      fail("tracker", "Upsilon rows and Gamma columns must equal n_f = " + std::to_string(F.cols()));
    if (!all_finite(s.C) || !all_finite(s.D) || !all_finite(s.Dbar) || !all_finite(F) ||
        !all_finite(t.Omega) || !all_finite(t.Gamma) || !all_finite(t.Upsilon))
      fail("node", "non-finite entries");
    if (!dims_ok) continue;

    const Eigen::MatrixXd E = s.D * s.D.transpose() + s.Dbar * s.Dbar.transpose();
    if (E.rows() == 0) {
      out.push_back({node, "E_i", "node has no measurements; E_i = D D' + Dbar Dbar' must be positive definite"});
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() <= 1e-14 * std::max(1.0, es.eigenvalues().maxCoeff()))
        out.push_back({node, "E_i", "D D' + Dbar Dbar' is not positive definite"});
    }
    if (t.dim() > 0) {
      Eigen::EigenSolver<Eigen::MatrixXd> es(tracker_closed_loop(t), false);
      if (es.eigenvalues().real().maxCoeff() >= 0.0)
        out.push_back({node, "tracker", "input tracking loop Omega + Gamma Upsilon is not Hurwitz"});
    }
  }
  return out;
}

ModelSet without_attacks(const ModelSet& models) {
  ModelSet out = models;
  for (auto& node : out.nodes) {
    node.attack.F = Eigen::MatrixXd(models.n(), 0);
    node.tracker = safe_tracker();
  }
  return out;
}

}  // namespace attackdet
