#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace attackdet {

/// x' = A x + B xi
struct PlantModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

/// y_i = C x + D xi + Dbar xi_i
struct SensorModel {
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;
  Eigen::MatrixXd Dbar;
};

/// Shared information matrix; node i receives H xhat_j from its in-neighbours.
struct ConsensusModel {
  Eigen::MatrixXd H;
};

/// Attack entry F (n x n_f). n_f = 0 declares the node safe.
struct AttackEntry {
  Eigen::MatrixXd F;
};

/// Realization eps' = Omega eps + Gamma nu, fhat = Upsilon eps of the input
/// tracking loop. All three are empty for a safe node.
struct TrackerModel {
  Eigen::MatrixXd Omega;
  Eigen::MatrixXd Gamma;
  Eigen::MatrixXd Upsilon;

  Eigen::Index dim() const { return Omega.rows(); }
  Eigen::Index attack_dim() const { return Upsilon.rows(); }
};

struct NodeModel {
  SensorModel sensor;
  AttackEntry attack;
  TrackerModel tracker;
};

struct ModelSet {
  PlantModel plant;
  ConsensusModel consensus;
  std::vector<NodeModel> nodes;

  Eigen::Index n() const { return plant.n(); }
  int node_count() const { return static_cast<int>(nodes.size()); }
};

/// Per-node matrices of the augmented error system mu_i = [z_i; delta_i].
struct AugmentedNodeMatrices {
  Eigen::MatrixXd A;   // [A  -F Upsilon; 0 Omega]
  Eigen::MatrixXd B1;  // [F; Gamma]
  Eigen::MatrixXd B2;  // [-B 0; 0 0]
  Eigen::MatrixXd D;   // [D Dbar]
  Eigen::MatrixXd C;   // [C 0]
  Eigen::MatrixXd H;   // [H 0]
  Eigen::MatrixXd E;   // D D'
};

/// Canonical tracker for G(s) = d/(s + 2 beta) I with n_f attack channels:
/// Omega = [0 I; 0 -2 beta I], Gamma = [0; -d I], Upsilon = [I 0].
TrackerModel build_tracker(double beta, double d, int attack_dim);

/// Empty tracker and n x 0 attack entry (safe node).
TrackerModel safe_tracker();

/// Omega + Gamma Upsilon: dynamics of eps when driven by the attack, i.e.
/// eps' = (Omega + Gamma Upsilon) eps - Gamma f.
Eigen::MatrixXd tracker_closed_loop(const TrackerModel& tracker);

/// Throws std::invalid_argument on dimension mismatch or when E is not
/// positive definite.
AugmentedNodeMatrices augment(const PlantModel& plant, const SensorModel& sensor,
                              const TrackerModel& tracker, const AttackEntry& attack,
                              const ConsensusModel& consensus);

struct Violation {
  int node;  // 1-based; 0 for network-wide matrices
  std::string matrix;
  std::string check;
};

std::string to_string(const Violation& v);

/// Every failed invariant of the model set; empty when the set is usable.
std::vector<Violation> validate(const ModelSet& models);

/// Copy of the model set with every node declared safe (n_f = 0). Used for
/// the baseline observer design.
ModelSet without_attacks(const ModelSet& models);

}  // namespace attackdet
