#pragma once

#include "attackdet/graph.hpp"
#include "attackdet/model.hpp"
#include "attackdet/signals.hpp"
#include "attackdet/synthesis.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace attackdet {

struct NodeDetectorGains {
  Eigen::MatrixXd L, K;            // attacked observer
  Eigen::MatrixXd Lbar, Kbar;      // detector, e-hat equation
  Eigen::MatrixXd Lcheck, Kcheck;  // detector, eps-hat equation
};

using DetectorGains = std::vector<NodeDetectorGains>;

DetectorGains detector_gains(const SynthesisSolution& solution);

struct SimulationConfig {
  double dt = 1e-3;
  double horizon = 20.0;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> x0;  // drawn N(0, x0_scale^2) per component when absent
  double x0_scale = 1.0;
  double process_noise = 0.0;              // intensity of xi
  std::vector<double> measurement_noise;   // intensity of xi_i per node; empty means zero
  std::optional<double> noise_cutoff;      // defaults to the horizon
  std::vector<AttackSignal> attacks;       // per node; empty means no attack
  int output_stride = 10;
};

/// Offsets of x, xhat_i, ehat_i, epshat_i in the flat state vector.
class StateLayout {
 public:
  StateLayout() = default;
  explicit StateLayout(const ModelSet& models);

  Eigen::Index size() const { return size_; }
  Eigen::Index n() const { return n_; }
  int node_count() const { return static_cast<int>(eps_dim_.size()); }

  Eigen::Index x() const { return 0; }
  Eigen::Index xhat(int i) const { return n_ * (1 + i); }
  Eigen::Index ehat(int i) const { return n_ * (1 + node_count() + i); }
  Eigen::Index epshat(int i) const { return eps_offset_[static_cast<std::size_t>(i)]; }
  Eigen::Index eps_dim(int i) const { return eps_dim_[static_cast<std::size_t>(i)]; }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index size_ = 0;
  std::vector<Eigen::Index> eps_offset_;
  std::vector<Eigen::Index> eps_dim_;
};

/// Inputs held during one evaluation of the right-hand side.
struct Inputs {
  Eigen::VectorXd xi;                   // process disturbance
  std::vector<Eigen::VectorXd> xi_node; // measurement disturbance per node
  std::vector<Eigen::VectorXd> f;       // attack per node
};

Inputs zero_inputs(const ModelSet& models);

/// Plant, attacked observer network and detector network with fixed gains.
class NetworkSystem {
 public:
  NetworkSystem(ModelSet models, DirectedGraph graph, DetectorGains gains);

  const ModelSet& models() const { return models_; }
  const DirectedGraph& graph() const { return graph_; }
  const DetectorGains& gains() const { return gains_; }
  const StateLayout& layout() const { return layout_; }
  const std::vector<int>& neighbors(int i) const { return neighbors_[static_cast<std::size_t>(i)]; }

  /// Exact right-hand side:
  ///   x'      = A x + B xi
  ///   xhat_i' = A xhat_i + L_i zeta_i + K_i zetabar_i + F_i f_i
  ///   ehat_i' = (A - L_i C_i) ehat_i + K_i sum H (ehat_j - ehat_i) - F_i Ups_i epshat_i
  ///             + Lbar_i (zeta_i - C_i ehat_i) + Kbar_i (zetabar_i + sum H (ehat_j - ehat_i))
  ///   epshat' = Omega_i epshat_i + Lcheck_i (zeta_i - C_i ehat_i)
  ///             + Kcheck_i (zetabar_i + sum H (ehat_j - ehat_i))
  Eigen::VectorXd derivative(const Eigen::VectorXd& state, const Inputs& in) const;

  /// zeta_i = y_i - C_i xhat_i
  Eigen::VectorXd zeta(const Eigen::VectorXd& state, const Inputs& in, int i) const;
  /// zetabar_i = sum_{j in V_i} H (xhat_j - xhat_i)
  Eigen::VectorXd zetabar(const Eigen::VectorXd& state, int i) const;

 private:
  ModelSet models_;
  DirectedGraph graph_;
  DetectorGains gains_;
  StateLayout layout_;
  std::vector<std::vector<int>> neighbors_;  // 0-based
};

/// Free-function form of NetworkSystem::derivative.
Eigen::VectorXd derivative(const NetworkSystem& system, const Eigen::VectorXd& state, const Inputs& in);

struct Sample {
  double t = 0.0;
  std::int64_t step = 0;
  Eigen::VectorXd state;
  Inputs inputs;                         // noise held over [t, t + dt), attack f(t)
  std::vector<Eigen::VectorXd> residual; // Ups_i epshat_i
  std::vector<Eigen::VectorXd> corrected;// xhat_i + ehat_i
  std::vector<Eigen::VectorXd> zeta;
  std::vector<Eigen::VectorXd> zetabar;
  Eigen::VectorXd disturbance_energy;    // per node, int_0^t |xi|^2 + |xi_i|^2
};

struct Trajectory {
  StateLayout layout;
  double dt = 0.0;
  int output_stride = 1;
  Eigen::VectorXd x0;
  std::vector<Sample> samples;

  Eigen::VectorXd x(std::size_t k) const { return samples[k].state.segment(layout.x(), layout.n()); }
  Eigen::VectorXd xhat(std::size_t k, int i) const { return samples[k].state.segment(layout.xhat(i), layout.n()); }
  Eigen::VectorXd ehat(std::size_t k, int i) const { return samples[k].state.segment(layout.ehat(i), layout.n()); }
  Eigen::VectorXd epshat(std::size_t k, int i) const {
    return samples[k].state.segment(layout.epshat(i), layout.eps_dim(i));
  }
  /// x - xhat_i
  Eigen::VectorXd estimation_error(std::size_t k, int i) const { return x(k) - xhat(k, i); }
  /// x - (xhat_i + ehat_i)
  Eigen::VectorXd corrected_error(std::size_t k, int i) const { return x(k) - samples[k].corrected[static_cast<std::size_t>(i)]; }
};

class SimulationDiverged : public std::runtime_error {
 public:
  explicit SimulationDiverged(double t)
      : std::runtime_error("simulation diverged at t = " + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Throws std::invalid_argument for an inconsistent configuration.
void check_config(const SimulationConfig& config, const ModelSet& models);

/// Initial plant state used by `run` for this configuration.
Eigen::VectorXd initial_state(const SimulationConfig& config, Eigen::Index n);

/// Classical RK4 with noise frozen per step and attack switching resolved on
/// the grid. Observer and detector states start at zero.
Trajectory run(const SimulationConfig& config, const NetworkSystem& system);

// ---------------------------------------------------------------------------
// Verification harness. These functions read ground truth that the detector
// never sees.

/// Tracker state eps_i driven by the true attack, eps' = (Omega + Gamma Ups) eps - Gamma f,
/// co-simulated on the trajectory grid. Zero at nodes without an attack.
struct TrackerTruth {
  std::vector<std::vector<Eigen::VectorXd>> eps;  // [sample][node]
  std::vector<std::vector<Eigen::VectorXd>> nu;   // Ups eps - f
};

TrackerTruth simulate_tracker_truth(const SimulationConfig& config, const ModelSet& models, const Trajectory& traj);

/// Right-hand side of the augmented node error mu_i = [z_i; delta_i]:
/// (A_i - L C) mu_i + sum_j K H (mu_j - mu_i) + B1 nu - (B2 + L D) w.
Eigen::VectorXd augmented_error_derivative(const AugmentedNodeMatrices& aug, const Eigen::MatrixXd& L_aug,
                                           const Eigen::MatrixXd& K_aug, const Eigen::VectorXd& mu,
                                           const std::vector<Eigen::VectorXd>& neighbor_mu,
                                           const Eigen::VectorXd& nu, const Eigen::VectorXd& w);

struct DissipationTerms {
  double value;  // lhs - rhs of the dissipation inequality
  double scale;  // sum of magnitudes of all terms
};

/// V' + 2 alpha V + mu' Q mu - sum_j pi_j V_j - g2 (|w|^2 + |nu|^2) with V = mu' X mu.
DissipationTerms dissipation_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_dot,
                                   const Eigen::MatrixXd& X, double alpha, const Eigen::MatrixXd& Q,
                                   const std::vector<Eigen::VectorXd>& neighbor_mu,
                                   const std::vector<Eigen::MatrixXd>& neighbor_X,
                                   const std::vector<double>& neighbor_pi, double gamma_sq,
                                   const Eigen::VectorXd& w, const Eigen::VectorXd& nu);

struct DissipationReport {
  std::vector<double> max_violation;  // per node, max over samples of (lhs - rhs)
  double worst_violation = -std::numeric_limits<double>::infinity();
  double energy_scale = 0.0;          // max over samples and nodes of DissipationTerms::scale
  /// worst_violation / energy_scale, or worst_violation when the scale is zero.
  double relative() const { return energy_scale > 0.0 ? worst_violation / energy_scale : worst_violation; }
};

/// Evaluates the dissipation inequality at trajectory samples (all samples
/// when `sample_indices` is empty), with mu' from the simulator's own
/// right-hand side.
DissipationReport dissipation_residuals(const Trajectory& traj, const TrackerTruth& truth,
                                        const SynthesisSolution& solution, const NetworkSystem& system,
                                        const SynthesisParams& params,
                                        const std::vector<std::size_t>& sample_indices = {});

/// int sum (delta' Q delta + z' Qbar z) / (x0' P x0 + sum |w_i|_2^2).
/// nullopt when the denominator vanishes.
std::optional<double> hinf_ratio(const Trajectory& traj, const TrackerTruth& truth, const Eigen::MatrixXd& P,
                                 const std::vector<Eigen::MatrixXd>& Q, const std::vector<Eigen::MatrixXd>& Qbar);

struct TrackingMetrics {
  double tail_error;  // sup |r_i - f_i| over the last 10% of the horizon
  double l2_energy;   // int |r_i - f_i|^2 dt
};

std::vector<TrackingMetrics> tracking_report(const Trajectory& traj, const std::vector<AttackSignal>& attacks);

/// int_{t0}^{t1} |r_i - f_i|^2 dt (trapezoid on the sample grid).
double tracking_energy(const Trajectory& traj, const std::vector<AttackSignal>& attacks, int node, double t0, double t1);

}  // namespace attackdet
