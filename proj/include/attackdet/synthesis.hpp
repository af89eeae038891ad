#pragma once

#include "attackdet/graph.hpp"
#include "attackdet/model.hpp"
#include "attackdet/sdp.hpp"

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace attackdet {

struct SynthesisParams {
  double gamma_sq = 0.5;
  std::vector<double> alpha;               // per node, > 0
  std::vector<double> pi;                  // per node, 0 < pi_i < 2 alpha_i / q_i
  std::vector<Eigen::MatrixXd> Qtilde;     // per node, n x n, weights z
  std::vector<Eigen::MatrixXd> Qcheck;     // per node, dim Omega square, weights delta
  std::optional<double> margin;            // default_margin() when absent
  /// Caps the spectral radius of gamma^2 X_i^-1 C_i' E_i^-1 C_i, the fastest
  /// output-injection rate of the recovered gains. Unbounded when absent.
  std::optional<double> injection_rate_bound;
  double tolerance = 1e-8;
  long budget = 200000;
  bool weights_defaulted = false;          // set by with_default_weights
};

/// Uniform alpha, pi from default_pi and 1e-3 I weights.
SynthesisParams default_params(const ModelSet& models, const DirectedGraph& g, double gamma_sq, double alpha);

/// pi_i = 2 alpha_i / (q_i + 1)
std::vector<double> default_pi(const std::vector<double>& alpha, const Eigen::VectorXi& out_degrees);

/// rho = min_i (2 alpha_i - q_i pi_i)
double dissipation_rate(const std::vector<double>& alpha, const std::vector<double>& pi,
                        const Eigen::VectorXi& out_degrees);

/// Index bookkeeping for the global decision vector: all X blocks first
/// (node order, row-major upper triangle), then all M blocks (row-major).
class VariableLayout {
 public:
  VariableLayout(std::vector<Eigen::Index> x_dims, Eigen::Index h);

  Eigen::Index size() const { return total_; }
  int node_count() const { return static_cast<int>(x_dims_.size()); }
  Eigen::Index x_dim(int node) const { return x_dims_[static_cast<std::size_t>(node)]; }
  Eigen::Index h() const { return h_; }

  Eigen::Index x_index(int node, Eigen::Index r, Eigen::Index c) const;  // 0-based node
  Eigen::Index m_index(int node, Eigen::Index r, Eigen::Index c) const;

  Eigen::MatrixXd x_of(const Eigen::Ref<const Eigen::VectorXd>& v, int node) const;
  Eigen::MatrixXd m_of(const Eigen::Ref<const Eigen::VectorXd>& v, int node) const;
  void set_x(Eigen::Ref<Eigen::VectorXd> v, int node, const Eigen::MatrixXd& x) const;

 private:
  std::vector<Eigen::Index> x_dims_;
  std::vector<Eigen::Index> x_offset_;
  std::vector<Eigen::Index> m_offset_;
  Eigen::Index h_;
  Eigen::Index total_ = 0;
};

/// Everything one node's coupled LMI depends on.
struct LmiNodeData {
  AugmentedNodeMatrices aug;
  double alpha;
  double gamma_sq;
  Eigen::MatrixXd Q;                  // blockdiag(Qtilde, Qcheck)
  std::vector<int> neighbors;         // 0-based in-neighbours
  std::vector<double> neighbor_pi;
};

std::vector<LmiNodeData> lmi_node_data(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params);

/// The block matrix of the coupled LMI for one node evaluated directly at
/// (X_i, M_i) and the neighbours' X_j:
///   [ S_i        X B1   X B2 P   -M Hc ... ]
///   [ B1' X     -g2 I    0        0        ]
///   [ P B2' X    0      -g2 I     0        ]
///   [ -Hc' M'    0       0       -pi_j X_j ]
/// with P = I - D'E^-1 D.
Eigen::MatrixXd lmi_matrix(const LmiNodeData& node, const Eigen::MatrixXd& X, const Eigen::MatrixXd& M,
                           const std::vector<Eigen::MatrixXd>& neighbor_X);

/// Same matrix as an affine map of the global decision vector.
AffineMatrixMap assemble_lmi(const LmiNodeData& node, int node_index, const VariableLayout& layout);

/// Gains of one node.
struct NodeGains {
  Eigen::MatrixXd X, M;
  Eigen::MatrixXd L_aug, K_aug;      // [Ltilde; Lcheck], [Ktilde; Kcheck]
  Eigen::MatrixXd Ltilde, Ktilde;    // top n rows
  Eigen::MatrixXd Lcheck, Kcheck;    // bottom dim-Omega rows
  Eigen::MatrixXd L, K;              // baseline observer
  Eigen::MatrixXd Lbar, Kbar;        // detector: Ltilde - L, Ktilde - K
  Eigen::MatrixXd Q, Qbar;           // performance weights on delta and z
};

/// Baseline observer gains (L_i, K_i) per node.
struct ObserverGains {
  std::vector<Eigen::MatrixXd> L;
  std::vector<Eigen::MatrixXd> K;
};

struct SynthesisSolution {
  std::vector<NodeGains> nodes;
  Eigen::MatrixXd P;
  double rho = 0.0;
  double gamma_sq = 0.0;
  double margin = 0.0;
  std::vector<double> alpha, pi;
  bool weights_defaulted = false;
  FeasibilityResult solver;
};

class SynthesisError : public std::runtime_error {
 public:
  SynthesisError(const std::string& what, double best_merit)
      : std::runtime_error(what), best_merit_(best_merit) {}
  double best_merit() const { return best_merit_; }

 private:
  double best_merit_;
};

/// Recovers K = -X^-1 M and L = (g2 X^-1 C' - B2 D') E^-1. Throws
/// SynthesisError when X is numerically singular (condition > 1e12).
void recover_gains(const AugmentedNodeMatrices& aug, double gamma_sq, const Eigen::MatrixXd& X,
                   const Eigen::MatrixXd& M, Eigen::MatrixXd& L_aug, Eigen::MatrixXd& K_aug);

/// Solves the coupled LMIs for all nodes jointly and recovers the gains.
/// Without `baseline`, the baseline observer gains come from the same
/// synthesis on the attack-free model (n_f = 0 everywhere).
SynthesisSolution synthesize(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params,
                             const std::optional<ObserverGains>& baseline = std::nullopt,
                             const IterateLog& log = {});

/// Baseline observer gains only.
ObserverGains synthesize_baseline(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params,
                                  const IterateLog& log = {});

/// Smallest feasible gamma^2 in [lo, hi] to within `resolution` by bisection.
/// Returns nullopt when hi itself is infeasible.
std::optional<double> bisect_gamma_sq(const ModelSet& models, const DirectedGraph& g, SynthesisParams params,
                                      double lo, double hi, double resolution = 0.05);

/// Global error matrix [Abar -Fbar; 0 Omegabar] - [Lt Kt; Lc Kc][Cbar 0; Hbar 0]
/// on the stacked state [z_1..z_N, delta_1..delta_N].
Eigen::MatrixXd closed_loop_error_matrix(const ModelSet& models, const DirectedGraph& g,
                                         const std::vector<Eigen::MatrixXd>& Ltilde,
                                         const std::vector<Eigen::MatrixXd>& Ktilde,
                                         const std::vector<Eigen::MatrixXd>& Lcheck,
                                         const std::vector<Eigen::MatrixXd>& Kcheck);

double spectral_abscissa(const Eigen::MatrixXd& a);

struct VerificationReport {
  std::vector<double> lmi_lambda_max;  // per node, evaluated directly from X, M
  std::vector<double> x_lambda_min;
  double abscissa = 0.0;
  Eigen::MatrixXd P;
  double rho = 0.0;
  std::vector<double> q_lambda_min;     // lambda_min(Q_i)
  std::vector<double> qbar_lambda_min;  // lambda_min(Qbar_i)
  double margin = 0.0;
  double tolerance = 0.0;

  bool lmis_ok = false;
  bool x_ok = false;
  bool stable = false;
  bool weights_ok = false;
  bool gains_consistent = false;  // stored gains match those recovered from X, M
  bool passed() const { return lmis_ok && x_ok && stable && weights_ok && gains_consistent; }
};

VerificationReport verify_solution(const SynthesisSolution& solution, const ModelSet& models,
                                   const DirectedGraph& g, const SynthesisParams& params);

}  // namespace attackdet
