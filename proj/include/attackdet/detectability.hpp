#pragma once

#include "attackdet/graph.hpp"
#include "attackdet/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <vector>

namespace attackdet {

/// Network-level matrices of the detector error system
/// ebar' = Acal ebar - [Lt Kt; Lc Kc] Ccal ebar, ebar = [z_1..z_N, delta_1..delta_N].
struct NetworkMatrices {
  Eigen::MatrixXd Abar;      // I_N (x) A
  Eigen::MatrixXd Cbar;      // blockdiag(C_i)
  Eigen::MatrixXd Hbar;      // laplacian (x) H
  Eigen::MatrixXd Omegabar;  // blockdiag(Omega_i)
  Eigen::MatrixXd Fbar;      // blockdiag(F_i Upsilon_i), n N x dim Omegabar
  Eigen::MatrixXd Acal;      // [Abar -Fbar; 0 Omegabar]
  Eigen::MatrixXd Ccal;      // [Cbar 0; Hbar 0]
};

NetworkMatrices network_matrices(const ModelSet& models, const DirectedGraph& g);

/// Block-diagonal stacking of a list of matrices (empty blocks allowed).
Eigen::MatrixXd block_diagonal(const std::vector<Eigen::MatrixXd>& blocks);

/// Default rank threshold max(rows, cols) * sigma_max * 2^-40.
double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max);

/// Numerical rank via singular values. `tol` overrides the default threshold.
int numerical_rank(const Eigen::MatrixXcd& m, std::optional<double> tol = std::nullopt);

/// Eigenvalues with Re(s) >= -tol_re, nearby duplicates merged.
std::vector<std::complex<double>> unstable_eigenvalues(const Eigen::MatrixXd& a, double tol_re = 1e-9);

struct PbhResult {
  bool detectable = true;
  std::vector<std::complex<double>> failing;  // eigenvalues where [A - sI; C] loses rank
};

/// PBH test: rank [A - sI; C] = size(A) for every eigenvalue with Re(s) >= -tol_re.
PbhResult pbh_detectable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                         std::optional<double> rank_tol = std::nullopt, double tol_re = 1e-9);

/// Orthonormal basis of {z : C1 z = 0, C2 z = 0} from the SVD of [C1; C2].
Eigen::MatrixXd kernel_intersection(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                                    std::optional<double> tol = std::nullopt);

/// Orthonormal basis of the null space of a complex matrix.
Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& m, std::optional<double> tol = std::nullopt);

struct DetectabilityReport {
  bool cond_i = false;    // (Abar, [Cbar; Hbar]) detectable
  bool cond_ii = false;   // (Omegabar, Fbar) detectable
  bool cond_iii = false;  // Y(s*) and D(s*) intersect trivially for each unstable s*
  bool detectable = false;
  bool direct = false;    // PBH on (Acal, Ccal)
  bool agrees() const { return detectable == direct; }

  std::vector<std::complex<double>> failing_i;
  std::vector<std::complex<double>> failing_ii;
  std::vector<std::complex<double>> failing_iii;
  std::vector<std::complex<double>> tracker_unstable;  // s* tested in (iii)
  bool defective_tracker = false;                      // geometric < algebraic multiplicity at some s*
};

/// Three-condition decomposition, cross-checked against the direct PBH test on
/// (Acal, Ccal); the two must agree.
DetectabilityReport check_detectability(const NetworkMatrices& net, std::optional<double> rank_tol = std::nullopt,
                                   double tol_re = 1e-9);

}  // namespace attackdet
