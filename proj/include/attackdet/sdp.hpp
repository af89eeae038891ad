#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace attackdet {

/// F(v) = constant + sum_k v[variable_k] * matrix_k, every matrix symmetric.
struct AffineMatrixMap {
  struct Term {
    Eigen::Index variable;
    Eigen::SparseMatrix<double> matrix;
  };

  Eigen::MatrixXd constant;
  std::vector<Term> terms;

  Eigen::Index dim() const { return constant.rows(); }

  /// Adds a term, dropping exact zeros. Dense input is symmetrized.
  void add_term(Eigen::Index variable, const Eigen::MatrixXd& matrix);
  /// Largest variable index referenced plus one.
  Eigen::Index min_decision_length() const;
};

/// Throws std::invalid_argument when v does not cover every referenced index.
Eigen::MatrixXd eval(const AffineMatrixMap& map, const Eigen::Ref<const Eigen::VectorXd>& v);

template <typename Derived>
struct SpectralExtremes {
  using Scalar = typename Derived::Scalar;
  Scalar lambda_min;
  Scalar lambda_max;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> top_vector;
};

/// Extreme eigenvalues of (S + S')/2 and a unit eigenvector for the largest.
template <typename Derived>
SpectralExtremes<Derived> lambda_extremes(const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (s.rows() != s.cols()) throw std::invalid_argument("lambda_extremes: matrix is not square");
  if (s.rows() == 0) throw std::invalid_argument("lambda_extremes: empty matrix");
  if (!s.allFinite()) throw std::invalid_argument("lambda_extremes: non-finite entries");
  const Mat sym = (s + s.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const Eigen::Index last = sym.rows() - 1;
  return {es.eigenvalues()(0), es.eigenvalues()(last), es.eigenvectors().col(last)};
}

/// Frobenius-nearest positive semidefinite matrix: clip negative eigenvalues.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_psd(
    const Eigen::MatrixBase<Derived>& s) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!s.allFinite()) throw std::invalid_argument("project_psd: non-finite entries");
  const Mat sym = (s + s.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  const auto& u = es.eigenvectors();
  Mat out = u * es.eigenvalues().cwiseMax(Scalar(0)).asDiagonal() * u.transpose();
  return (out + out.transpose()) / Scalar(2);
}

struct FeasibilityProblem {
  Eigen::Index decision_length = 0;
  std::vector<AffineMatrixMap> constraints;  // each F_k(v) <= -margin I
  double margin = 1e-6;
  long budget = 200000;
  double tolerance = 1e-8;
};

/// 1e-6 * (1 + largest spectral norm among the constant blocks).
double default_margin(const std::vector<AffineMatrixMap>& constraints);

enum class FeasibilityStatus { feasible, not_found_within_budget };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::not_found_within_budget;
  Eigen::VectorXd point;
  Eigen::VectorXd certificate;  // lambda_max of every constraint at `point`
  double merit = 0.0;           // max of certificate
  long iterations = 0;
  int smoothing_restarts = 0;
  int jitter_events = 0;
};

struct IterateRecord {
  long iteration;
  double merit;
  double step;
  double smoothing;
};

using IterateLog = std::function<void(const IterateRecord&)>;

/// Finds v with every F_k(v) <= -margin I by minimizing a softmax-smoothed
/// max eigenvalue (Newton directions, backtracking line search that
/// never increases the exact merit). The returned status is recomputed from
/// eval + lambda_extremes at the returned point. Deterministic.
FeasibilityResult solve_feasibility(const FeasibilityProblem& problem,
                                    const std::optional<Eigen::VectorXd>& initial = std::nullopt,
                                    const IterateLog& log = {});

/// Max lambda_max over the constraints, evaluated from scratch.
Eigen::VectorXd constraint_lambda_max(const std::vector<AffineMatrixMap>& constraints,
                                      const Eigen::Ref<const Eigen::VectorXd>& v);

/// CSV writer for iterate logs: iteration,merit,step,smoothing
class IterateCsvWriter {
 public:
  explicit IterateCsvWriter(std::ostream& os);
  void operator()(const IterateRecord& r) const;

 private:
  std::ostream* os_;
};

}  // namespace attackdet
