#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace attackdet {

/// Fixed directed communication topology.
///
/// Node indices are 1-based in every public function. An edge (j, i) means
/// node j sends its shared estimate H x_j to node i.
class DirectedGraph {
 public:
  using Edge = std::pair<int, int>;

  /// Throws std::invalid_argument on self-loops, duplicate edges or indices
  /// outside 1..node_count.
  DirectedGraph(int node_count, std::vector<Edge> edges);

  int node_count() const { return node_count_; }
  /// Edges sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  int node_count_;
  std::vector<Edge> edges_;
};

/// Nodes j with (j, i) in the edge set, ascending. Throws std::out_of_range.
std::vector<int> in_neighbors(const DirectedGraph& g, int i);

struct Degrees {
  Eigen::VectorXi in;   // p_i
  Eigen::VectorXi out;  // q_i
};

Degrees degrees(const DirectedGraph& g);

/// a(i, j) = 1 iff (j, i) is an edge (0-based storage).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> adjacency(const DirectedGraph& g) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat a = Mat::Zero(g.node_count(), g.node_count());
  for (const auto& [from, to] : g.edges()) a(to - 1, from - 1) = Scalar(1);
  return a;
}

/// In-degree Laplacian diag(p) - adjacency. Rows sum to zero, so
/// (laplacian kron H) applied to stacked estimates gives sum_j H (x_i - x_j).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> laplacian(const DirectedGraph& g) {
  auto a = adjacency<Scalar>(g);
  auto lap = (-a).eval();
  lap.diagonal() += a.rowwise().sum();
  return lap;
}

/// Kronecker product, used for I_N (x) A and laplacian (x) H.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                              a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace attackdet
