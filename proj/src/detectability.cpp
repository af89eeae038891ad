#include "attackdet/detectability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace attackdet {

namespace {

using cd = std::complex<double>;

Eigen::MatrixXcd shifted(const Eigen::MatrixXd& a, cd s) {
  Eigen::MatrixXcd m = a.cast<cd>();
  m.diagonal().array() -= s;
  return m;
}

Eigen::MatrixXcd vstack(const Eigen::MatrixXcd& top, const Eigen::MatrixXcd& bottom) {
  Eigen::MatrixXcd out(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
  out << top, bottom;
  return out;
}

// Eigenvalues clustered within a relative distance of 1e-6; each cluster is
// represented by its mean, which is accurate even for defective eigenvalues.
struct Cluster {
  cd value;
  int multiplicity;
};

std::vector<Cluster> clustered_eigenvalues(const Eigen::MatrixXd& a) {
  std::vector<Cluster> out;
  if (a.rows() == 0) return out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cd x, cd y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); });
  std::vector<bool> used(ev.size(), false);
  for (std::size_t i = 0; i < ev.size(); ++i) {
    if (used[i]) continue;
    cd sum = ev[i];
    int count = 1;
    used[i] = true;
    for (std::size_t j = i + 1; j < ev.size(); ++j)
      if (!used[j] && std::abs(ev[j] - ev[i]) <= 1e-6 * (1.0 + std::abs(ev[i]))) {
        used[j] = true;
        sum += ev[j];
        ++count;
      }
    out.push_back({sum / double(count), count});
  }
  return out;
}

}  // namespace

Eigen::MatrixXd block_diagonal(const std::vector<Eigen::MatrixXd>& blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

NetworkMatrices network_matrices(const ModelSet& models, const DirectedGraph& g) {
  if (g.node_count() != models.node_count())
    throw std::invalid_argument("network_matrices: graph and model node counts differ");
  const auto N = models.node_count();
  NetworkMatrices net;
  net.Abar = kron(Eigen::MatrixXd::Identity(N, N), models.plant.A);
  net.Hbar = kron(laplacian<double>(g), models.consensus.H);
  std::vector<Eigen::MatrixXd> c, om, f;
  for (const auto& node : models.nodes) {
    c.push_back(node.sensor.C);
    om.push_back(node.tracker.Omega);
    f.push_back(node.attack.F * node.tracker.Upsilon);
    if (f.back().cols() != node.tracker.dim()) f.back() = Eigen::MatrixXd::Zero(models.n(), node.tracker.dim());
  }
  net.Cbar = block_diagonal(c);
  net.Omegabar = block_diagonal(om);
  net.Fbar = block_diagonal(f);
  const Eigen::Index nz = net.Abar.rows();
  const Eigen::Index nd = net.Omegabar.rows();
  net.Acal = Eigen::MatrixXd::Zero(nz + nd, nz + nd);
  net.Acal.topLeftCorner(nz, nz) = net.Abar;
  net.Acal.topRightCorner(nz, nd) = -net.Fbar;
  net.Acal.bottomRightCorner(nd, nd) = net.Omegabar;
  net.Ccal = Eigen::MatrixXd::Zero(net.Cbar.rows() + net.Hbar.rows(), nz + nd);
  net.Ccal.topLeftCorner(net.Cbar.rows(), nz) = net.Cbar;
  net.Ccal.bottomLeftCorner(net.Hbar.rows(), nz) = net.Hbar;
  return net;
}

double default_rank_tolerance(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * std::ldexp(1.0, -40);
}

int numerical_rank(const Eigen::MatrixXcd& m, std::optional<double> tol) {
  if (m.size() == 0) return 0;
  if (!m.allFinite()) throw std::invalid_argument("numerical_rank: non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  const double t = tol.value_or(default_rank_tolerance(m.rows(), m.cols(), s.size() ? s(0) : 0.0));
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > t) ++r;
  return r;
}

std::vector<std::complex<double>> unstable_eigenvalues(const Eigen::MatrixXd& a, double tol_re) {
  std::vector<cd> out;
  for (const auto& c : clustered_eigenvalues(a))
    if (c.value.real() >= -tol_re) out.push_back(c.value);
  return out;
}

PbhResult pbh_detectable(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, std::optional<double> rank_tol,
                         double tol_re) {
  if (a.rows() != a.cols()) throw std::invalid_argument("pbh_detectable: A must be square");
  if (c.cols() != a.rows()) throw std::invalid_argument("pbh_detectable: C column count must equal size(A)");
  if (!a.allFinite() || !c.allFinite()) throw std::invalid_argument("pbh_detectable: non-finite entries");
  PbhResult res;
  for (cd s : unstable_eigenvalues(a, tol_re)) {
    if (numerical_rank(vstack(shifted(a, s), c.cast<cd>()), rank_tol) < a.rows()) {
      res.detectable = false;
      res.failing.push_back(s);
    }
  }
  return res;
}

Eigen::MatrixXcd null_space(const Eigen::MatrixXcd& m, std::optional<double> tol) {
  const Eigen::Index cols = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXcd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double t = tol.value_or(default_rank_tolerance(m.rows(), m.cols(), s.size() ? s(0) : 0.0));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > t) ++r;
  return svd.matrixV().rightCols(cols - r);
}

Eigen::MatrixXd kernel_intersection(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, std::optional<double> tol) {
  if (c1.cols() != c2.cols()) throw std::invalid_argument("kernel_intersection: column counts differ");
  const Eigen::Index cols = c1.cols();
  Eigen::MatrixXd stacked(c1.rows() + c2.rows(), cols);
  stacked << c1, c2;
  if (stacked.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double t = tol.value_or(default_rank_tolerance(stacked.rows(), cols, s.size() ? s(0) : 0.0));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > t) ++r;
  return svd.matrixV().rightCols(cols - r);
}

DetectabilityReport check_detectability(const NetworkMatrices& net, std::optional<double> rank_tol, double tol_re) {
  DetectabilityReport rep;
  Eigen::MatrixXd cstack(net.Cbar.rows() + net.Hbar.rows(), net.Abar.cols());
  cstack << net.Cbar, net.Hbar;
  const auto i = pbh_detectable(net.Abar, cstack, rank_tol, tol_re);
  rep.cond_i = i.detectable;
  rep.failing_i = i.failing;

  if (net.Omegabar.rows() > 0) {
    const auto ii = pbh_detectable(net.Omegabar, net.Fbar, rank_tol, tol_re);
    rep.cond_ii = ii.detectable;
    rep.failing_ii = ii.failing;
  } else {
    rep.cond_ii = true;
  }

  rep.cond_iii = true;
  const Eigen::MatrixXcd z = kernel_intersection(net.Cbar, net.Hbar, rank_tol).cast<cd>();
  for (const auto& cl : clustered_eigenvalues(net.Omegabar)) {
    if (cl.value.real() < -tol_re) continue;
    rep.tracker_unstable.push_back(cl.value);
    const Eigen::MatrixXcd delta = null_space(shifted(net.Omegabar, cl.value), rank_tol);
    if (delta.cols() < cl.multiplicity) rep.defective_tracker = true;
    const Eigen::MatrixXcd y = shifted(net.Abar, cl.value) * z;
    const Eigen::MatrixXcd d = net.Fbar.cast<cd>() * delta;
    Eigen::MatrixXcd both(y.rows(), y.cols() + d.cols());
    both << y, d;
    if (numerical_rank(both, rank_tol) != numerical_rank(y, rank_tol) + numerical_rank(d, rank_tol)) {
      rep.cond_iii = false;
      rep.failing_iii.push_back(cl.value);
    }
  }
  rep.detectable = rep.cond_i && rep.cond_ii && rep.cond_iii;
  rep.direct = pbh_detectable(net.Acal, net.Ccal, rank_tol, tol_re).detectable;
  return rep;
}

}  // namespace attackdet
