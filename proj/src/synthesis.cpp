#include "attackdet/synthesis.hpp"

#include "attackdet/detectability.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace attackdet {

namespace {

bool is_symmetric_psd(const Eigen::MatrixXd& q) {
  if (q.size() == 0) return true;
  if (q.rows() != q.cols()) return false;
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-12 * scale;
}

double lambda_min_sym(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  return lambda_extremes(m).lambda_min;
}

void check_params(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& p) {
  const auto N = static_cast<std::size_t>(models.node_count());
  auto fail = [](const std::string& what) { throw std::invalid_argument("synthesis parameters: " + what); };
  if (g.node_count() != models.node_count()) fail("graph node count differs from the model node count");
  if (!(p.gamma_sq > 0.0)) fail("gamma_sq must be positive");
  if (p.alpha.size() != N || p.pi.size() != N || p.Qtilde.size() != N || p.Qcheck.size() != N)
    fail("alpha, pi, Qtilde and Qcheck need one entry per node");
  const auto q = degrees(g).out;
  for (std::size_t i = 0; i < N; ++i) {
    const auto node = std::to_string(i + 1);
    if (!(p.alpha[i] > 0.0)) fail("alpha_" + node + " must be positive");
    if (!(p.pi[i] > 0.0)) fail("pi_" + node + " must be positive");
    if (q(static_cast<Eigen::Index>(i)) > 0 && !(q(static_cast<Eigen::Index>(i)) * p.pi[i] < 2.0 * p.alpha[i]))
      fail("pi_" + node + " must satisfy q_i pi_i < 2 alpha_i");
    if (p.Qtilde[i].rows() != models.n() || !is_symmetric_psd(p.Qtilde[i]))
      fail("Qtilde_" + node + " must be a symmetric PSD n x n matrix");
    if (p.Qcheck[i].rows() != models.nodes[i].tracker.dim() || !is_symmetric_psd(p.Qcheck[i]))
      fail("Qcheck_" + node + " must be a symmetric PSD matrix matching the tracker dimension");
  }
  if (p.injection_rate_bound && !(*p.injection_rate_bound > 0.0)) fail("injection_rate_bound must be positive");
}

void check_models(const ModelSet& models) {
  const auto violations = validate(models);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid model set:";
  for (const auto& v : violations) os << "\n  " << to_string(v);
  throw std::invalid_argument(os.str());
}

struct LmiSystem {
  std::vector<LmiNodeData> nodes;
  VariableLayout layout;
  FeasibilityProblem problem;
};

LmiSystem build_lmi_system(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params) {
  auto data = lmi_node_data(models, g, params);
  std::vector<Eigen::Index> x_dims;
  for (const auto& d : data) x_dims.push_back(d.aug.A.rows());
  VariableLayout layout(x_dims, models.consensus.H.rows());

  FeasibilityProblem problem;
  problem.decision_length = layout.size();
  for (int i = 0; i < layout.node_count(); ++i)
    problem.constraints.push_back(assemble_lmi(data[static_cast<std::size_t>(i)], i, layout));
  for (int i = 0; i < layout.node_count(); ++i) {
    const Eigen::Index d = layout.x_dim(i);
    AffineMatrixMap pos;
    pos.constant = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = r; c < d; ++c) {
        Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(d, d);
        unit(r, c) = -1.0;
        unit(c, r) = -1.0;
        pos.add_term(layout.x_index(i, r, c), unit);
      }
    problem.constraints.push_back(std::move(pos));
  }
  if (params.injection_rate_bound) {
    // gamma^2 E^-1/2 C X^-1 C' E^-1/2 <= bound I as a Schur complement in X.
    const double bound = *params.injection_rate_bound;
    for (int i = 0; i < layout.node_count(); ++i) {
      const auto& aug = data[static_cast<std::size_t>(i)].aug;
      const Eigen::Index d = layout.x_dim(i), m = aug.C.rows();
      if (m == 0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aug.E);
      const Eigen::MatrixXd cw = es.operatorInverseSqrt() * aug.C;
      AffineMatrixMap rate;
      rate.constant = Eigen::MatrixXd::Zero(d + m, d + m);
      rate.constant.topRightCorner(d, m) = cw.transpose();
      rate.constant.bottomLeftCorner(m, d) = cw;
      rate.constant.bottomRightCorner(m, m) = -(bound / params.gamma_sq) * Eigen::MatrixXd::Identity(m, m);
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = r; c < d; ++c) {
          Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(d + m, d + m);
          unit(r, c) = -1.0;
          unit(c, r) = -1.0;
          rate.add_term(layout.x_index(i, r, c), unit);
        }
      problem.constraints.push_back(std::move(rate));
    }
  }
  problem.margin = params.margin.value_or(default_margin(problem.constraints));
  problem.tolerance = params.tolerance;
  problem.budget = params.budget;
  return {std::move(data), std::move(layout), std::move(problem)};
}

Eigen::VectorXd identity_seed(const VariableLayout& layout) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
  for (int i = 0; i < layout.node_count(); ++i)
    layout.set_x(v, i, Eigen::MatrixXd::Identity(layout.x_dim(i), layout.x_dim(i)));
  return v;
}

FeasibilityResult solve_lmis(const LmiSystem& sys, const IterateLog& log) {
  return solve_feasibility(sys.problem, identity_seed(sys.layout), log);
}

}  // namespace

std::vector<double> default_pi(const std::vector<double>& alpha, const Eigen::VectorXi& out_degrees) {
  if (static_cast<Eigen::Index>(alpha.size()) != out_degrees.size())
    throw std::invalid_argument("default_pi: alpha and out-degree sizes differ");
  std::vector<double> pi(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i)
    pi[i] = 2.0 * alpha[i] / (out_degrees(static_cast<Eigen::Index>(i)) + 1.0);
  return pi;
}

double dissipation_rate(const std::vector<double>& alpha, const std::vector<double>& pi,
                        const Eigen::VectorXi& out_degrees) {
  double rho = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alpha.size(); ++i)
    rho = std::min(rho, 2.0 * alpha[i] - out_degrees(static_cast<Eigen::Index>(i)) * pi[i]);
  return rho;
}

SynthesisParams default_params(const ModelSet& models, const DirectedGraph& g, double gamma_sq, double alpha) {
  SynthesisParams p;
  p.gamma_sq = gamma_sq;
  p.alpha.assign(static_cast<std::size_t>(models.node_count()), alpha);
  p.pi = default_pi(p.alpha, degrees(g).out);
  for (const auto& node : models.nodes) {
    p.Qtilde.push_back(1e-3 * Eigen::MatrixXd::Identity(models.n(), models.n()));
    p.Qcheck.push_back(1e-3 * Eigen::MatrixXd::Identity(node.tracker.dim(), node.tracker.dim()));
  }
  p.weights_defaulted = true;
  return p;
}

VariableLayout::VariableLayout(std::vector<Eigen::Index> x_dims, Eigen::Index h) : x_dims_(std::move(x_dims)), h_(h) {
  for (auto d : x_dims_) {
    x_offset_.push_back(total_);
    total_ += d * (d + 1) / 2;
  }
  for (auto d : x_dims_) {
    m_offset_.push_back(total_);
    total_ += d * h_;
  }
}

Eigen::Index VariableLayout::x_index(int node, Eigen::Index r, Eigen::Index c) const {
  if (r > c) std::swap(r, c);
  const Eigen::Index d = x_dim(node);
  return x_offset_[static_cast<std::size_t>(node)] + r * d - r * (r - 1) / 2 + (c - r);
}

Eigen::Index VariableLayout::m_index(int node, Eigen::Index r, Eigen::Index c) const {
  return m_offset_[static_cast<std::size_t>(node)] + r * h_ + c;
}

Eigen::MatrixXd VariableLayout::x_of(const Eigen::Ref<const Eigen::VectorXd>& v, int node) const {
  const Eigen::Index d = x_dim(node);
  Eigen::MatrixXd x(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = r; c < d; ++c) x(r, c) = x(c, r) = v(x_index(node, r, c));
  return x;
}

Eigen::MatrixXd VariableLayout::m_of(const Eigen::Ref<const Eigen::VectorXd>& v, int node) const {
  const Eigen::Index d = x_dim(node);
  Eigen::MatrixXd m(d, h_);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < h_; ++c) m(r, c) = v(m_index(node, r, c));
  return m;
}

void VariableLayout::set_x(Eigen::Ref<Eigen::VectorXd> v, int node, const Eigen::MatrixXd& x) const {
  const Eigen::Index d = x_dim(node);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = r; c < d; ++c) v(x_index(node, r, c)) = x(r, c);
}

std::vector<LmiNodeData> lmi_node_data(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params) {
  std::vector<LmiNodeData> out;
  for (int i = 0; i < models.node_count(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto& node = models.nodes[idx];
    LmiNodeData d;
    d.aug = augment(models.plant, node.sensor, node.tracker, node.attack, models.consensus);
    d.alpha = params.alpha[idx];
    d.gamma_sq = params.gamma_sq;
    const Eigen::Index n = models.n();
    const Eigen::Index k = node.tracker.dim();
    d.Q = Eigen::MatrixXd::Zero(n + k, n + k);
    d.Q.topLeftCorner(n, n) = params.Qtilde[idx];
    if (k > 0) d.Q.bottomRightCorner(k, k) = params.Qcheck[idx];
    for (int j : in_neighbors(g, i + 1)) {
      if (!(params.pi[static_cast<std::size_t>(j - 1)] > 0.0))
        throw std::invalid_argument("assemble_lmi: pi_" + std::to_string(j) + " must be positive");
      d.neighbors.push_back(j - 1);
      d.neighbor_pi.push_back(params.pi[static_cast<std::size_t>(j - 1)]);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Eigen::MatrixXd lmi_matrix(const LmiNodeData& node, const Eigen::MatrixXd& X, const Eigen::MatrixXd& M,
                           const std::vector<Eigen::MatrixXd>& neighbor_X) {
  const auto& a = node.aug;
  const Eigen::Index na = a.A.rows();
  const Eigen::Index nf = a.B1.cols();
  const Eigen::Index nw = a.B2.cols();
  const auto p = static_cast<Eigen::Index>(node.neighbors.size());
  if (X.rows() != na || X.cols() != na || M.rows() != na || M.cols() != a.H.rows() ||
      static_cast<Eigen::Index>(neighbor_X.size()) != p)
    throw std::invalid_argument("lmi_matrix: dimension mismatch");

  const Eigen::LLT<Eigen::MatrixXd> e_llt(a.E);
  const Eigen::MatrixXd e_inv_c = e_llt.solve(a.C);
  const Eigen::MatrixXd e_inv_d = e_llt.solve(a.D);
  const Eigen::MatrixXd a_shift =
      a.A + node.alpha * Eigen::MatrixXd::Identity(na, na) + a.B2 * a.D.transpose() * e_inv_c;
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(nw, nw) - a.D.transpose() * e_inv_d;
  const Eigen::MatrixXd mh = M * a.H;

  Eigen::Index dim = na + nf + nw;
  for (const auto& xj : neighbor_X) {
    if (xj.rows() != xj.cols()) throw std::invalid_argument("lmi_matrix: neighbour X must be square");
    dim += xj.rows();
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  out.topLeftCorner(na, na) = X * a_shift + a_shift.transpose() * X + double(p) * (mh + mh.transpose()) + node.Q -
                              node.gamma_sq * a.C.transpose() * e_inv_c;
  Eigen::Index off = na;
  if (nf > 0) {
    const Eigen::MatrixXd xb1 = X * a.B1;
    out.block(0, off, na, nf) = xb1;
    out.block(off, 0, nf, na) = xb1.transpose();
    out.block(off, off, nf, nf) = -node.gamma_sq * Eigen::MatrixXd::Identity(nf, nf);
    off += nf;
  }
  const Eigen::MatrixXd xb2 = X * a.B2 * proj;
  out.block(0, off, na, nw) = xb2;
  out.block(off, 0, nw, na) = xb2.transpose();
  out.block(off, off, nw, nw) = -node.gamma_sq * Eigen::MatrixXd::Identity(nw, nw);
  off += nw;
  for (Eigen::Index k = 0; k < p; ++k) {
    // neighbours couple through their plant error only; their tracker dimension may differ
    const auto& xj = neighbor_X[static_cast<std::size_t>(k)];
    const Eigen::Index nj = xj.rows();
    Eigen::MatrixXd hj = Eigen::MatrixXd::Zero(a.H.rows(), nj);
    hj.leftCols(std::min(na, nj)) = a.H.leftCols(std::min(na, nj));
    const Eigen::MatrixXd coupling = -M * hj;
    out.block(0, off, na, nj) = coupling;
    out.block(off, 0, nj, na) = coupling.transpose();
    out.block(off, off, nj, nj) = -node.neighbor_pi[static_cast<std::size_t>(k)] * xj;
    off += nj;
  }
  return out;
}

AffineMatrixMap assemble_lmi(const LmiNodeData& node, int node_index, const VariableLayout& layout) {
  const Eigen::Index na = node.aug.A.rows();
  const Eigen::Index h = node.aug.H.rows();
  if (layout.x_dim(node_index) != na || layout.h() != h)
    throw std::invalid_argument("assemble_lmi: layout does not match node dimensions");
  std::vector<Eigen::MatrixXd> zero_neighbors;
  for (int j : node.neighbors) zero_neighbors.push_back(Eigen::MatrixXd::Zero(layout.x_dim(j), layout.x_dim(j)));
  const Eigen::MatrixXd zero_x = Eigen::MatrixXd::Zero(na, na);
  const Eigen::MatrixXd zero_m = Eigen::MatrixXd::Zero(na, h);

  AffineMatrixMap map;
  map.constant = lmi_matrix(node, zero_x, zero_m, zero_neighbors);
  auto sym_unit = [na](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(na, na);
    u(r, c) = 1.0;
    u(c, r) = 1.0;
    return u;
  };
  for (Eigen::Index r = 0; r < na; ++r)
    for (Eigen::Index c = r; c < na; ++c)
      map.add_term(layout.x_index(node_index, r, c), lmi_matrix(node, sym_unit(r, c), zero_m, zero_neighbors) - map.constant);
  for (Eigen::Index r = 0; r < na; ++r)
    for (Eigen::Index c = 0; c < h; ++c) {
      Eigen::MatrixXd unit = zero_m;
      unit(r, c) = 1.0;
      map.add_term(layout.m_index(node_index, r, c), lmi_matrix(node, zero_x, unit, zero_neighbors) - map.constant);
    }
  for (std::size_t k = 0; k < node.neighbors.size(); ++k) {
    const Eigen::Index nj = layout.x_dim(node.neighbors[k]);
    for (Eigen::Index r = 0; r < nj; ++r)
      for (Eigen::Index c = r; c < nj; ++c) {
        auto nb = zero_neighbors;
        nb[k] = Eigen::MatrixXd::Zero(nj, nj);
        nb[k](r, c) = 1.0;
        nb[k](c, r) = 1.0;
        map.add_term(layout.x_index(node.neighbors[k], r, c), lmi_matrix(node, zero_x, zero_m, nb) - map.constant);
      }
  }
  return map;
}

void recover_gains(const AugmentedNodeMatrices& aug, double gamma_sq, const Eigen::MatrixXd& X,
                   const Eigen::MatrixXd& M, Eigen::MatrixXd& L_aug, Eigen::MatrixXd& K_aug) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw SynthesisError("X is numerically singular (condition number above 1e12)", lo);
  const Eigen::LLT<Eigen::MatrixXd> x_llt(X);
  K_aug = -x_llt.solve(M);
  const Eigen::MatrixXd rhs = gamma_sq * x_llt.solve(aug.C.transpose()) - aug.B2 * aug.D.transpose();
  L_aug = aug.E.llt().solve(rhs.transpose()).transpose();
}

ObserverGains synthesize_baseline(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params,
                                  const IterateLog& log) {
  const ModelSet plain = without_attacks(models);
  SynthesisParams p = params;
  for (auto& q : p.Qcheck) q = Eigen::MatrixXd(0, 0);
  check_params(plain, g, p);
  const auto sys = build_lmi_system(plain, g, p);
  const auto res = solve_lmis(sys, log);
  if (res.status != FeasibilityStatus::feasible)
    throw SynthesisError("baseline observer LMIs: no feasible point found within budget", res.merit);
  ObserverGains out;
  for (int i = 0; i < sys.layout.node_count(); ++i) {
    Eigen::MatrixXd L, K;
    recover_gains(sys.nodes[static_cast<std::size_t>(i)].aug, p.gamma_sq, sys.layout.x_of(res.point, i),
                  sys.layout.m_of(res.point, i), L, K);
    out.L.push_back(std::move(L));
    out.K.push_back(std::move(K));
  }
  return out;
}

SynthesisSolution synthesize(const ModelSet& models, const DirectedGraph& g, const SynthesisParams& params,
                             const std::optional<ObserverGains>& baseline, const IterateLog& log) {
  check_models(models);
  check_params(models, g, params);
  const auto sys = build_lmi_system(models, g, params);
  auto res = solve_lmis(sys, log);
  if (res.status != FeasibilityStatus::feasible)
    throw SynthesisError("detector LMIs: no feasible point found within budget", res.merit);

  const ObserverGains base = baseline ? *baseline : synthesize_baseline(models, g, params);
  const auto N = static_cast<std::size_t>(models.node_count());
  if (base.L.size() != N || base.K.size() != N)
    throw std::invalid_argument("synthesize: baseline gains do not cover every node");

  const Eigen::Index n = models.n();
  const auto q = degrees(g).out;
  SynthesisSolution sol;
  sol.gamma_sq = params.gamma_sq;
  sol.margin = sys.problem.margin;
  sol.alpha = params.alpha;
  sol.pi = params.pi;
  sol.rho = dissipation_rate(params.alpha, params.pi, q);
  sol.weights_defaulted = params.weights_defaulted;
  sol.P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < N; ++i) {
    const int node = static_cast<int>(i);
    NodeGains ng;
    ng.X = sys.layout.x_of(res.point, node);
    ng.M = sys.layout.m_of(res.point, node);
    recover_gains(sys.nodes[i].aug, params.gamma_sq, ng.X, ng.M, ng.L_aug, ng.K_aug);
    const Eigen::Index k = models.nodes[i].tracker.dim();
    ng.Ltilde = ng.L_aug.topRows(n);
    ng.Ktilde = ng.K_aug.topRows(n);
    ng.Lcheck = ng.L_aug.bottomRows(k);
    ng.Kcheck = ng.K_aug.bottomRows(k);
    ng.L = base.L[i];
    ng.K = base.K[i];
    if (ng.L.rows() != n || ng.L.cols() != ng.Ltilde.cols() || ng.K.rows() != n || ng.K.cols() != ng.Ktilde.cols())
      throw std::invalid_argument("synthesize: baseline gain dimensions do not match node " + std::to_string(i + 1));
    ng.Lbar = ng.Ltilde - ng.L;
    ng.Kbar = ng.Ktilde - ng.K;
    const double shift = sol.rho * lambda_min_sym(ng.X);
    ng.Q = params.Qcheck[i] + shift * Eigen::MatrixXd::Identity(k, k);
    ng.Qbar = params.Qtilde[i] + shift * Eigen::MatrixXd::Identity(n, n);
    sol.P += ng.X.topLeftCorner(n, n);
    sol.nodes.push_back(std::move(ng));
  }
  sol.P /= params.gamma_sq;
  sol.solver = std::move(res);
  return sol;
}

std::optional<double> bisect_gamma_sq(const ModelSet& models, const DirectedGraph& g, SynthesisParams params,
                                      double lo, double hi, double resolution) {
  check_models(models);
  auto feasible = [&](double gamma_sq) {
    params.gamma_sq = gamma_sq;
    check_params(models, g, params);
    return solve_lmis(build_lmi_system(models, g, params), {}).status == FeasibilityStatus::feasible;
  };
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("bisect_gamma_sq: need 0 < lo < hi");
  if (!feasible(hi)) return std::nullopt;
  if (feasible(lo)) return lo;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

Eigen::MatrixXd closed_loop_error_matrix(const ModelSet& models, const DirectedGraph& g,
                                         const std::vector<Eigen::MatrixXd>& Ltilde,
                                         const std::vector<Eigen::MatrixXd>& Ktilde,
                                         const std::vector<Eigen::MatrixXd>& Lcheck,
                                         const std::vector<Eigen::MatrixXd>& Kcheck) {
  const auto net = network_matrices(models, g);
  const Eigen::Index nz = net.Abar.rows();
  const Eigen::Index nd = net.Omegabar.rows();
  Eigen::MatrixXd gain(nz + nd, net.Ccal.rows());
  const Eigen::MatrixXd lt = block_diagonal(Ltilde), kt = block_diagonal(Ktilde);
  const Eigen::MatrixXd lc = block_diagonal(Lcheck), kc = block_diagonal(Kcheck);
  if (lt.rows() != nz || lt.cols() != net.Cbar.rows() || kt.cols() != net.Hbar.rows() || lc.rows() != nd)
    throw std::invalid_argument("closed_loop_error_matrix: gain dimensions do not match the network");
  gain.setZero();
  gain.topLeftCorner(nz, lt.cols()) = lt;
  gain.topRightCorner(nz, kt.cols()) = kt;
  if (nd > 0) {
    gain.bottomLeftCorner(nd, lc.cols()) = lc;
    gain.bottomRightCorner(nd, kc.cols()) = kc;
  }
  return net.Acal - gain * net.Ccal;
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

VerificationReport verify_solution(const SynthesisSolution& solution, const ModelSet& models,
                                   const DirectedGraph& g, const SynthesisParams& params) {
  check_models(models);
  const auto data = lmi_node_data(models, g, params);
  VerificationReport rep;
  rep.margin = solution.margin;
  rep.tolerance = params.tolerance;
  const auto N = solution.nodes.size();
  if (N != data.size()) throw std::invalid_argument("verify_solution: node count mismatch");

  std::vector<Eigen::MatrixXd> lt, kt, lc, kc;
  rep.lmis_ok = rep.x_ok = rep.weights_ok = rep.gains_consistent = true;
  auto close = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).norm() <= 1e-9 * (1.0 + b.norm());
  };
  for (std::size_t i = 0; i < N; ++i) {
    const auto& ng = solution.nodes[i];
    Eigen::MatrixXd L_aug, K_aug;
    try {
      recover_gains(data[i].aug, solution.gamma_sq, ng.X, ng.M, L_aug, K_aug);
    } catch (const SynthesisError&) {
      L_aug.resize(0, 0);
    }
    const Eigen::Index n = models.n();
    const Eigen::Index k = L_aug.rows() - n;
    rep.gains_consistent = rep.gains_consistent && L_aug.size() > 0 && close(ng.L_aug, L_aug) && close(ng.K_aug, K_aug) &&
                           close(ng.Ltilde, L_aug.topRows(n)) && close(ng.Ktilde, K_aug.topRows(n)) &&
                           close(ng.Lcheck, L_aug.bottomRows(k)) && close(ng.Kcheck, K_aug.bottomRows(k)) &&
                           close(ng.Lbar, ng.Ltilde - ng.L) && close(ng.Kbar, ng.Ktilde - ng.K);
    std::vector<Eigen::MatrixXd> nb;
    for (int j : data[i].neighbors) nb.push_back(solution.nodes[static_cast<std::size_t>(j)].X);
    rep.lmi_lambda_max.push_back(lambda_extremes(lmi_matrix(data[i], ng.X, ng.M, nb)).lambda_max);
    rep.x_lambda_min.push_back(lambda_extremes(ng.X).lambda_min);
    rep.q_lambda_min.push_back(lambda_min_sym(ng.Q));
    rep.qbar_lambda_min.push_back(lambda_min_sym(ng.Qbar));
    rep.lmis_ok = rep.lmis_ok && rep.lmi_lambda_max.back() <= -solution.margin + params.tolerance;
    rep.x_ok = rep.x_ok && rep.x_lambda_min.back() >= solution.margin - params.tolerance;
    rep.weights_ok = rep.weights_ok && rep.q_lambda_min.back() > 0.0 && rep.qbar_lambda_min.back() > 0.0;
    lt.push_back(ng.Ltilde);
    kt.push_back(ng.Ktilde);
    lc.push_back(ng.Lcheck);
    kc.push_back(ng.Kcheck);
  }
  rep.abscissa = spectral_abscissa(closed_loop_error_matrix(models, g, lt, kt, lc, kc));
  rep.stable = rep.abscissa < 0.0;
  rep.P = solution.P;
  rep.rho = solution.rho;
  rep.weights_ok = rep.weights_ok && rep.rho > 0.0;
  return rep;
}

}  // namespace attackdet
