#include "attackdet/sdp.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace attackdet {

void AffineMatrixMap::add_term(Eigen::Index variable, const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != dim() || matrix.cols() != dim())
    throw std::invalid_argument("AffineMatrixMap: term dimension does not match constant");
  const Eigen::MatrixXd sym = (matrix + matrix.transpose()) / 2.0;
  Term t{variable, sym.sparseView(0.0, 0.0)};
  t.matrix.makeCompressed();
  if (t.matrix.nonZeros() > 0) terms.push_back(std::move(t));
}

Eigen::Index AffineMatrixMap::min_decision_length() const {
  Eigen::Index len = 0;
  for (const auto& t : terms) len = std::max(len, t.variable + 1);
  return len;
}

Eigen::MatrixXd eval(const AffineMatrixMap& map, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() < map.min_decision_length())
    throw std::invalid_argument("eval: decision vector of length " + std::to_string(v.size()) +
                                " does not cover variable " + std::to_string(map.min_decision_length() - 1));
  Eigen::MatrixXd out = map.constant;
  for (const auto& t : map.terms) {
    const double c = v(t.variable);
    if (c == 0.0) continue;
    for (int col = 0; col < t.matrix.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(t.matrix, col); it; ++it)
        out(it.row(), it.col()) += c * it.value();
  }
  return out;
}

double default_margin(const std::vector<AffineMatrixMap>& constraints) {
  double norm = 0.0;
  for (const auto& c : constraints) {
    if (c.dim() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.constant, Eigen::EigenvaluesOnly);
    norm = std::max(norm, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return 1e-6 * (1.0 + norm);
}

Eigen::VectorXd constraint_lambda_max(const std::vector<AffineMatrixMap>& constraints,
                                      const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t k = 0; k < constraints.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = lambda_extremes(eval(constraints[k], v)).lambda_max;
  return out;
}

IterateCsvWriter::IterateCsvWriter(std::ostream& os) : os_(&os) { *os_ << "iteration,merit,step,smoothing\n"; }

void IterateCsvWriter::operator()(const IterateRecord& r) const {
  *os_ << r.iteration << ',' << r.merit << ',' << r.step << ',' << r.smoothing << '\n';
}

namespace {

// Per-constraint variable lists, fixed for the whole solve.
struct ConstraintIndex {
  std::vector<Eigen::Index> variables;   // distinct, ascending
  std::vector<std::size_t> term_local;   // term -> position in `variables`
};

std::vector<ConstraintIndex> index_constraints(const FeasibilityProblem& p) {
  std::vector<ConstraintIndex> out;
  for (const auto& c : p.constraints) {
    ConstraintIndex ci;
    for (const auto& t : c.terms) ci.variables.push_back(t.variable);
    std::sort(ci.variables.begin(), ci.variables.end());
    ci.variables.erase(std::unique(ci.variables.begin(), ci.variables.end()), ci.variables.end());
    for (const auto& t : c.terms)
      ci.term_local.push_back(static_cast<std::size_t>(
          std::lower_bound(ci.variables.begin(), ci.variables.end(), t.variable) - ci.variables.begin()));
    out.push_back(std::move(ci));
  }
  return out;
}

// Full spectra of every constraint at one point, and the value, gradient and
// Hessian of f_mu(v) = mu log sum_k tr exp(F_k(v) / mu).
class Spectra {
 public:
  Spectra(const FeasibilityProblem& p, const Eigen::VectorXd& v) : problem_(&p) {
    solvers_.reserve(p.constraints.size());
    merit_ = -std::numeric_limits<double>::infinity();
    second_ = merit_;
    for (const auto& c : p.constraints) {
      const Eigen::MatrixXd f = eval(c, v);
      if (!f.allFinite()) {
        finite_ = false;
        return;
      }
      solvers_.emplace_back(f);
      const auto& ev = solvers_.back().eigenvalues();
      for (Eigen::Index l = 0; l < ev.size(); ++l) {
        if (ev(l) > merit_) {
          second_ = merit_;
          merit_ = ev(l);
        } else if (ev(l) > second_) {
          second_ = ev(l);
        }
      }
    }
    finite_ = std::isfinite(merit_);
  }

  bool finite() const { return finite_; }
  double merit() const { return merit_; }
  double top_gap() const { return merit_ - second_; }

  double partition(double mu) const {
    double z = 0.0;
    for (const auto& s : solvers_) z += ((s.eigenvalues().array() - merit_) / mu).exp().sum();
    return z;
  }

  double smooth(double mu) const { return merit_ + mu * std::log(partition(mu)); }

  Eigen::VectorXd gradient(double mu) const {
    const double z = partition(mu);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(problem_->decision_length);
    for (std::size_t k = 0; k < solvers_.size(); ++k) {
      const auto& s = solvers_[k];
      const Eigen::VectorXd w = (((s.eigenvalues().array() - merit_) / mu).exp() / z).matrix();
      if (w.maxCoeff() < 1e-300) continue;
      const Eigen::MatrixXd weighted = s.eigenvectors() * w.asDiagonal() * s.eigenvectors().transpose();
      for (const auto& t : problem_->constraints[k].terms) {
        double acc = 0.0;
        for (int col = 0; col < t.matrix.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator it(t.matrix, col); it; ++it)
            acc += it.value() * weighted(it.row(), it.col());
        g(t.variable) += acc;
      }
    }
    return g;
  }

  // Second derivative of tr exp(F / mu) from divided differences of exp in the
  // eigenbasis; minus the rank-one term from the log.
  Eigen::MatrixXd hessian(double mu, const Eigen::VectorXd& g, const std::vector<ConstraintIndex>& index) const {
    const double z = partition(mu);
    const Eigen::Index nv = problem_->decision_length;
    Eigen::MatrixXd h = -(g * g.transpose()) / mu;
    for (std::size_t k = 0; k < solvers_.size(); ++k) {
      const auto& s = solvers_[k];
      const auto& lam = s.eigenvalues();
      const auto& u = s.eigenvectors();
      const Eigen::Index d = lam.size();
      const Eigen::ArrayXd e = ((lam.array() - merit_) / mu).exp();
      if (e.maxCoeff() < 1e-300) continue;
      Eigen::MatrixXd root(d, d);
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) {
          const double gap = std::abs(lam(a) - lam(b));
          const double top = std::max(e(a), e(b));
          const double dd = gap > 0.0 ? top * -std::expm1(-gap / mu) / gap : top / mu;
          root(a, b) = std::sqrt(dd / z);
        }
      const auto& ci = index[k];
      const auto& terms = problem_->constraints[k].terms;
      Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(d * d, static_cast<Eigen::Index>(ci.variables.size()));
      for (std::size_t t = 0; t < terms.size(); ++t) {
        Eigen::MatrixXd rotated = Eigen::MatrixXd::Zero(d, d);
        for (int col = 0; col < terms[t].matrix.outerSize(); ++col)
          for (Eigen::SparseMatrix<double>::InnerIterator it(terms[t].matrix, col); it; ++it)
            rotated.noalias() += it.value() * u.row(it.row()).transpose() * u.row(it.col());
        Eigen::Map<Eigen::MatrixXd>(cols.col(static_cast<Eigen::Index>(ci.term_local[t])).data(), d, d) +=
            root.cwiseProduct(rotated);
      }
      const Eigen::MatrixXd local = cols.transpose() * cols;
      for (std::size_t a = 0; a < ci.variables.size(); ++a)
        for (std::size_t b = 0; b < ci.variables.size(); ++b)
          h(ci.variables[a], ci.variables[b]) += local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    (void)nv;
    return h;
  }

 private:
  const FeasibilityProblem* problem_;
  std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> solvers_;
  double merit_;
  double second_;
  bool finite_ = true;
};

// Damped Newton direction (H + damping * max diag(H) I) d = -g; falls back to
// steepest descent.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, double damping) {
  const Eigen::Index n = g.size();
  const double scale = std::max(1e-300, h.diagonal().cwiseAbs().maxCoeff());
  for (double ridge = damping; ridge <= 1.0; ridge *= 100.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(h + ridge * scale * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) continue;
    Eigen::VectorXd d = llt.solve(-g);
    if (d.allFinite() && g.dot(d) < 0.0) return d;
  }
  return -g / scale;
}

constexpr int kStallWindow = 40;
constexpr int kMaxLineSearch = 60;
constexpr int kMaxRestartsAtFloor = 3;
constexpr double kMinDamping = 1e-14;
constexpr double kMaxDamping = 1e-2;

}  // namespace

FeasibilityResult solve_feasibility(const FeasibilityProblem& problem, const std::optional<Eigen::VectorXd>& initial,
                                    const IterateLog& log) {
  if (!(problem.margin > 0.0)) throw std::invalid_argument("solve_feasibility: margin must be positive");
  Eigen::Index needed = 0;
  for (const auto& c : problem.constraints) needed = std::max(needed, c.min_decision_length());
  if (problem.decision_length < needed)
    throw std::invalid_argument("solve_feasibility: decision_length smaller than referenced variables");

  Eigen::VectorXd v = initial.value_or(Eigen::VectorXd::Zero(problem.decision_length));
  if (v.size() != problem.decision_length)
    throw std::invalid_argument("solve_feasibility: initial point has wrong length");

  FeasibilityResult result;
  const double target = -problem.margin;
  const auto index = index_constraints(problem);

  std::size_t total_dim = 0;
  for (const auto& c : problem.constraints) total_dim += static_cast<std::size_t>(c.dim());
  const double log_dim = std::log(std::max<double>(2.0, static_cast<double>(total_dim)));

  Spectra current(problem, v);
  if (!current.finite()) throw std::invalid_argument("solve_feasibility: non-finite constraint values at start");
  double mu = 0.05 * (1.0 + std::abs(current.merit())) / log_dim;
  const double mu_floor = 1e-2 * problem.margin / log_dim;

  double f = current.smooth(mu);
  Eigen::VectorXd g = current.gradient(mu);
  double window_start = f;
  int window_count = 0;
  int restarts_at_floor = 0;
  std::mt19937_64 jitter_rng(0x5eedULL);
  std::normal_distribution<double> jitter_normal(0.0, 1.0);

  auto restart_smoothing = [&]() {
    ++result.smoothing_restarts;
    if (mu <= mu_floor) ++restarts_at_floor;
    mu = std::max(mu_floor, std::min(0.2 * mu, 0.5 * std::abs(current.merit() - target) / log_dim));
    f = current.smooth(mu);
    g = current.gradient(mu);
    window_start = f;
    window_count = 0;
  };

  double damping = 1e-8;
  long it = 0;
  while (current.merit() > target && it < problem.budget && restarts_at_floor < kMaxRestartsAtFloor) {
    ++it;
    const Eigen::VectorXd d = newton_direction(current.hessian(mu, g, index), g, damping);
    const double slope = g.dot(d);
    if (!(slope < 0.0)) {
      restart_smoothing();
      continue;
    }

    double step = 1.0;
    bool accepted = false;
    double moved = 0.0;
    for (int ls = 0; ls < kMaxLineSearch; ++ls, step *= 0.5) {
      Eigen::VectorXd trial = v + step * d;
      Spectra next(problem, trial);
      if (!next.finite()) continue;
      const double f_next = next.smooth(mu);
      if (f_next <= f + 1e-4 * step * slope && next.merit() <= current.merit()) {
        moved = step * d.norm();
        v = std::move(trial);
        current = std::move(next);
        f = f_next;
        g = current.gradient(mu);
        accepted = true;
        break;
      }
    }

    if (accepted) {
      if (step == 1.0)
        damping = std::max(kMinDamping, damping * 0.1);
      else if (step < 0.1)
        damping = std::min(kMaxDamping, damping * 10.0);
      if (log) log({it, current.merit(), step, mu});
      // Converged for this smoothing level: the Newton decrement bounds f - min f.
      const bool converged = -slope < 1e-3 * mu;
      const bool window_full = ++window_count >= kStallWindow;
      const bool stalled = (window_full && window_start - f < 1e-2 * mu) ||
                           moved <= 1e-12 * (1.0 + v.norm());
      if (window_full) {
        window_start = f;
        window_count = 0;
      }
      if (converged || stalled) restart_smoothing();
      continue;
    }

    if (damping < kMaxDamping) {
      damping = std::min(kMaxDamping, damping * 100.0);
      continue;
    }

    // Line search failed: a repeated top eigenvalue is the usual culprit.
    if (current.top_gap() < 1e-8 * (1.0 + std::abs(current.merit()))) {
      ++result.jitter_events;
      const double scale = 1e-9 * (1.0 + v.cwiseAbs().maxCoeff());
      Eigen::VectorXd jittered = v;
      for (Eigen::Index j = 0; j < jittered.size(); ++j) jittered(j) += scale * jitter_normal(jitter_rng);
      Spectra next(problem, jittered);
      if (next.finite() && next.merit() <= current.merit() + 1e-12 * (1.0 + std::abs(current.merit()))) {
        v = std::move(jittered);
        current = std::move(next);
      }
    }
    restart_smoothing();
    damping = 1e-8;
  }

  // Independent re-verification at the returned point.
  result.point = v;
  result.certificate = constraint_lambda_max(problem.constraints, v);
  result.merit = result.certificate.size() ? result.certificate.maxCoeff() : -std::numeric_limits<double>::infinity();
  result.iterations = it;
  result.status = (result.certificate.array() <= target + problem.tolerance).all()
                      ? FeasibilityStatus::feasible
                      : FeasibilityStatus::not_found_within_budget;
  return result;
}

}  // namespace attackdet
