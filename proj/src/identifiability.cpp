#include "porlhf/identifiability.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "porlhf/feedback.hpp"
#include "porlhf/observability.hpp"

namespace porlhf {

namespace {

double smallest_singular(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  return s.size() ? s(s.size() - 1) : 0.0;
}

Mat image_basis(const Mat& gamma, double tol) { return column_space(gamma, tol); }

}  // namespace

AmbiguitySubspace ambiguity(const Mat& b, const Mat& gamma, double tol) {
  if (b.cols() != gamma.rows()) throw std::invalid_argument("belief and return operator dimensions differ");
  AmbiguitySubspace a;
  a.tolerance = tol;
  const Mat u = image_basis(gamma, tol);
  a.im_gamma_dim = static_cast<int>(u.cols());
  a.ker_gamma_dim = static_cast<int>(gamma.cols()) - a.im_gamma_dim;
  a.ker_b_dim = static_cast<int>(nullspace(b, tol).cols());

  const Mat bg = b * gamma;
  a.reward_basis = nullspace(bg, tol);
  a.reward_dim = static_cast<int>(a.reward_basis.cols());

  // Gamma restricted to the complement of ker Gamma: project onto the row space first.
  const Mat kg = nullspace(gamma, tol);
  Mat k = a.reward_basis;
  if (kg.cols() > 0) k -= kg * (kg.transpose() * k);
  const double scale = std::max(operator_norm(gamma), 1.0);
  a.return_basis = column_space_above(gamma * k, tol * scale);
  a.return_dim = static_cast<int>(a.return_basis.cols());

  const Eigen::Index n = gamma.rows();
  Mat stacked(b.rows() + n, n);
  stacked << b, Mat::Identity(n, n) - u * u.transpose();
  a.stacked_dim = static_cast<int>(nullspace(stacked, tol).cols());
  if (a.stacked_dim != a.return_dim) {
    std::ostringstream os;
    os << "intersection methods disagree: " << a.return_dim << " vs " << a.stacked_dim;
    throw std::logic_error(os.str());
  }
  return a;
}

ExactDims exact_ambiguity_dims(const Mat& b, const Mat& gamma) {
  ExactDims d;
  const int rb = exact_rank(b), rg = exact_rank(gamma), rbg = exact_rank(b * gamma);
  d.ker_b = static_cast<int>(b.cols()) - rb;
  d.im_gamma = rg;
  d.return_ambiguity = rg - rbg;
  d.reward_ambiguity = static_cast<int>(gamma.cols()) - rbg;
  return d;
}

bool is_feedback_compatible(const Vec& g_tilde, const Vec& g, const Mat& b, double beta, double tol) {
  const Mat p1 = obs_table(b, g_tilde, beta).prob;
  const Mat p2 = obs_table(b, g, beta).prob;
  return (p1 - p2).cwiseAbs().maxCoeff() <= tol;
}

bool differs_by_ambiguity(const Vec& g_tilde, const Vec& g, const AmbiguitySubspace& amb, double tol) {
  const Eigen::Index n = g.size();
  Mat w(n, amb.return_dim + 1);
  w.col(0) = Vec::Ones(n);
  if (amb.return_dim) w.rightCols(amb.return_dim) = amb.return_basis;
  const Mat q = column_space(w, 1e-12);
  const Vec d = g_tilde - g;
  const Vec r = d - q * (q.transpose() * d);
  return r.norm() <= tol * std::max(1.0, d.norm());
}

LadderReport identifiability_ladder(const Mat& b, const Mat& gamma, const Mat* theta, double tol, std::size_t kron_cap) {
  LadderReport r;
  const AmbiguitySubspace a = ambiguity(b, gamma, tol);
  r.ker_b_trivial = a.ker_b_dim == 0;
  r.ker_b_gamma_trivial = a.reward_dim == 0;
  r.intersection_trivial = a.return_dim == 0;
  r.identifiable = r.intersection_trivial;
  if (theta) {
    r.theta_checked = true;
    r.theta_injective = injectivity(*theta, tol).injective;
    const double entries = static_cast<double>(theta->rows()) * theta->rows() * theta->cols() * theta->cols();
    if (entries <= static_cast<double>(kron_cap)) {
      r.theta_kron_checked = true;
      r.theta_kron_injective = injectivity(kronecker_square(*theta, kron_cap), tol).injective;
    }
    const bool kron_ok = r.theta_kron_checked ? r.theta_kron_injective : r.theta_injective;
    r.identifiable_without_observations = r.identifiable && kron_ok;
  }
  std::ostringstream os;
  if (r.identifiable) {
    os << "identifiable up to constant";
    if (theta) os << (r.identifiable_without_observations ? "; also without knowing observations" : "; observations must be known");
  } else {
    os << "not identifiable: return ambiguity dim " << a.return_dim;
  }
  r.verdict = os.str();
  return r;
}

SeparabilityResult time_separable(const Vec& g, const Mat& gamma, double tol) {
  if (g.size() != gamma.rows()) throw std::invalid_argument("return vector size mismatch");
  SeparabilityResult s;
  s.reward = gamma.completeOrthogonalDecomposition().solve(g);
  s.residual = (gamma * s.reward - g).norm();
  s.separable = s.residual <= tol * std::max(1.0, g.norm());
  return s;
}

Vec reconstruct_return(const Mat& b_assumed, const Vec& obs_returns, const Mat& gamma, double tol) {
  if (b_assumed.cols() != gamma.rows() || b_assumed.rows() != obs_returns.size())
    throw std::invalid_argument("dimension mismatch");
  const Mat u = image_basis(gamma, tol);
  const Mat bbar = b_assumed * u;
  if (numeric_rank(bbar, tol) < u.cols()) throw std::domain_error("ambiguous: ker B ∩ im Gamma ≠ {0}");
  const Vec c = (bbar.transpose() * bbar).ldlt().solve(bbar.transpose() * obs_returns);
  return u * c;
}

double bound_polynomial(double x, double y) { return x * y * (12.0 * x * y * y + 1.0); }

RobustnessBound robustness_bound(const Mat& b, const Mat& gamma, const Vec& g, double rho, double tol) {
  const Mat u = image_basis(gamma, tol);
  const Mat bbar = b * u;
  if (numeric_rank(bbar, tol) < u.cols()) throw std::domain_error("ambiguous: ker B ∩ im Gamma ≠ {0}");
  RobustnessBound r;
  const double smin = smallest_singular(bbar);
  r.Y = operator_norm(bbar);
  r.X = 1.0 / (smin * smin);
  r.rho_max = std::min(r.Y, -r.Y + std::sqrt(r.Y * r.Y + 0.5 / r.X));
  if (rho < 0.0 || rho > r.rho_max * (1.0 + 1e-12)) throw std::domain_error("rho too large for bound");
  r.bound = rho * g.norm() * bound_polynomial(r.X, r.Y);
  if (bbar.rows() == bbar.cols()) {
    r.square_rho_max = 0.5 * smin;
    if (rho <= r.square_rho_max) {
      r.square = true;
      r.square_bound = rho * 2.0 * r.Y * g.norm() / (smin * smin);
    }
  }
  return r;
}

WorstCase worst_feedback_compatible_policy(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Mat& b,
                                           const Mat& gamma, const Vec& g, double magnitude, int grid, double tol) {
  const AmbiguitySubspace amb = ambiguity(b, gamma, tol);
  if (amb.return_dim == 0) throw std::invalid_argument("nothing to exploit");
  if (grid < 2) throw std::invalid_argument("grid needs at least two points");
  const int k = amb.return_dim;
  if (std::pow(static_cast<double>(grid), k) > 1e6) throw std::length_error("ambiguity grid too large");
  const auto gamma_solver = gamma.completeOrthogonalDecomposition();

  const bool bandit = mdp.horizon == 0;
  double j_star = g.maxCoeff();
  if (!bandit) {
    const Plan best = value_iteration(mdp, gamma_solver.solve(g));
    j_star = policy_value(trajectory_distribution(mdp, seqs, best.per_time), g);
  }

  WorstCase w;
  w.regret = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(k, 0);
  Vec c(k);
  while (true) {
    for (int i = 0; i < k; ++i) c(i) = -magnitude + 2.0 * magnitude * idx[i] / (grid - 1);
    const Vec gt = g + amb.return_basis * c;
    const Vec rt = gamma_solver.solve(gt);
    double regret;
    int chosen = -1;
    TimedPolicy pol;
    if (bandit) {
      gt.maxCoeff(&chosen);
      regret = j_star - g(chosen);
    } else {
      const Plan plan = value_iteration(mdp, rt);
      pol = plan.per_time;
      regret = j_star - policy_value(trajectory_distribution(mdp, seqs, pol), g);
    }
    ++w.evaluated;
    const bool better = regret > w.regret + 1e-12 ||
                        (std::fabs(regret - w.regret) <= 1e-12 && c.norm() < w.coefficients.norm() - 1e-12);
    if (better) {
      w.regret = regret;
      w.coefficients = c;
      w.g_tilde = gt;
      w.reward = rt;
      w.policy = pol;
      w.chosen_sequence = chosen;
    }
    int pos = k - 1;
    while (pos >= 0 && ++idx[pos] == grid) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return w;
}

}  // namespace porlhf
