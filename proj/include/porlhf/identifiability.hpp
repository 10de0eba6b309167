#pragma once

#include <optional>
#include <string>
#include <vector>

#include "porlhf/linalg.hpp"
#include "porlhf/mdp.hpp"

namespace porlhf {

struct AmbiguitySubspace {
  Mat return_basis;  // orthonormal basis of ker B ∩ im Gamma, columns
  Mat reward_basis;  // orthonormal basis of ker(B Gamma), columns
  int return_dim = 0;
  int reward_dim = 0;
  int ker_b_dim = 0;
  int im_gamma_dim = 0;
  int ker_gamma_dim = 0;
  int stacked_dim = 0;  // intersection dimension from the stacked nullspace
  double tolerance = kRankTolerance;
};

// Throws std::logic_error when the two intersection methods disagree.
AmbiguitySubspace ambiguity(const Mat& b, const Mat& gamma, double tol = kRankTolerance);

struct ExactDims {
  int ker_b = 0, im_gamma = 0, return_ambiguity = 0, reward_ambiguity = 0;
};
// Rational Gaussian elimination on snapped entries.
ExactDims exact_ambiguity_dims(const Mat& b, const Mat& gamma);

bool is_feedback_compatible(const Vec& g_tilde, const Vec& g, const Mat& b, double beta, double tol = 1e-10);
// Same verdict via the subspace: g_tilde - g in span{1} + ker B ∩ im Gamma.
bool differs_by_ambiguity(const Vec& g_tilde, const Vec& g, const AmbiguitySubspace& amb, double tol = 1e-9);

struct LadderReport {
  bool ker_b_trivial = false;          // (i)
  bool ker_b_gamma_trivial = false;    // (ii)
  bool intersection_trivial = false;   // (iii)
  bool theta_checked = false;
  bool theta_injective = false;
  bool theta_kron_checked = false;
  bool theta_kron_injective = false;
  bool identifiable = false;                       // up to an additive constant, observations known
  bool identifiable_without_observations = false;  // additionally through Theta (x) Theta
  std::string verdict;
};

LadderReport identifiability_ladder(const Mat& b, const Mat& gamma, const Mat* theta = nullptr,
                                    double tol = kRankTolerance, std::size_t kron_cap = 100000000);

struct SeparabilityResult {
  bool separable = false;
  Vec reward;
  double residual = 0;
};
SeparabilityResult time_separable(const Vec& g, const Mat& gamma, double tol = 1e-9);

// Least-squares preimage of obs_returns under B restricted to im Gamma.
Vec reconstruct_return(const Mat& b_assumed, const Vec& obs_returns, const Mat& gamma, double tol = kRankTolerance);

struct RobustnessBound {
  double bound = 0;    // rho |G| Q(X, Y)
  double X = 0;        // |(Bbar^T Bbar)^-1|
  double Y = 0;        // |Bbar|
  double rho_max = 0;  // largest rho meeting both preconditions
  bool square = false;
  double square_bound = 0;  // rho 2 |B| |G| |B^-1|^2, valid for rho <= square_rho_max
  double square_rho_max = 0;
};
double bound_polynomial(double x, double y);
RobustnessBound robustness_bound(const Mat& b, const Mat& gamma, const Vec& g, double rho, double tol = kRankTolerance);

struct WorstCase {
  Vec coefficients;
  Vec g_tilde;
  Vec reward;
  TimedPolicy policy;   // empty for horizon 0
  int chosen_sequence = -1;  // horizon 0: the arm picked
  double regret = 0;
  int evaluated = 0;
};

// Grid search over G + span(return ambiguity basis), coefficients in [-magnitude, magnitude].
WorstCase worst_feedback_compatible_policy(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Mat& b,
                                           const Mat& gamma, const Vec& g, double magnitude, int grid = 21,
                                           double tol = kRankTolerance);

}  // namespace porlhf
