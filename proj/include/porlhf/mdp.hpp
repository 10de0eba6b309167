#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "porlhf/linalg.hpp"

namespace porlhf {

// Finite-horizon tabular MDP. transition[a](s, s') = T(s' | s, a).
struct Mdp {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<Mat> transition;
  Vec initial;
  Vec reward;
  double gamma = 1.0;
  int horizon = 0;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  int state_index(const std::string& name) const;
  int action_index(const std::string& name) const;

  // Throws std::invalid_argument on the first broken invariant.
  void validate() const;
};

// Zero transitions, initial distribution and reward; callers fill them in.
Mdp make_mdp(std::vector<std::string> states, std::vector<std::string> actions, double gamma, int horizon);

using StateSequence = std::vector<int>;
// pi(s, a)
using Policy = Mat;
// One policy per time step 0..horizon-1.
using TimedPolicy = std::vector<Policy>;

std::vector<StateSequence> enumerate_state_sequences(const Mdp& mdp);
std::string sequence_name(const Mdp& mdp, const StateSequence& seq);
int find_sequence(const Mdp& mdp, const std::vector<StateSequence>& seqs, const std::string& name);

Mat return_operator(const Mdp& mdp, const std::vector<StateSequence>& seqs);
Vec compute_returns(const Mat& gamma_op, const Vec& reward);

void validate_policy(const Mdp& mdp, const Policy& pi);
Vec trajectory_distribution(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Policy& pi);
Vec trajectory_distribution(const Mdp& mdp, const std::vector<StateSequence>& seqs, const TimedPolicy& pi);

double policy_value(const Vec& distribution, const Vec& returns);
double policy_value(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Vec& returns, const Policy& pi);

Policy deterministic_policy(const Mdp& mdp, const std::vector<int>& action_per_state);
// Index of the first maximal action per state.
std::vector<int> greedy_actions(const Policy& pi);

// All |A|^|S| deterministic policies in odometer order (state 0 varies slowest).
// With distinct_behaviour only the first policy of each trajectory distribution is kept.
std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp, std::size_t cap = 1000000,
                                                     bool distinct_behaviour = false);

struct Plan {
  std::vector<Mat> q;      // q[t](s, a), t = 0..horizon-1
  Vec value;               // V_0
  TimedPolicy per_time;    // greedy, lowest index on ties
  Policy policy;           // stationary: action at the earliest step each state is reachable
  bool stationary_exact;   // true when no reachable state needs different actions at different steps
};

Plan value_iteration(const Mdp& mdp, const Vec& reward);

}  // namespace porlhf
