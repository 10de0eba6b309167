#include "porlhf/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace porlhf {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kTieTol = 1e-12;

Mat policy_transition(const Mdp& mdp, const Policy& pi) {
  const int n = mdp.num_states();
  Mat tp = Mat::Zero(n, n);
  for (int a = 0; a < mdp.num_actions(); ++a)
    for (int s = 0; s < n; ++s)
      if (pi(s, a) != 0.0) tp.row(s) += pi(s, a) * mdp.transition[a].row(s);
  return tp;
}

}  // namespace

int Mdp::state_index(const std::string& name) const {
  auto it = std::find(states.begin(), states.end(), name);
  if (it == states.end()) throw std::invalid_argument("unknown state '" + name + "'");
  return static_cast<int>(it - states.begin());
}

int Mdp::action_index(const std::string& name) const {
  auto it = std::find(actions.begin(), actions.end(), name);
  if (it == actions.end()) throw std::invalid_argument("unknown action '" + name + "'");
  return static_cast<int>(it - actions.begin());
}

void Mdp::validate() const {
  const int n = num_states();
  if (n == 0) throw std::invalid_argument("mdp has no states");
  if (actions.empty()) throw std::invalid_argument("mdp has no actions");
  if (static_cast<int>(transition.size()) != num_actions())
    throw std::invalid_argument("transition table must have one matrix per action");
  for (int a = 0; a < num_actions(); ++a) {
    const Mat& t = transition[a];
    if (t.rows() != n || t.cols() != n) throw std::invalid_argument("transition matrix has wrong shape");
    for (int s = 0; s < n; ++s) {
      if ((t.row(s).array() < 0.0).any() || !t.row(s).allFinite())
        throw std::invalid_argument("negative or non-finite transition probability");
      if (std::fabs(t.row(s).sum() - 1.0) > kSumTol)
        throw std::invalid_argument("transition row (" + states[s] + ", " + actions[a] + ") does not sum to 1");
    }
  }
  if (initial.size() != n) throw std::invalid_argument("initial distribution has wrong size");
  if ((initial.array() < 0.0).any()) throw std::invalid_argument("negative initial probability");
  if (std::fabs(initial.sum() - 1.0) > kSumTol) throw std::invalid_argument("initial distribution does not sum to 1");
  if (reward.size() != n) throw std::invalid_argument("reward vector has wrong size");
  if (!reward.allFinite()) throw std::invalid_argument("reward is not finite");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("discount must lie in [0, 1]");
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
}

Mdp make_mdp(std::vector<std::string> states, std::vector<std::string> actions, double gamma, int horizon) {
  Mdp m;
  m.states = std::move(states);
  m.actions = std::move(actions);
  const int n = m.num_states();
  m.transition.assign(m.actions.size(), Mat::Zero(n, n));
  m.initial = Vec::Zero(n);
  m.reward = Vec::Zero(n);
  m.gamma = gamma;
  m.horizon = horizon;
  return m;
}

std::vector<StateSequence> enumerate_state_sequences(const Mdp& mdp) {
  const int n = mdp.num_states();
  // Support of the full-support exploration kernel.
  std::vector<std::vector<int>> next(n);
  for (int s = 0; s < n; ++s)
    for (int s2 = 0; s2 < n; ++s2)
      for (int a = 0; a < mdp.num_actions(); ++a)
        if (mdp.transition[a](s, s2) > 0.0) {
          next[s].push_back(s2);
          break;
        }
  std::vector<StateSequence> out;
  StateSequence cur;
  std::function<void()> extend = [&]() {
    if (static_cast<int>(cur.size()) == mdp.horizon + 1) {
      out.push_back(cur);
      return;
    }
    for (int s2 : next[cur.back()]) {
      cur.push_back(s2);
      extend();
      cur.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    if (mdp.initial(s) <= 0.0) continue;
    cur.assign(1, s);
    extend();
  }
  if (out.empty()) throw std::invalid_argument("degenerate initial distribution");
  return out;
}

std::string sequence_name(const Mdp& mdp, const StateSequence& seq) {
  std::string s;
  for (int i : seq) s += mdp.states[i];
  return s;
}

int find_sequence(const Mdp& mdp, const std::vector<StateSequence>& seqs, const std::string& name) {
  for (std::size_t i = 0; i < seqs.size(); ++i)
    if (sequence_name(mdp, seqs[i]) == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown state sequence '" + name + "'");
}

Mat return_operator(const Mdp& mdp, const std::vector<StateSequence>& seqs) {
  Mat g = Mat::Zero(static_cast<Eigen::Index>(seqs.size()), mdp.num_states());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (static_cast<int>(seqs[i].size()) != mdp.horizon + 1)
      throw std::invalid_argument("state sequence length does not match horizon");
    double disc = 1.0;
    for (int s : seqs[i]) {
      g(static_cast<Eigen::Index>(i), s) += disc;
      disc *= mdp.gamma;
    }
  }
  return g;
}

Vec compute_returns(const Mat& gamma_op, const Vec& reward) {
  if (gamma_op.cols() != reward.size()) throw std::invalid_argument("reward dimension mismatch");
  return gamma_op * reward;
}

void validate_policy(const Mdp& mdp, const Policy& pi) {
  if (pi.rows() != mdp.num_states() || pi.cols() != mdp.num_actions())
    throw std::invalid_argument("policy has wrong shape");
  for (int s = 0; s < mdp.num_states(); ++s) {
    if ((pi.row(s).array() < 0.0).any()) throw std::invalid_argument("negative policy probability");
    if (std::fabs(pi.row(s).sum() - 1.0) > kSumTol) throw std::invalid_argument("policy row does not sum to 1");
  }
}

Vec trajectory_distribution(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Policy& pi) {
  return trajectory_distribution(mdp, seqs, TimedPolicy(std::max(mdp.horizon, 0), pi));
}

Vec trajectory_distribution(const Mdp& mdp, const std::vector<StateSequence>& seqs, const TimedPolicy& pi) {
  if (static_cast<int>(pi.size()) != mdp.horizon) throw std::invalid_argument("timed policy length mismatch");
  std::vector<Mat> tp;
  tp.reserve(pi.size());
  for (const Policy& p : pi) {
    validate_policy(mdp, p);
    tp.push_back(policy_transition(mdp, p));
  }
  Vec d(static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const StateSequence& sq = seqs[i];
    double pr = mdp.initial(sq[0]);
    for (int t = 0; t + 1 < static_cast<int>(sq.size()) && pr != 0.0; ++t) pr *= tp[t](sq[t], sq[t + 1]);
    d(static_cast<Eigen::Index>(i)) = pr;
  }
  return d;
}

double policy_value(const Vec& distribution, const Vec& returns) {
  if (distribution.size() != returns.size()) throw std::invalid_argument("returns dimension mismatch");
  return distribution.dot(returns);
}

double policy_value(const Mdp& mdp, const std::vector<StateSequence>& seqs, const Vec& returns, const Policy& pi) {
  if (static_cast<std::size_t>(returns.size()) != seqs.size()) throw std::invalid_argument("returns dimension mismatch");
  return policy_value(trajectory_distribution(mdp, seqs, pi), returns);
}

Policy deterministic_policy(const Mdp& mdp, const std::vector<int>& action_per_state) {
  if (static_cast<int>(action_per_state.size()) != mdp.num_states())
    throw std::invalid_argument("one action per state required");
  Policy p = Policy::Zero(mdp.num_states(), mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s) {
    const int a = action_per_state[s];
    if (a < 0 || a >= mdp.num_actions()) throw std::invalid_argument("action index out of range");
    p(s, a) = 1.0;
  }
  return p;
}

std::vector<int> greedy_actions(const Policy& pi) {
  std::vector<int> out(pi.rows());
  for (Eigen::Index s = 0; s < pi.rows(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < pi.cols(); ++a)
      if (pi(s, a) > pi(s, best)) best = a;
    out[s] = static_cast<int>(best);
  }
  return out;
}

std::vector<Policy> enumerate_deterministic_policies(const Mdp& mdp, std::size_t cap, bool distinct_behaviour) {
  const int n = mdp.num_states(), k = mdp.num_actions();
  double count = std::pow(static_cast<double>(k), n);
  if (count > static_cast<double>(cap)) throw std::length_error("policy enumeration cap exceeded");
  std::vector<StateSequence> seqs;
  if (distinct_behaviour) seqs = enumerate_state_sequences(mdp);
  std::set<std::vector<double>> seen;
  std::vector<Policy> out;
  std::vector<int> choice(n, 0);
  while (true) {
    Policy p = deterministic_policy(mdp, choice);
    bool keep = true;
    if (distinct_behaviour) {
      const Vec d = trajectory_distribution(mdp, seqs, p);
      keep = seen.insert(std::vector<double>(d.data(), d.data() + d.size())).second;
    }
    if (keep) out.push_back(std::move(p));
    int pos = n - 1;
    while (pos >= 0 && ++choice[pos] == k) choice[pos--] = 0;
    if (pos < 0) break;
  }
  return out;
}

Plan value_iteration(const Mdp& mdp, const Vec& reward) {
  const int n = mdp.num_states(), k = mdp.num_actions(), h = mdp.horizon;
  if (reward.size() != n) throw std::invalid_argument("reward dimension mismatch");
  if (!reward.allFinite()) throw std::invalid_argument("reward contains NaN or inf");
  Plan plan;
  plan.q.assign(h, Mat::Zero(n, k));
  plan.per_time.assign(h, Policy::Zero(n, k));
  Vec v = reward;
  for (int t = h - 1; t >= 0; --t) {
    Mat& q = plan.q[t];
    for (int a = 0; a < k; ++a) q.col(a) = reward + mdp.gamma * (mdp.transition[a] * v);
    Vec nv(n);
    for (int s = 0; s < n; ++s) {
      int best = 0;
      for (int a = 1; a < k; ++a)
        if (q(s, a) > q(s, best) + kTieTol * (1.0 + std::fabs(q(s, best)))) best = a;
      plan.per_time[t](s, best) = 1.0;
      nv(s) = q(s, best);
    }
    v = nv;
  }
  plan.value = v;

  // Earliest decision step at which each state occurs.
  std::vector<int> first(n, -1);
  std::vector<std::set<int>> when(n);
  for (const StateSequence& sq : enumerate_state_sequences(mdp))
    for (int t = 0; t < h; ++t) when[sq[t]].insert(t);
  plan.policy = Policy::Zero(n, k);
  plan.stationary_exact = true;
  for (int s = 0; s < n; ++s) {
    if (when[s].empty()) {
      plan.policy(s, 0) = 1.0;
      continue;
    }
    const int t0 = *when[s].begin();
    const int a0 = greedy_actions(plan.per_time[t0])[s];
    plan.policy(s, a0) = 1.0;
    for (int t : when[s]) {
      const double best = plan.q[t].row(s).maxCoeff();
      if (plan.q[t](s, a0) < best - kTieTol * (1.0 + std::fabs(best))) plan.stationary_exact = false;
    }
  }
  return plan;
}

}  // namespace porlhf
