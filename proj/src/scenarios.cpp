#include "porlhf/scenarios.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "porlhf/identifiability.hpp"

namespace porlhf {

namespace {

void require_prob(const char* name, double v) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << name << " must lie in (0, 1), got " << v;
    throw std::invalid_argument(os.str());
  }
}

void require_nonneg(const char* name, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be >= 0, got " << v;
    throw std::invalid_argument(os.str());
  }
}

void set(Mdp& m, const std::string& from, const std::string& action, const std::string& to, double p) {
  m.transition[m.action_index(action)](m.state_index(from), m.state_index(to)) = p;
}

// Every action not explicitly set moves to `fallback`.
void fill_default(Mdp& m, const std::string& fallback) {
  const int f = m.state_index(fallback);
  for (auto& t : m.transition)
    for (int s = 0; s < m.num_states(); ++s)
      if (t.row(s).sum() == 0.0) t(s, f) = 1.0;
}

std::vector<int> obs_map(const Mdp& m, const std::vector<std::string>& names,
                         const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<int> map(m.num_states(), -1);
  for (const auto& [s, o] : pairs) {
    int idx = -1;
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == o) idx = static_cast<int>(i);
    map[m.state_index(s)] = idx;
  }
  return map;
}

// Prior weights by sequence name; unnamed sequences get weight 1.
Vec prior_weights(const Scenario& s, const std::map<std::string, double>& w) {
  Vec prior = Vec::Ones(static_cast<Eigen::Index>(s.sequences.size()));
  for (const auto& [name, v] : w) {
    const int i = s.sequence_index(name);
    if (i < 0) throw std::logic_error("sequence " + name + " not reachable in " + s.name);
    prior(i) = v;
  }
  return prior;
}

void posterior_from_weights(Scenario& s, const std::map<std::string, double>& w) {
  s.belief = posterior_deterministic(prior_weights(s, w), s.space.sequence_map, s.space.size());
}

Scenario bandit(const std::string& name, const std::vector<std::string>& arms, const Vec& reward) {
  Scenario s;
  s.name = name;
  s.mdp = make_mdp(arms, {"pull"}, 1.0, 0);
  s.mdp.transition[0] = Mat::Identity(arms.size(), arms.size());
  s.mdp.initial = Vec::Constant(arms.size(), 1.0 / arms.size());
  s.mdp.reward = reward;
  return s;
}

double param(const std::map<std::string, double>& p, const std::string& k) {
  auto it = p.find(k);
  if (it == p.end()) throw std::logic_error("missing parameter " + k);
  return it->second;
}

std::map<std::string, double> merge(std::map<std::string, double> defaults, const std::map<std::string, double>& overrides,
                                    const std::string& name) {
  for (const auto& [k, v] : overrides) {
    if (!defaults.count(k)) throw std::invalid_argument("scenario " + name + " has no parameter '" + k + "'");
    defaults[k] = v;
  }
  return defaults;
}

Mdp example_a_mdp(double p) {
  Mdp m = make_mdp({"S", "I", "W", "W_H", "L", "L_H", "T"}, {"a_I", "a_C", "a_H", "a_T"}, 1.0, 3);
  set(m, "S", "a_I", "I", 1);
  set(m, "S", "a_C", "L", 1);
  set(m, "S", "a_H", "L_H", 1);
  set(m, "I", "a_C", "W", p);
  set(m, "I", "a_C", "L", 1 - p);
  set(m, "I", "a_H", "W_H", p);
  set(m, "I", "a_H", "L_H", 1 - p);
  fill_default(m, "T");
  m.initial(m.state_index("S")) = 1.0;
  return m;
}

Mdp example_b_mdp(double p) {
  Mdp m = make_mdp({"S", "I", "W", "W_V", "L", "T"}, {"a_I", "a_D", "a_V", "a_T"}, 1.0, 3);
  set(m, "S", "a_I", "I", 1);
  set(m, "S", "a_D", "L", 1);
  set(m, "S", "a_V", "L", 1);
  set(m, "I", "a_D", "W", p);
  set(m, "I", "a_D", "L", 1 - p);
  set(m, "I", "a_V", "W_V", p);
  set(m, "I", "a_V", "L", 1 - p);
  fill_default(m, "T");
  m.initial(m.state_index("S")) = 1.0;
  return m;
}

// Solves Gamma R = targets with some states pinned at zero; throws if the
// system is inconsistent or leaves a free direction.
Vec solve_anchored(const Scenario& s, const std::map<std::string, double>& targets, const std::vector<std::string>& pinned) {
  const int n = s.mdp.num_states();
  std::vector<int> free;
  for (int i = 0; i < n; ++i) {
    bool pin = false;
    for (const auto& name : pinned) pin = pin || s.mdp.states[i] == name;
    if (!pin) free.push_back(i);
  }
  Mat a(targets.size(), free.size());
  Vec g(targets.size());
  int row = 0;
  for (const auto& [name, v] : targets) {
    const int i = s.sequence_index(name);
    if (i < 0) throw std::logic_error("target sequence " + name + " not reachable");
    for (std::size_t j = 0; j < free.size(); ++j) a(row, j) = s.gamma(i, free[j]);
    g(row++) = v;
  }
  if (numeric_rank(a) != static_cast<int>(free.size())) throw std::logic_error("reward derivation is underdetermined");
  const Vec x = a.colPivHouseholderQr().solve(g);
  if ((a * x - g).norm() > 1e-9) throw std::logic_error("return table is not realizable by a reward function");
  Vec r = Vec::Zero(n);
  for (std::size_t j = 0; j < free.size(); ++j) r(free[j]) = x(j);
  return r;
}

// Value of the best history-dependent plan for per-sequence values, and the
// action picked at the first prefix (shortest, then DFS order) ending in `decision`.
struct TreeChoice {
  double value = 0;
  int action = -1;
  int depth = -1;
};

TreeChoice tree_search(const Scenario& s, const Vec& values, int decision) {
  const Mdp& m = s.mdp;
  std::map<StateSequence, int> index;
  for (std::size_t i = 0; i < s.sequences.size(); ++i) index[s.sequences[i]] = static_cast<int>(i);
  TreeChoice choice;
  std::function<double(StateSequence&)> rec = [&](StateSequence& prefix) -> double {
    if (static_cast<int>(prefix.size()) == m.horizon + 1) return values(index.at(prefix));
    const int last = prefix.back();
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < m.num_actions(); ++a) {
      double v = 0;
      for (int t = 0; t < m.num_states(); ++t) {
        const double pr = m.transition[a](last, t);
        if (pr <= 0) continue;
        prefix.push_back(t);
        v += pr * rec(prefix);
        prefix.pop_back();
      }
      if (a == 0 || v > best + 1e-12 * std::max(1.0, std::fabs(best))) {
        best = v;
        best_a = a;
      }
    }
    const int depth = static_cast<int>(prefix.size()) - 1;
    if (last == decision && (choice.depth < 0 || depth < choice.depth)) {
      choice.depth = depth;
      choice.action = best_a;
    }
    return best;
  };
  double total = 0;
  for (int s0 = 0; s0 < m.num_states(); ++s0) {
    if (m.initial(s0) <= 0) continue;
    StateSequence prefix{s0};
    total += m.initial(s0) * rec(prefix);
  }
  choice.value = total;
  return choice;
}

}  // namespace

void Scenario::derive() {
  mdp.validate();
  obs.validate(mdp.num_states());
  sequences = enumerate_state_sequences(mdp);
  space = build_observation_space(obs, sequences);
  gamma = return_operator(mdp, sequences);
  theta = ungrounding_operator(space);
  returns = compute_returns(gamma, mdp.reward);
}

void Scenario::validate() const {
  mdp.validate();
  obs.validate(mdp.num_states());
  if (belief.rows() != space.size() || belief.cols() != static_cast<Eigen::Index>(sequences.size()))
    throw std::invalid_argument("belief has wrong shape for scenario " + name);
  const auto problems = validate_belief(belief, space);
  if (!problems.empty()) throw std::invalid_argument("belief of " + name + " invalid: " + problems.front());
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
}

int Scenario::decision_index() const { return decision_state.empty() ? -1 : mdp.state_index(decision_state); }

Vec Scenario::obs_returns() const { return observation_return(belief, returns, theta); }

int Scenario::canonical_action(int state, int action) const {
  if (default_action.empty() || action < 0) return action;
  const int d = mdp.action_index(default_action);
  return mdp.transition[d].row(state) == mdp.transition[action].row(state) ? d : action;
}

Scenario example_a(double p, double r, double p_hide, double p_w, double p_hide_empty) {
  require_prob("p", p);
  require_nonneg("r", r);
  require_prob("p_hide", p_hide);
  require_prob("p_w", p_w);
  if (p_hide_empty < 0) p_hide_empty = p_hide;
  require_prob("p_hide_empty", p_hide_empty);

  Scenario s;
  s.name = "example_a";
  s.mdp = example_a_mdp(p);
  const std::vector<std::string> on{"o_0", "o_I", "o_W", "o_L"};
  s.obs = deterministic_observations(
      on, obs_map(s.mdp, on, {{"S", "o_0"}, {"I", "o_I"}, {"W", "o_W"}, {"W_H", "o_W"}, {"L", "o_L"}, {"L_H", "o_0"}, {"T", "o_0"}}));
  s.derive();
  s.mdp.reward = solve_anchored(s,
                                {{"STTT", 0}, {"SL_HTT", -5 - r}, {"SLTT", -5}, {"SITT", 1}, {"SIL_HT", -4 - r},
                                 {"SILT", -4}, {"SIWT", 11}, {"SIW_HT", 11}},
                                {"S", "T"});
  s.returns = compute_returns(s.gamma, s.mdp.reward);
  posterior_from_weights(s, {{"STTT", 1 - p_hide_empty},
                             {"SL_HTT", p_hide_empty},
                             {"SITT", 1 - p_hide},
                             {"SIL_HT", p_hide},
                             {"SIWT", p_w},
                             {"SIW_HT", 1 - p_w}});
  s.parameters = {{"p", p}, {"r", r}, {"p_hide", p_hide}, {"p_w", p_w}, {"p_hide_empty", p_hide_empty}};
  s.decision_state = "I";
  s.default_action = "a_T";
  s.notes.push_back("rewards solved from the return table with R(S) = R(T) = 0");
  s.validate();
  return s;
}

namespace {

Scenario example_b_with(double p, double r, double p_default, const Vec& reward) {
  Scenario s;
  s.name = "example_b";
  s.mdp = example_b_mdp(p);
  const std::vector<std::string> on{"o_0", "o_I", "o_W", "o_L"};
  s.obs = deterministic_observations(
      on, obs_map(s.mdp, on, {{"S", "o_0"}, {"I", "o_I"}, {"W", "o_0"}, {"W_V", "o_W"}, {"L", "o_L"}, {"T", "o_0"}}));
  s.mdp.reward = reward;
  s.derive();
  posterior_from_weights(s, {{"SIWT", p_default}, {"SITT", 1 - p_default}});
  s.parameters = {{"p", p}, {"r", r}, {"p_default", p_default}};
  s.decision_state = "I";
  s.default_action = "a_T";
  return s;
}

// Expected J_obs of taking `action` at I and then stopping, on the scenario's own policy set.
double jobs_after_i(const Scenario& s, const Vec& gobs, const std::string& action) {
  std::vector<int> acts(s.mdp.num_states(), s.mdp.action_index("a_T"));
  acts[s.mdp.state_index("S")] = s.mdp.action_index("a_I");
  acts[s.mdp.state_index("I")] = s.mdp.action_index(action);
  const Vec d = trajectory_distribution(s.mdp, s.sequences, deterministic_policy(s.mdp, acts));
  return observation_value(d, gobs);
}

}  // namespace

Scenario example_b(double p, double r, double p_default) {
  require_prob("p", p);
  require_nonneg("r", r);
  require_prob("p_default", p_default);

  // Unknowns x = (R(I), R(W), R(W_V), R(L)) with R(S) = R(T) = 0.
  //  E+(terminate after I) = p_D R(W)                       = 5 p_D
  //  E-(attempt default)   = p (1 - p_D) R(W)               = 5 p (1 - p_D)
  //  J_obs(a_V) = J_obs(a_T) at p_D = q, for two success rates u:
  //    u R(W_V) + (1 - u) R(L) = u (6 - r) - 1
  Mat a(4, 4);
  Vec rhs(4);
  a << 0, p_default, 0, 0,
       0, p * (1 - p_default), 0, 0,
       0, 0, 0.5, 0.5,
       0, 0, 0.25, 0.75;
  rhs << 5 * p_default, 5 * p * (1 - p_default), 0.5 * (6 - r) - 1, 0.25 * (6 - r) - 1;
  const Vec x = a.completeOrthogonalDecomposition().solve(rhs);
  if ((a * x - rhs).norm() > 1e-9) throw std::logic_error("example_b identities are inconsistent");
  Vec reward = Vec::Zero(6);
  reward(1) = x(0);
  reward(2) = x(1);
  reward(3) = x(2);
  reward(4) = x(3);

  Scenario s = example_b_with(p, r, p_default, reward);

  // First-principles checks on the built scenario.
  const Vec gobs = s.obs_returns();
  const EstimationErrors e = estimation_errors(s.returns, gobs);
  const double eplus_term = e.plus(s.sequence_index("SITT"));
  if (std::fabs(eplus_term - 5 * p_default) > 1e-9) throw std::logic_error("example_b: E+ of terminate policy is off");
  const double eminus_star = p * e.minus(s.sequence_index("SIWT")) + (1 - p) * e.minus(s.sequence_index("SILT"));
  if (std::fabs(eminus_star - 5 * p * (1 - p_default)) > 1e-9) throw std::logic_error("example_b: E- of optimal policy is off");
  const double q = threshold_b(p, r);
  if (q > 0 && q < 1) {
    const Scenario at_q = example_b_with(p, r, q, reward);
    const Vec g2 = at_q.obs_returns();
    if (std::fabs(jobs_after_i(at_q, g2, "a_V") - jobs_after_i(at_q, g2, "a_T")) > 1e-9)
      throw std::logic_error("example_b: decision threshold is off");
  }
  s.notes.push_back("R(I) is not fixed by the identities; pinned to 0 by the minimum-norm solution");
  s.notes.push_back("rewards calibrated with R(S) = R(T) = 0");
  s.validate();
  return s;
}

double threshold_a(double r) { return 5.0 / (5.0 + r); }
double threshold_b(double p, double r) { return (p * (6.0 - r) - 1.0) / 5.0; }

Scenario chain_example(double gamma) {
  Scenario s;
  s.name = "chain";
  s.mdp = make_mdp({"a", "b"}, {"go"}, gamma, 1);
  s.mdp.transition[0] << 0, 1, 0, 1;
  s.mdp.initial << 1, 0;
  s.mdp.reward << 1, 1;
  s.obs = identity_observations(s.mdp);
  s.derive();
  s.belief = Mat::Identity(s.space.size(), static_cast<Eigen::Index>(s.sequences.size()));
  s.parameters = {{"gamma", gamma}};
  s.validate();
  return s;
}

std::vector<std::string> catalog_names() {
  return {"resolving_ambiguity", "noise_goes_well", "reward_learning_goes_wrong", "cheating",
          "human_model_independence", "modeling_somewhat_crucial", "all_quadrants", "has_all_properties"};
}

Scenario catalog(const std::string& name, const std::map<std::string, double>& overrides) {
  if (name == "resolving_ambiguity") {
    const auto ps = merge({{"p", 0.3}, {"magnitude", 10}}, overrides, name);
    const double p = param(ps, "p");
    require_prob("p", p);
    Vec r(3);
    r << 0, 0, 1;
    Scenario s = bandit(name, {"a", "b", "c"}, r);
    s.obs = deterministic_observations({"o", "c"}, {0, 0, 1});
    s.derive();
    posterior_from_weights(s, {{"a", p}, {"b", 1 - p}});
    s.parameters = ps;
    s.golden = {{"return_ambiguity_dim", 1}, {"identifiable", 0}, {"obs_optimal_action", 2},
                {"true_optimal_action", 2}, {"worst_case_arm", 0}};
    s.validate();
    return s;
  }
  if (name == "noise_goes_well") {
    const auto ps = merge({}, overrides, name);
    Vec r(2);
    r << -1, 2;
    Scenario s = bandit(name, {"a", "b"}, r);
    s.obs.observations = {"o_a", "o_b"};
    s.obs.kernel.resize(2, 2);
    s.obs.kernel << 2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3;
    s.derive();
    Policy pull = Mat::Ones(2, 1);
    s.belief = policy_aware_belief(s.mdp, pull, s.obs, s.sequences, s.space);
    s.parameters = ps;
    s.golden = {{"ker_b_trivial", 1}, {"identifiable", 1}, {"identifiable_without_observations", 1},
                {"return_ambiguity_dim", 0}};
    s.validate();
    return s;
  }
  if (name == "reward_learning_goes_wrong") {
    const auto ps = merge({{"b_a", 0.5}, {"magnitude", 10}}, overrides, name);
    const double q = param(ps, "b_a");
    require_prob("b_a", q);
    Vec r(3);
    r << 0, 2, 1;
    Scenario s = bandit(name, {"a", "b", "c"}, r);
    s.obs = deterministic_observations({"o", "b"}, {0, 1, 0});
    s.derive();
    posterior_from_weights(s, {{"a", q}, {"c", 1 - q}});
    s.parameters = ps;
    s.golden = {{"ker_b_trivial", 0}, {"return_ambiguity_dim", 1}, {"identifiable", 0}, {"worst_case_arm", 0}};
    s.validate();
    return s;
  }
  if (name == "cheating") {
    const auto ps = merge({{"p", 0.3}, {"gamma", 1.0}}, overrides, name);
    const double p = param(ps, "p");
    require_prob("p", p);
    Scenario s;
    s.name = name;
    s.mdp = make_mdp({"s", "s1", "s2"}, {"go"}, param(ps, "gamma"), 3);
    s.mdp.transition[0] << 1.0 / 3, 1.0 / 3, 1.0 / 3,
                           1 - p, p, 0,
                           p, 0, 1 - p;
    s.mdp.initial << 1, 0, 0;
    s.mdp.reward << 0, 1, 2;
    s.obs = deterministic_observations({"s", "o"}, {0, 1, 1});
    s.derive();
    s.belief = policy_aware_belief(s.mdp, Mat::Ones(3, 1), s.obs, s.sequences, s.space);
    s.parameters = ps;
    const bool ident = std::fabs(p - 0.5) > 1e-12;
    s.golden = {{"ker_b_trivial", 0}, {"ker_b_gamma_trivial", ident ? 1.0 : 0.0}, {"identifiable", ident ? 1.0 : 0.0}};
    s.notes.push_back("s1 and s2 stand for s' and s''");
    s.validate();
    return s;
  }
  if (name == "human_model_independence") {
    const auto ps = merge({{"eps", 0.1}}, overrides, name);
    const double eps = param(ps, "eps");
    require_prob("eps", eps);
    Scenario s;
    s.name = name;
    s.mdp = make_mdp({"s", "a", "b", "c"}, {"a", "b", "c"}, 1.0, 1);
    set(s.mdp, "s", "a", "a", 1);
    set(s.mdp, "s", "b", "b", 1);
    set(s.mdp, "s", "c", "c", 1 - eps);
    set(s.mdp, "s", "c", "a", eps);
    for (const char* x : {"a", "b", "c"})
      for (const char* act : {"a", "b", "c"}) set(s.mdp, x, act, x, 1);
    s.mdp.initial << 1, 0, 0, 0;
    s.mdp.reward << 0, 0, 0, 1;
    s.obs = deterministic_observations({"s", "a", "o"}, {0, 1, 2, 2});
    s.derive();
    posterior_from_weights(s, {});
    s.parameters = ps;
    s.decision_state = "s";
    s.golden = {{"obs_optimal_action", 1}, {"true_optimal_action", 2}, {"dilemma_holds", 1}};
    s.validate();
    return s;
  }
  if (name == "modeling_somewhat_crucial") {
    const auto ps = merge({{"p_a", 0.4}, {"p_b", 0.3}, {"p_c", 0.3}, {"gamma", 0.9}, {"lambda_mean", 0.5}, {"variant", 0}},
                          overrides, name);
    const double pa = param(ps, "p_a"), pb = param(ps, "p_b"), pc = param(ps, "p_c");
    const double g = param(ps, "gamma"), lm = param(ps, "lambda_mean");
    const int variant = static_cast<int>(param(ps, "variant"));
    require_prob("p_a", pa);
    require_prob("p_b", pb);
    require_prob("lambda_mean", lm);
    if (!(pc > 0) || std::fabs(pa + pb + pc - 1) > 1e-12) throw std::invalid_argument("p_a + p_b + p_c must be 1");
    if (!(g >= 0 && g < 1)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (variant != 0 && variant != 1) throw std::invalid_argument("variant must be 0 or 1");
    Scenario s;
    s.name = name;
    s.mdp = make_mdp({"a", "b", "c"}, {"b", "c"}, g, 2);
    set(s.mdp, "a", "b", "b", 1);
    set(s.mdp, "a", "c", "c", 1);
    for (const char* act : {"b", "c"}) {
      set(s.mdp, "b", act, "c", 1);
      set(s.mdp, "c", act, "c", 1);
    }
    s.mdp.initial << pa, pb, pc;
    // variant 0: R(b) > 0 and R(a) << 0; variant 1: R(b) < 0 and R(a) >> 0.
    if (variant == 0) s.mdp.reward << -5, 1, 0;
    else s.mdp.reward << 5, -1, 0;
    s.obs = deterministic_observations({"o", "c"}, {0, 0, 1});
    s.derive();
    PolicyMixture prior;
    prior.weights = {lm, 1 - lm};
    prior.policies = {deterministic_policy(s.mdp, {1, 0, 0}), deterministic_policy(s.mdp, {0, 0, 0})};
    s.belief = bayes_belief(s.mdp, s.obs, prior, s.sequences, s.space);
    s.parameters = ps;
    s.decision_state = "a";
    const bool ident = std::fabs(pb - g * lm * pa) > 1e-12;
    s.golden = {{"return_ambiguity_dim", ident ? 0.0 : 1.0},
                {"identifiable", ident ? 1.0 : 0.0},
                {"obs_optimal_action", variant == 0 ? 1.0 : 0.0},
                {"true_optimal_action", variant == 0 ? 0.0 : 1.0},
                {"naive_deceptive_inflation", variant == 0 ? 1.0 : 0.0},
                {"naive_overjustification", variant == 0 ? 0.0 : 1.0},
                {"dilemma_holds", 1}};
    s.validate();
    return s;
  }
  if (name == "all_quadrants") {
    const auto ps = merge({{"variant", 1}, {"eps", -1}}, overrides, name);
    const int variant = static_cast<int>(param(ps, "variant"));
    if (variant < 1 || variant > 4) throw std::invalid_argument("variant must be 1..4");
    double eps = param(ps, "eps");
    if (eps < 0) eps = variant == 3 ? 0.8 : 0.1;
    require_prob("eps", eps);
    Scenario s;
    s.name = name;
    s.mdp = make_mdp({"s", "a", "b", "c", "d"}, {"a", "b", "c", "d"}, 1.0, 1);
    for (const char* act : {"a", "b", "c", "d"}) set(s.mdp, "s", act, act, 1);
    // slip: action `from` lands in `to` with probability eps
    const char* from = variant <= 2 ? "d" : (variant == 3 ? "a" : "b");
    const char* to = variant <= 2 ? "b" : "d";
    set(s.mdp, "s", from, from, 1 - eps);
    set(s.mdp, "s", from, to, eps);
    for (const char* x : {"a", "b", "c", "d"})
      for (const char* act : {"a", "b", "c", "d"}) set(s.mdp, x, act, x, 1);
    s.mdp.initial << 1, 0, 0, 0, 0;
    switch (variant) {
      case 1: s.mdp.reward << 0, 3, -10, 2, 1; break;
      case 2: s.mdp.reward << 0, 2, -10, 1, 3; break;
      default: s.mdp.reward << 0, 4, 3, 2, 1; break;
    }
    s.obs = deterministic_observations({"s", "ab", "cd"}, {0, 1, 1, 2, 2});
    s.derive();
    posterior_from_weights(s, {});
    auto ps2 = ps;
    ps2["eps"] = eps;
    s.parameters = ps2;
    s.decision_state = "s";
    // (obs-optimal action, true optimal action, sign of its misleadingness)
    const double facts[4][3] = {{2, 0, -1}, {2, 0, 1}, {1, 1, 1}, {0, 0, -1}};
    const auto& f = facts[variant - 1];
    s.golden = {{"obs_optimal_action", f[0]}, {"true_optimal_action", f[1]}, {"obs_optimal_misleadingness_sign", f[2]}};
    s.validate();
    return s;
  }
  if (name == "has_all_properties") {
    const auto ps = merge({{"variant", 1}, {"b", -1}, {"eps", 0.5}}, overrides, name);
    const int variant = static_cast<int>(param(ps, "variant"));
    if (variant != 1 && variant != 2) throw std::invalid_argument("variant must be 1 or 2");
    double b = param(ps, "b");
    if (b < 0) b = variant == 1 ? 0.5 : 0.1;
    require_prob("b", b);
    const double eps = param(ps, "eps");
    if (variant == 2) require_prob("eps", eps);
    Scenario s;
    s.name = name;
    s.mdp = make_mdp({"S", "A", "B", "C", "T"}, {"to_A", "to_B", "to_C", "to_T"}, 1.0, 3);
    if (variant == 1) {
      set(s.mdp, "S", "to_A", "A", 1);
    } else {
      set(s.mdp, "S", "to_A", "A", 1 - eps);
      set(s.mdp, "S", "to_A", "B", eps);
    }
    set(s.mdp, "S", "to_B", "B", 1);
    set(s.mdp, "S", "to_C", "C", 1);
    set(s.mdp, "A", "to_C", "C", 1);
    set(s.mdp, "B", "to_C", "C", 1);
    fill_default(s.mdp, "T");
    s.mdp.initial << 1, 0, 0, 0, 0;
    // variant 1: R(A) << 0 < R(T); variant 2: R(A) >> 0 > R(T)
    if (variant == 1) s.mdp.reward << 0, -10, 0, 0, 1;
    else s.mdp.reward << 0, 10, 0, 0, -1;
    s.obs = deterministic_observations({"S", "X", "B", "C"}, {0, 1, 2, 3, 1});
    s.derive();
    posterior_from_weights(s, {{"STTT", b}, {"SATT", 1 - b}});
    auto ps2 = ps;
    ps2["b"] = b;
    s.parameters = ps2;
    s.decision_state = "S";
    s.golden = {{"return_ambiguity_dim", 0},
                {"identifiable", 1},
                {"naive_deceptive_inflation", variant == 2 ? 1.0 : 0.0},
                {"naive_overjustification", variant == 1 ? 1.0 : 0.0},
                {"dilemma_holds", 1}};
    s.validate();
    return s;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& name, const std::map<std::string, double>& overrides) {
  auto get = [&](const std::map<std::string, double>& defaults) { return merge(defaults, overrides, name); };
  if (name == "example_a") {
    const auto ps = get({{"p", 0.5}, {"r", 1}, {"p_hide", 0.5}, {"p_w", 0.5}, {"p_hide_empty", -1}});
    return example_a(ps.at("p"), ps.at("r"), ps.at("p_hide"), ps.at("p_w"), ps.at("p_hide_empty"));
  }
  if (name == "example_b") {
    const auto ps = get({{"p", 0.5}, {"r", 1}, {"p_default", 0.5}});
    return example_b(ps.at("p"), ps.at("r"), ps.at("p_default"));
  }
  if (name == "chain") return chain_example(get({{"gamma", 0.9}}).at("gamma"));
  return catalog(name, overrides);
}

OptimalBehaviour optimal_behaviour(const Scenario& s) {
  OptimalBehaviour o;
  const Vec gobs = s.obs_returns();
  auto argmax = [](const std::vector<double>& v) {
    int best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best] + 1e-12 * std::max(1.0, std::fabs(v[best]))) best = static_cast<int>(i);
    return best;
  };
  std::vector<double> j, jo;
  if (s.mdp.horizon == 0) {
    for (Eigen::Index i = 0; i < s.returns.size(); ++i) {
      Vec d = Vec::Zero(s.returns.size());
      d(i) = 1;
      o.measures.push_back(measure_policy(d, s.returns, gobs));
      j.push_back(o.measures.back().J);
      jo.push_back(o.measures.back().J_obs);
    }
    o.best_true = argmax(j);
    o.best_obs = argmax(jo);
    o.action_true = o.best_true;
    o.action_obs = o.best_obs;
    return o;
  }
  o.policies = enumerate_deterministic_policies(s.mdp, 1000000, true);
  for (const Policy& pi : o.policies) {
    o.measures.push_back(measure_policy(trajectory_distribution(s.mdp, s.sequences, pi), s.returns, gobs));
    j.push_back(o.measures.back().J);
    jo.push_back(o.measures.back().J_obs);
  }
  o.best_true = argmax(j);
  o.best_obs = argmax(jo);
  const int d = s.decision_index();
  if (d >= 0) {
    o.action_true = s.canonical_action(d, greedy_actions(o.policies[o.best_true])[d]);
    o.action_obs = s.canonical_action(d, greedy_actions(o.policies[o.best_obs])[d]);
  }
  return o;
}

int best_decision_action(const Scenario& s, const Vec& values) {
  const int d = s.decision_index();
  if (d < 0) throw std::invalid_argument("scenario " + s.name + " has no decision state");
  return s.canonical_action(d, tree_search(s, values, d).action);
}

std::vector<GoldenCheck> check_golden(const Scenario& s) {
  std::vector<GoldenCheck> out;
  if (s.golden.empty()) return out;
  const AmbiguitySubspace amb = ambiguity(s.belief, s.gamma);
  const LadderReport ladder = identifiability_ladder(s.belief, s.gamma, &s.theta);
  const OptimalBehaviour ob = optimal_behaviour(s);
  auto b = [](bool x) { return x ? 1.0 : 0.0; };
  for (const GoldenFact& f : s.golden) {
    double actual = std::nan("");
    if (f.key == "return_ambiguity_dim") actual = amb.return_dim;
    else if (f.key == "reward_ambiguity_dim") actual = amb.reward_dim;
    else if (f.key == "ker_b_trivial") actual = b(ladder.ker_b_trivial);
    else if (f.key == "ker_b_gamma_trivial") actual = b(ladder.ker_b_gamma_trivial);
    else if (f.key == "identifiable") actual = b(ladder.identifiable);
    else if (f.key == "identifiable_without_observations") actual = b(ladder.identifiable_without_observations);
    else if (f.key == "obs_optimal_action") actual = ob.action_obs;
    else if (f.key == "true_optimal_action") actual = ob.action_true;
    else if (f.key == "obs_optimal_misleadingness_sign") {
      const PolicyMeasures& m = ob.measures[ob.best_obs];
      const double diff = m.J_obs - m.J;
      actual = diff > kStrictTolerance ? 1 : (diff < -kStrictTolerance ? -1 : 0);
    } else if (f.key == "naive_deceptive_inflation" || f.key == "naive_overjustification") {
      const Classification c = classify(ob.measures[ob.best_obs], ob.measures[ob.best_true]);
      actual = b(f.key == "naive_deceptive_inflation" ? c.deceptive_inflation : c.overjustification);
    } else if (f.key == "worst_case_arm") {
      auto it = s.parameters.find("magnitude");
      const double mag = it == s.parameters.end() ? 10.0 : it->second;
      actual = worst_feedback_compatible_policy(s.mdp, s.sequences, s.belief, s.gamma, s.returns, mag).chosen_sequence;
    } else if (f.key == "dilemma_holds") {
      actual = b(verify_dilemma(s.mdp, s.sequences, s.space, s.belief).status == DilemmaStatus::Holds);
    } else {
      throw std::logic_error("unknown golden fact " + f.key);
    }
    out.push_back({f.key, f.expected, actual, std::fabs(actual - f.expected) <= 1e-9});
  }
  return out;
}

}  // namespace porlhf
