#include "porlhf/random_instances.hpp"

#include <algorithm>

namespace porlhf {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

}  // namespace

Mat random_row_stochastic(std::mt19937_64& rng, int rows, int cols, double zero_prob) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = uniform(rng, 0.0, 1.0) < zero_prob ? 0.0 : uniform(rng, 0.05, 1.0);
    if (m.row(r).sum() == 0.0) m(r, uniform_int(rng, 0, cols - 1)) = 1.0;
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

Vec random_positive(std::mt19937_64& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, 0.1, 1.0);
  return v;
}

Mdp random_mdp(std::mt19937_64& rng, const RandomMdpOptions& opt) {
  const int ns = uniform_int(rng, 1, opt.max_states);
  const int na = uniform_int(rng, 1, opt.max_actions);
  const int h = uniform_int(rng, 0, opt.max_horizon);
  std::vector<std::string> states, actions;
  for (int i = 0; i < ns; ++i) states.push_back(std::string(1, static_cast<char>('a' + i)));
  for (int i = 0; i < na; ++i) actions.push_back("u" + std::to_string(i));
  const double g = opt.gamma >= 0 ? opt.gamma : uniform(rng, 0.5, 1.0);
  Mdp m = make_mdp(states, actions, g, h);
  for (int a = 0; a < na; ++a) m.transition[a] = random_row_stochastic(rng, ns, ns, opt.zero_prob);
  Vec init = random_row_stochastic(rng, 1, ns, opt.zero_prob).row(0).transpose();
  m.initial = init;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int s = 0; s < ns; ++s) m.reward(s) = nd(rng);
  return m;
}

ObservationModel random_deterministic_observations(std::mt19937_64& rng, int num_states) {
  const int no = uniform_int(rng, 1, num_states);
  std::vector<int> map(num_states);
  for (int s = 0; s < num_states; ++s) map[s] = s < no ? s : uniform_int(rng, 0, no - 1);
  std::shuffle(map.begin(), map.end(), rng);
  std::vector<std::string> names;
  for (int o = 0; o < no; ++o) names.push_back("o" + std::to_string(o));
  return deterministic_observations(names, map);
}

ObservationModel random_stochastic_observations(std::mt19937_64& rng, int num_states, int num_obs) {
  ObservationModel om;
  for (int o = 0; o < num_obs; ++o) om.observations.push_back("o" + std::to_string(o));
  om.kernel = random_row_stochastic(rng, num_states, num_obs, 0.3);
  return om;
}

Policy random_policy(std::mt19937_64& rng, const Mdp& mdp, bool deterministic) {
  if (deterministic) {
    std::vector<int> acts(mdp.num_states());
    for (int& a : acts) a = uniform_int(rng, 0, mdp.num_actions() - 1);
    return deterministic_policy(mdp, acts);
  }
  return random_row_stochastic(rng, mdp.num_states(), mdp.num_actions(), 0.3);
}

Scenario random_scenario(std::mt19937_64& rng, const RandomMdpOptions& opt, bool deterministic_obs) {
  Scenario s;
  s.name = "random";
  s.mdp = random_mdp(rng, opt);
  s.obs = deterministic_obs ? random_deterministic_observations(rng, s.mdp.num_states())
                            : random_stochastic_observations(rng, s.mdp.num_states(), uniform_int(rng, 1, s.mdp.num_states() + 1));
  s.derive();
  if (deterministic_obs) {
    s.belief = posterior_deterministic(random_positive(rng, static_cast<int>(s.sequences.size())), s.space.sequence_map,
                                       s.space.size());
  } else {
    Policy pi = random_row_stochastic(rng, s.mdp.num_states(), s.mdp.num_actions(), 0.0);
    s.belief = policy_aware_belief(s.mdp, pi, s.obs, s.sequences, s.space);
  }
  s.validate();
  return s;
}

}  // namespace porlhf
