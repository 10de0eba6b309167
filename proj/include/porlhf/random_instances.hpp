#pragma once

#include <random>

#include "porlhf/scenarios.hpp"

namespace porlhf {

struct RandomMdpOptions {
  int max_states = 4;
  int max_actions = 3;
  int max_horizon = 3;
  double zero_prob = 0.4;  // chance a transition entry is forced to zero
  double gamma = -1;       // negative: draw from [0.5, 1]
};

Mdp random_mdp(std::mt19937_64& rng, const RandomMdpOptions& opt = {});
Mat random_row_stochastic(std::mt19937_64& rng, int rows, int cols, double zero_prob = 0.0);
ObservationModel random_deterministic_observations(std::mt19937_64& rng, int num_states);
ObservationModel random_stochastic_observations(std::mt19937_64& rng, int num_states, int num_obs);
Policy random_policy(std::mt19937_64& rng, const Mdp& mdp, bool deterministic = false);
Vec random_positive(std::mt19937_64& rng, int n);

// A scenario around a random MDP. Deterministic observations get a
// full-support posterior belief; stochastic ones a policy-aware belief for a random policy.
Scenario random_scenario(std::mt19937_64& rng, const RandomMdpOptions& opt, bool deterministic_obs);

}  // namespace porlhf
