#pragma once

#include <string>
#include <vector>

#include "porlhf/linalg.hpp"
#include "porlhf/mdp.hpp"
#include "porlhf/observability.hpp"

namespace porlhf {

// B(s | o): rows observation sequences, columns state sequences.
using BeliefMatrix = Mat;

// prior over state sequences, sequence_map = O(s) per state sequence.
BeliefMatrix posterior_deterministic(const Vec& prior, const std::vector<int>& sequence_map, int num_observation_sequences);

struct PolicyMixture {
  std::vector<double> weights;
  std::vector<Policy> policies;
};

// Joint belief over (state prefix, policy) after observing an observation prefix.
struct JointBelief {
  struct Entry {
    StateSequence prefix;
    int policy;
    double prob;
  };
  std::vector<Entry> entries;
};

JointBelief initial_joint_belief(const Mdp& mdp, const ObservationModel& obs, const PolicyMixture& prior, int first_obs);
JointBelief iterative_bayes_update(const JointBelief& belief, int next_obs, const Mdp& mdp, const ObservationModel& obs,
                                   const PolicyMixture& prior);
// Marginal over policies, indexed like seqs. Prefixes must have full length.
Vec marginalize_policies(const JointBelief& belief, const Mdp& mdp, const std::vector<StateSequence>& seqs);

// Runs the iterative update for every observation sequence in the space.
BeliefMatrix bayes_belief(const Mdp& mdp, const ObservationModel& obs, const PolicyMixture& prior,
                          const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space);
BeliefMatrix policy_aware_belief(const Mdp& mdp, const Policy& pi, const ObservationModel& obs,
                                 const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space);

// Empty result means valid.
std::vector<std::string> validate_belief(const BeliefMatrix& b, const ObservationSequenceSpace& space,
                                         bool check_support = true, double tol = 1e-10);

}  // namespace porlhf
