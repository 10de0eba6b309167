#include "porlhf/belief.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace porlhf {

BeliefMatrix posterior_deterministic(const Vec& prior, const std::vector<int>& sequence_map, int num_observation_sequences) {
  if (static_cast<std::size_t>(prior.size()) != sequence_map.size())
    throw std::invalid_argument("prior and sequence map sizes differ");
  BeliefMatrix b = BeliefMatrix::Zero(num_observation_sequences, prior.size());
  Vec mass = Vec::Zero(num_observation_sequences);
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    if (prior(i) < 0.0) throw std::invalid_argument("negative prior probability");
    mass(sequence_map[i]) += prior(i);
  }
  for (int o = 0; o < num_observation_sequences; ++o)
    if (!(mass(o) > 0.0)) throw std::invalid_argument("observation sequence with zero total prior mass");
  for (Eigen::Index i = 0; i < prior.size(); ++i) b(sequence_map[i], i) = prior(i) / mass(sequence_map[i]);
  return b;
}

namespace {

void check_mixture(const Mdp& mdp, const PolicyMixture& prior) {
  if (prior.weights.size() != prior.policies.size() || prior.weights.empty())
    throw std::invalid_argument("policy mixture needs matching non-empty weights and policies");
  for (const Policy& p : prior.policies) validate_policy(mdp, p);
}

void normalize(JointBelief& b) {
  double z = 0.0;
  for (const auto& e : b.entries) z += e.prob;
  if (!(z > 0.0)) throw std::invalid_argument("impossible observation: zero normalization constant");
  for (auto& e : b.entries) e.prob /= z;
}

}  // namespace

JointBelief initial_joint_belief(const Mdp& mdp, const ObservationModel& obs, const PolicyMixture& prior, int first_obs) {
  check_mixture(mdp, prior);
  JointBelief b;
  for (int s = 0; s < mdp.num_states(); ++s) {
    const double w = obs.kernel(s, first_obs) * mdp.initial(s);
    if (w <= 0.0) continue;
    for (std::size_t k = 0; k < prior.policies.size(); ++k)
      if (prior.weights[k] > 0.0) b.entries.push_back({{s}, static_cast<int>(k), w * prior.weights[k]});
  }
  normalize(b);
  return b;
}

JointBelief iterative_bayes_update(const JointBelief& belief, int next_obs, const Mdp& mdp, const ObservationModel& obs,
                                   const PolicyMixture& prior) {
  JointBelief out;
  for (const auto& e : belief.entries) {
    const int s = e.prefix.back();
    const Policy& pi = prior.policies[e.policy];
    for (int s2 = 0; s2 < mdp.num_states(); ++s2) {
      const double po = obs.kernel(s2, next_obs);
      if (po <= 0.0) continue;
      double step = 0.0;
      for (int a = 0; a < mdp.num_actions(); ++a) step += mdp.transition[a](s, s2) * pi(s, a);
      if (step <= 0.0) continue;
      StateSequence p = e.prefix;
      p.push_back(s2);
      out.entries.push_back({std::move(p), e.policy, po * step * e.prob});
    }
  }
  normalize(out);
  return out;
}

Vec marginalize_policies(const JointBelief& belief, const Mdp& mdp, const std::vector<StateSequence>& seqs) {
  std::map<StateSequence, int> index;
  for (std::size_t i = 0; i < seqs.size(); ++i) index[seqs[i]] = static_cast<int>(i);
  Vec m = Vec::Zero(static_cast<Eigen::Index>(seqs.size()));
  for (const auto& e : belief.entries) {
    auto it = index.find(e.prefix);
    if (it == index.end()) throw std::invalid_argument("belief prefix '" + sequence_name(mdp, e.prefix) + "' is not a state sequence");
    m(it->second) += e.prob;
  }
  return m;
}

BeliefMatrix bayes_belief(const Mdp& mdp, const ObservationModel& obs, const PolicyMixture& prior,
                          const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space) {
  BeliefMatrix b = BeliefMatrix::Zero(space.size(), static_cast<Eigen::Index>(seqs.size()));
  for (int j = 0; j < space.size(); ++j) {
    const ObservationSequence& o = space.sequences[j];
    try {
      JointBelief jb = initial_joint_belief(mdp, obs, prior, o[0]);
      for (std::size_t t = 1; t < o.size(); ++t) jb = iterative_bayes_update(jb, o[t], mdp, obs, prior);
      b.row(j) = marginalize_policies(jb, mdp, seqs).transpose();
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("observation sequence " + observation_sequence_name(obs, o) + " is unreachable under the policy prior");
    }
  }
  return b;
}

BeliefMatrix policy_aware_belief(const Mdp& mdp, const Policy& pi, const ObservationModel& obs,
                                 const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space) {
  return bayes_belief(mdp, obs, PolicyMixture{{1.0}, {pi}}, seqs, space);
}

std::vector<std::string> validate_belief(const BeliefMatrix& b, const ObservationSequenceSpace& space, bool check_support,
                                         double tol) {
  std::vector<std::string> v;
  if (b.rows() != space.size() || b.cols() != space.kernel.rows()) {
    v.push_back("belief matrix has wrong shape");
    return v;
  }
  for (Eigen::Index o = 0; o < b.rows(); ++o) {
    if ((b.row(o).array() < 0.0).any()) v.push_back("row " + std::to_string(o) + " has negative entries");
    const double sum = b.row(o).sum();
    if (std::fabs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "row " << o << " sums to " << sum;
      v.push_back(os.str());
    }
    if (!check_support) continue;
    for (Eigen::Index s = 0; s < b.cols(); ++s)
      if (b(o, s) > 0.0 && !(space.kernel(s, o) > 0.0))
        v.push_back("row " + std::to_string(o) + " puts mass on inconsistent sequence " + std::to_string(s));
  }
  return v;
}

}  // namespace porlhf
