#include "porlhf/diagnostics.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace porlhf {

Vec observation_return(const BeliefMatrix& b, const Vec& returns, const Mat& theta) {
  if (b.cols() != returns.size() || theta.cols() != b.rows()) throw std::invalid_argument("dimension mismatch");
  return theta * (b * returns);
}

double observation_value(const Vec& distribution, const Vec& obs_returns) {
  return policy_value(distribution, obs_returns);
}

EstimationErrors estimation_errors(const Vec& returns, const Vec& obs_returns) {
  const Vec m = obs_returns - returns;
  return {m.cwiseMax(0.0), (-m).cwiseMax(0.0)};
}

Vec misleadingness(const Vec& returns, const Vec& obs_returns) { return obs_returns - returns; }

PolicyMeasures measure_policy(const Vec& distribution, const Vec& returns, const Vec& obs_returns) {
  const EstimationErrors e = estimation_errors(returns, obs_returns);
  return {distribution.dot(returns), distribution.dot(obs_returns), distribution.dot(e.plus), distribution.dot(e.minus)};
}

Classification classify(const PolicyMeasures& pi, const PolicyMeasures& ref, double tol) {
  Classification c;
  c.deceptive_inflation = pi.E_plus > ref.E_plus + tol && pi.J_obs > ref.J_obs + tol;
  c.overjustification = pi.E_minus < ref.E_minus - tol && pi.J < ref.J - tol;
  return c;
}

Classification classify(const Policy& pi, const Policy& ref, const Mdp& mdp, const std::vector<StateSequence>& seqs,
                        const Vec& returns, const Vec& obs_returns) {
  return classify(measure_policy(trajectory_distribution(mdp, seqs, pi), returns, obs_returns),
                  measure_policy(trajectory_distribution(mdp, seqs, ref), returns, obs_returns));
}

DiagnosticsReport diagnostics_report(const std::vector<Vec>& distributions, const std::vector<std::string>& names,
                                     const Vec& returns, const Vec& obs_returns) {
  if (distributions.size() != names.size() || distributions.empty()) throw std::invalid_argument("need one name per policy");
  DiagnosticsReport r;
  r.names = names;
  for (const Vec& d : distributions) r.measures.push_back(measure_policy(d, returns, obs_returns));
  for (std::size_t i = 1; i < r.measures.size(); ++i)
    if (r.measures[i].J > r.measures[r.reference].J + kStrictTolerance) r.reference = static_cast<int>(i);
  for (const PolicyMeasures& m : r.measures) r.flags.push_back(classify(m, r.measures[r.reference]));
  return r;
}

void write_report_csv(std::ostream& os, const DiagnosticsReport& r) {
  os << "policy,J,J_obs,E_plus,E_minus,deceptive_inflation,overjustification,reference\n" << std::setprecision(12);
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const PolicyMeasures& m = r.measures[i];
    os << r.names[i] << ',' << m.J << ',' << m.J_obs << ',' << m.E_plus << ',' << m.E_minus << ','
       << (r.flags[i].deceptive_inflation ? 1 : 0) << ',' << (r.flags[i].overjustification ? 1 : 0) << ','
       << (static_cast<int>(i) == r.reference ? 1 : 0) << '\n';
  }
}

std::string format_report(const DiagnosticsReport& r) {
  std::ostringstream os;
  std::size_t w = 6;
  for (const auto& n : r.names) w = std::max(w, n.size());
  os << std::left << std::setw(static_cast<int>(w) + 2) << "policy" << std::right << std::setw(14) << "J" << std::setw(14)
     << "J_obs" << std::setw(14) << "E+" << std::setw(14) << "E-" << "  DI OJ\n";
  os << std::setprecision(6);
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const PolicyMeasures& m = r.measures[i];
    os << std::left << std::setw(static_cast<int>(w) + 2) << r.names[i] << std::right << std::setw(14) << m.J << std::setw(14)
       << m.J_obs << std::setw(14) << m.E_plus << std::setw(14) << m.E_minus << "  " << (r.flags[i].deceptive_inflation ? "y " : "n ")
       << " " << (r.flags[i].overjustification ? "y" : "n") << (static_cast<int>(i) == r.reference ? "  (reference)" : "") << '\n';
  }
  return os.str();
}

DilemmaReport verify_dilemma(const Mdp& mdp, const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space,
                             const BeliefMatrix& b, double tol, std::size_t cap) {
  if (!space.deterministic()) throw std::invalid_argument("dilemma check requires a deterministic observation kernel");
  const Vec g = compute_returns(return_operator(mdp, seqs), mdp.reward);
  const Vec gobs = observation_return(b, g, ungrounding_operator(space));
  DilemmaReport rep;
  rep.policies = enumerate_deterministic_policies(mdp, cap, true);
  double best_j = -1e300, best_jobs = -1e300;
  for (const Policy& p : rep.policies) {
    rep.measures.push_back(measure_policy(trajectory_distribution(mdp, seqs, p), g, gobs));
    best_j = std::max(best_j, rep.measures.back().J);
    best_jobs = std::max(best_jobs, rep.measures.back().J_obs);
  }
  std::vector<bool> in_true(rep.policies.size()), in_obs(rep.policies.size());
  for (std::size_t i = 0; i < rep.policies.size(); ++i) {
    in_true[i] = rep.measures[i].J >= best_j - tol;
    in_obs[i] = rep.measures[i].J_obs >= best_jobs - tol;
    if (in_true[i]) rep.true_optimal.push_back(static_cast<int>(i));
    if (in_obs[i]) rep.obs_optimal.push_back(static_cast<int>(i));
  }
  rep.status = DilemmaStatus::Vacuous;
  for (int po : rep.obs_optimal) {
    if (in_true[po]) continue;
    for (int pt : rep.true_optimal) {
      if (in_obs[pt]) continue;
      DilemmaWitness w{po, pt, classify(rep.measures[po], rep.measures[pt], tol)};
      rep.witnesses.push_back(w);
      if (rep.status == DilemmaStatus::Vacuous) rep.status = DilemmaStatus::Holds;
      if (!w.flags.deceptive_inflation && !w.flags.overjustification) rep.status = DilemmaStatus::Violated;
    }
  }
  return rep;
}

const char* to_string(DilemmaStatus s) {
  switch (s) {
    case DilemmaStatus::Holds: return "holds";
    case DilemmaStatus::Vacuous: return "vacuous";
    case DilemmaStatus::Violated: return "violated";
  }
  return "?";
}

}  // namespace porlhf
