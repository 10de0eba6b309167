#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "porlhf/belief.hpp"
#include "porlhf/mdp.hpp"
#include "porlhf/observability.hpp"

namespace porlhf {

constexpr double kStrictTolerance = 1e-10;

// G_obs = Theta (B G).
Vec observation_return(const BeliefMatrix& b, const Vec& returns, const Mat& theta);
double observation_value(const Vec& distribution, const Vec& obs_returns);

struct EstimationErrors {
  Vec plus;
  Vec minus;
};
EstimationErrors estimation_errors(const Vec& returns, const Vec& obs_returns);
Vec misleadingness(const Vec& returns, const Vec& obs_returns);

struct PolicyMeasures {
  double J = 0, J_obs = 0, E_plus = 0, E_minus = 0;
};
PolicyMeasures measure_policy(const Vec& distribution, const Vec& returns, const Vec& obs_returns);

struct Classification {
  bool deceptive_inflation = false;
  bool overjustification = false;
};
Classification classify(const PolicyMeasures& pi, const PolicyMeasures& ref, double tol = kStrictTolerance);
Classification classify(const Policy& pi, const Policy& ref, const Mdp& mdp, const std::vector<StateSequence>& seqs,
                        const Vec& returns, const Vec& obs_returns);

struct DiagnosticsReport {
  std::vector<std::string> names;
  std::vector<PolicyMeasures> measures;
  std::vector<Classification> flags;  // relative to reference
  int reference = 0;
};

// Reference is the J-maximal policy with the lowest index.
DiagnosticsReport diagnostics_report(const std::vector<Vec>& distributions, const std::vector<std::string>& names,
                                     const Vec& returns, const Vec& obs_returns);
void write_report_csv(std::ostream& os, const DiagnosticsReport& r);
std::string format_report(const DiagnosticsReport& r);

enum class DilemmaStatus { Holds, Vacuous, Violated };

struct DilemmaWitness {
  int obs_optimal = 0;   // index into policies
  int true_optimal = 0;
  Classification flags;
};

struct DilemmaReport {
  DilemmaStatus status = DilemmaStatus::Vacuous;
  std::vector<Policy> policies;  // distinct-behaviour deterministic policies
  std::vector<PolicyMeasures> measures;
  std::vector<int> obs_optimal;
  std::vector<int> true_optimal;
  std::vector<DilemmaWitness> witnesses;
};

DilemmaReport verify_dilemma(const Mdp& mdp, const std::vector<StateSequence>& seqs, const ObservationSequenceSpace& space,
                             const BeliefMatrix& b, double tol = kStrictTolerance, std::size_t cap = 1000000);
const char* to_string(DilemmaStatus s);

}  // namespace porlhf
