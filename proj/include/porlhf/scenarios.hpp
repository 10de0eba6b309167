#pragma once

#include <map>
#include <string>
#include <vector>

#include "porlhf/belief.hpp"
#include "porlhf/diagnostics.hpp"
#include "porlhf/mdp.hpp"
#include "porlhf/observability.hpp"

namespace porlhf {

struct GoldenFact {
  std::string key;
  double expected;
};

struct Scenario {
  std::string name;
  Mdp mdp;
  ObservationModel obs;
  BeliefMatrix belief;
  double beta = 1.0;
  std::map<std::string, double> parameters;
  std::vector<std::string> notes;
  std::string decision_state;  // state whose action is reported; empty for bandits
  std::string default_action;  // unlisted actions behave like this one
  std::vector<GoldenFact> golden;

  // Derived by derive().
  std::vector<StateSequence> sequences;
  ObservationSequenceSpace space;
  Mat gamma;
  Mat theta;
  Vec returns;

  void derive();
  // Mdp, observation and belief invariants; throws std::invalid_argument.
  void validate() const;
  int decision_index() const;
  std::string sequence(int i) const { return sequence_name(mdp, sequences[i]); }
  int sequence_index(const std::string& name) const { return find_sequence(mdp, sequences, name); }
  Vec obs_returns() const;
  // The default action when `action` has the same transitions from `state`.
  int canonical_action(int state, int action) const;
};

// p: success probability; r: hiding penalty; p_hide: B(SIL_HT | o_0 o_I o_0 o_0);
// p_w: B(SIWT | o_0 o_I o_W o_0); p_hide_empty: B(SL_HTT | o_0 o_0 o_0 o_0), negative means p_hide.
Scenario example_a(double p, double r, double p_hide, double p_w = 0.5, double p_hide_empty = -1.0);
// p_default: B(SIWT | o_0 o_I o_0 o_0).
Scenario example_b(double p, double r, double p_default);

double threshold_a(double r);
double threshold_b(double p, double r);

// Two-state chain a -> b with horizon 1 and identity observations.
Scenario chain_example(double gamma);

std::vector<std::string> catalog_names();
Scenario catalog(const std::string& name, const std::map<std::string, double>& overrides = {});
// Catalog entries plus example_a / example_b / chain, with parameter overrides.
Scenario resolve_scenario(const std::string& name, const std::map<std::string, double>& overrides = {});

// Exhaustive search over distinct deterministic behaviours (or arms for horizon 0).
struct OptimalBehaviour {
  std::vector<Policy> policies;
  std::vector<PolicyMeasures> measures;
  int best_true = 0;  // lowest index among maximizers
  int best_obs = 0;
  int action_true = -1;  // action at the decision state (arm index for bandits)
  int action_obs = -1;
};
OptimalBehaviour optimal_behaviour(const Scenario& s);

// Best history-dependent plan for per-sequence values; returns the action at the
// decision state's earliest prefix.
int best_decision_action(const Scenario& s, const Vec& values);

struct GoldenCheck {
  std::string key;
  double expected;
  double actual;
  bool ok;
};
std::vector<GoldenCheck> check_golden(const Scenario& s);

}  // namespace porlhf
