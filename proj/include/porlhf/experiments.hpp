#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "porlhf/diagnostics.hpp"
#include "porlhf/reward_learning.hpp"
#include "porlhf/scenarios.hpp"

namespace porlhf {

// Runs fn(i) for i in [0, n) on `jobs` workers (0 = hardware concurrency).
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// Exact state-level dataset: observation-level Boltzmann table carried back through Theta.
ChoiceDataset exact_dataset(const Scenario& s);
LossContext loss_context(const Scenario& s);

struct PipelineResult {
  TrainingResult training;
  Plan plan;              // on the learned reward
  Vec distribution;       // of plan.per_time
  PolicyMeasures measures;
  PolicyMeasures reference;  // true-reward optimal policy
  Classification flags;      // relative to reference
  bool optimal = false;
  int decision_action = -1;  // at the decision state's earliest reachable step
};

PipelineResult pipeline(const Scenario& s, const TrainingConfig& cfg);
// Action at the earliest step the decision state is reachable.
int decision_action(const Scenario& s, const TimedPolicy& pi);

struct Table1Row {
  char example;  // 'A' or 'B'
  double p;
  double p_hide;     // NaN when not applicable
  double p_default;  // NaN when not applicable
  LearningMode mode;
  std::string action;
  double e_plus;
  bool deceptive_inflation;
  double e_minus;
  bool overjustification;
  bool optimal;
};

struct Table1Result {
  Table1Row expected;
  std::string action;
  double e_plus = 0;
  bool deceptive_inflation = false;
  double e_minus = 0;
  bool overjustification = false;
  bool optimal = false;
  long updates = 0;
  bool match = false;
  std::string mismatch;  // empty when matching
};

std::vector<Table1Row> table1_rows();
Scenario table1_scenario(const Table1Row& row);
std::vector<Table1Result> run_table1(std::uint64_t seed, int jobs = 0, const TrainingConfig* base = nullptr);
std::string format_table1(const std::vector<Table1Result>& rows);
void write_table1_csv(std::ostream& os, const std::vector<Table1Result>& rows);

enum class SweepFamily { A, B };
SweepFamily parse_family(const std::string& s);

struct SweepConfig {
  SweepFamily family = SweepFamily::A;
  std::vector<double> belief_grid;  // p_hide for A, p_default for B
  std::vector<double> penalty_grid;
  double p = 0.5;
  bool trained = false;
  TrainingConfig training;  // mode forced to naive
  std::uint64_t seed = 0;
  int jobs = 0;
};

std::vector<double> default_belief_grid();   // 0.05, 0.10, ..., 0.95
std::vector<double> default_penalty_grid();  // 0, 0.5, 1, 2, 4

struct SweepCell {
  double belief_param = 0;
  double penalty = 0;
  std::string chosen_action;
  double analytic_threshold = 0;
  std::string expected_action;
  bool boundary = false;  // on the threshold, either action accepted
  bool agrees = false;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  int disagreements = 0;
  int disagreements_outside_low_region = 0;  // disagreeing cells with belief_param >= threshold
};

SweepResult run_sweep(const SweepConfig& cfg);
void write_sweep_csv(std::ostream& os, const SweepResult& r);

struct SuiteResult {
  std::string name;
  int total = 0;
  int passed = 0;
  std::vector<std::string> witnesses;  // failures, serialized
  std::vector<std::string> info;       // summary lines
};

std::vector<std::string> suite_names();  // theorem, interlude, robustness, identifiability, kronecker, kernel
SuiteResult run_suite(const std::string& name, int n, std::uint64_t seed, int jobs = 0);

}  // namespace porlhf
