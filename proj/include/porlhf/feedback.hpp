#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "porlhf/belief.hpp"
#include "porlhf/linalg.hpp"

namespace porlhf {

double sigmoid(double x);

double full_obs_choice(const Vec& returns, int i, int j, double beta);
double obs_choice(const BeliefMatrix& b, const Vec& returns, int o, int o2, double beta);

enum class ChoiceLevel { StateFullObs, Observation, StateThroughObs };

// prob(x, y) = P(x > y).
struct ChoiceTable {
  ChoiceLevel level = ChoiceLevel::StateFullObs;
  Mat prob;
};

ChoiceTable choice_table(const Vec& scores, double beta, ChoiceLevel level);
ChoiceTable full_obs_table(const Vec& returns, double beta);
ChoiceTable obs_table(const BeliefMatrix& b, const Vec& returns, double beta);
// State-level table seen through the observation kernel.
ChoiceTable state_choice_through_obs(const Mat& theta, const ChoiceTable& obs_level);

// Row-major flattening used with Theta (x) Theta.
Vec flatten_table(const Mat& p);
Mat unflatten_table(const Vec& v, Eigen::Index n);

// Scores anchored so value(ref) = 0.
Vec invert_choices(const ChoiceTable& table, double beta, int ref = 0);

struct ChoiceRecord {
  int left = 0;
  int right = 0;
  double target = 0.5;  // probability that left is preferred
  double weight = 1.0;
};
using ChoiceDataset = std::vector<ChoiceRecord>;

// One record per unordered pair i < j.
ChoiceDataset synthesize_exact(const ChoiceTable& table);
// n Bernoulli draws per pair, aggregated into at most two labelled records per pair
// (target 1 with weight = wins, target 0 with weight = losses).
ChoiceDataset synthesize_sampled(const ChoiceTable& table, int n, std::uint64_t seed);

// Independent stream for (seed, key...).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

void write_dataset_csv(std::ostream& os, const ChoiceDataset& d);
ChoiceDataset read_dataset_csv(std::istream& is);

}  // namespace porlhf
