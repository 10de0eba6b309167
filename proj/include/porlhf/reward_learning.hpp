#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "porlhf/feedback.hpp"
#include "porlhf/linalg.hpp"

namespace porlhf {

enum class LearningMode { Naive, PoAware };
const char* to_string(LearningMode m);
LearningMode parse_mode(const std::string& s);

// Dataset records index state sequences. In po-aware mode each side is routed
// through theta_obs (S x O) and the belief (O x S).
struct LossContext {
  Mat gamma;
  Mat belief;
  Mat theta_obs;
  double beta = 1.0;
};

double model_probability(const Vec& theta, int left, int right, LearningMode mode, const LossContext& ctx);
double choice_loss(const Vec& theta, const ChoiceDataset& data, LearningMode mode, const LossContext& ctx);
Vec loss_gradient(const Vec& theta, const ChoiceDataset& data, LearningMode mode, const LossContext& ctx);

struct TrainingConfig {
  LearningMode mode = LearningMode::Naive;
  double learning_rate = 1e-2;
  int epochs = 300;
  double replication = 13.5;  // records per epoch = floor(replication * dataset size)
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainingResult {
  Vec theta;
  std::vector<std::pair<long, double>> trace;  // (updates so far, full-dataset loss), one per epoch plus the start
  long updates = 0;
  int records_per_epoch = 0;
};

// One update per record, adaptive moment estimates, zero initialization.
TrainingResult train(const TrainingConfig& cfg, const ChoiceDataset& data, const LossContext& ctx);
void write_trace_csv(std::ostream& os, const TrainingResult& r);

}  // namespace porlhf
