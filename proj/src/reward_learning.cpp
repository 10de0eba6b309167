#include "porlhf/reward_learning.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace porlhf {

const char* to_string(LearningMode m) { return m == LearningMode::Naive ? "naive" : "po-aware"; }

LearningMode parse_mode(const std::string& s) {
  if (s == "naive") return LearningMode::Naive;
  if (s == "po-aware" || s == "po_aware") return LearningMode::PoAware;
  throw std::invalid_argument("unknown learning mode '" + s + "'");
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Precomputed pieces shared by loss and gradient.
struct Model {
  LearningMode mode;
  const LossContext& ctx;
  Mat m;  // naive: Gamma, po-aware: B Gamma
  std::vector<std::vector<std::pair<int, double>>> emit;  // po-aware: (o, P(o|s)) per state sequence

  Model(LearningMode md, const LossContext& c) : mode(md), ctx(c) {
    if (!(c.beta > 0)) throw std::invalid_argument("beta must be positive");
    if (mode == LearningMode::Naive) {
      m = c.gamma;
    } else {
      if (c.belief.cols() != c.gamma.rows() || c.theta_obs.rows() != c.gamma.rows() || c.theta_obs.cols() != c.belief.rows())
        throw std::invalid_argument("po-aware mode needs consistent belief and ungrounding matrices");
      m = c.belief * c.gamma;
      emit.resize(c.theta_obs.rows());
      for (Eigen::Index s = 0; s < c.theta_obs.rows(); ++s)
        for (Eigen::Index o = 0; o < c.theta_obs.cols(); ++o)
          if (c.theta_obs(s, o) > 0) emit[s].push_back({static_cast<int>(o), c.theta_obs(s, o)});
    }
  }

  bool single(int l, int r) const { return mode == LearningMode::Naive || (emit[l].size() == 1 && emit[r].size() == 1); }

  // Score difference for the single-term case.
  double margin(const Vec& h, int l, int r) const {
    if (mode == LearningMode::Naive) return ctx.beta * (h(l) - h(r));
    return ctx.beta * (h(emit[l][0].first) - h(emit[r][0].first));
  }

  double prob(const Vec& h, int l, int r) const {
    if (single(l, r)) return sigmoid(margin(h, l, r));
    double p = 0;
    for (auto [o, a] : emit[l])
      for (auto [o2, b] : emit[r]) p += a * b * sigmoid(ctx.beta * (h(o) - h(o2)));
    return p;
  }

  double record_loss(const Vec& h, const ChoiceRecord& rec) const {
    if (single(rec.left, rec.right)) {
      const double x = margin(h, rec.left, rec.right);
      return rec.target * softplus(-x) + (1 - rec.target) * softplus(x);
    }
    const double p = prob(h, rec.left, rec.right);
    return -rec.target * std::log(p) - (1 - rec.target) * std::log1p(-p);
  }

  // Adds weight * d(loss)/d(theta) into g.
  void add_gradient(const Vec& h, const ChoiceRecord& rec, double weight, Vec& g) const {
    const int l = rec.left, r = rec.right;
    if (single(l, r)) {
      const double coef = weight * ctx.beta * (sigmoid(margin(h, l, r)) - rec.target);
      if (mode == LearningMode::Naive) {
        g += coef * (m.row(l) - m.row(r)).transpose();
      } else {
        g += coef * (m.row(emit[l][0].first) - m.row(emit[r][0].first)).transpose();
      }
      return;
    }
    const double p = prob(h, l, r);
    const double dp = weight * (p - rec.target) / (p * (1 - p));
    for (auto [o, a] : emit[l])
      for (auto [o2, b] : emit[r]) {
        const double s = sigmoid(ctx.beta * (h(o) - h(o2)));
        g += dp * a * b * s * (1 - s) * ctx.beta * (m.row(o) - m.row(o2)).transpose();
      }
  }
};

void check_dataset(const ChoiceDataset& data, Eigen::Index n) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  for (const ChoiceRecord& r : data) {
    if (!(r.target >= 0.0 && r.target <= 1.0)) throw std::invalid_argument("target probability outside [0, 1]");
    if (!(r.weight > 0.0)) throw std::invalid_argument("record weight must be positive");
    if (r.left < 0 || r.right < 0 || r.left >= n || r.right >= n) throw std::invalid_argument("record index out of range");
  }
}

double total_weight(const ChoiceDataset& data) {
  double w = 0;
  for (const ChoiceRecord& r : data) w += r.weight;
  return w;
}

}  // namespace

double model_probability(const Vec& theta, int left, int right, LearningMode mode, const LossContext& ctx) {
  const Model md(mode, ctx);
  return md.prob(md.m * theta, left, right);
}

double choice_loss(const Vec& theta, const ChoiceDataset& data, LearningMode mode, const LossContext& ctx) {
  check_dataset(data, ctx.gamma.rows());
  const Model md(mode, ctx);
  const Vec h = md.m * theta;
  double l = 0;
  for (const ChoiceRecord& r : data) l += r.weight * md.record_loss(h, r);
  return l / total_weight(data);
}

Vec loss_gradient(const Vec& theta, const ChoiceDataset& data, LearningMode mode, const LossContext& ctx) {
  check_dataset(data, ctx.gamma.rows());
  const Model md(mode, ctx);
  const Vec h = md.m * theta;
  Vec g = Vec::Zero(theta.size());
  const double w = total_weight(data);
  for (const ChoiceRecord& r : data) md.add_gradient(h, r, r.weight / w, g);
  return g;
}

TrainingResult train(const TrainingConfig& cfg, const ChoiceDataset& data, const LossContext& ctx) {
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (!(cfg.replication > 0)) throw std::invalid_argument("replication must be positive");
  check_dataset(data, ctx.gamma.rows());
  const Model md(cfg.mode, ctx);
  const Eigen::Index n = ctx.gamma.cols();

  TrainingResult res;
  res.theta = Vec::Zero(n);
  res.records_per_epoch = static_cast<int>(std::floor(cfg.replication * static_cast<double>(data.size())));
  auto full_loss = [&]() {
    const Vec h = md.m * res.theta;
    double l = 0;
    for (const ChoiceRecord& r : data) l += r.weight * md.record_loss(h, r);
    return l / total_weight(data);
  };
  res.trace.push_back({0, full_loss()});

  // Records carry weights; the per-update step uses weight relative to the mean.
  const double mean_w = total_weight(data) / static_cast<double>(data.size());
  Vec m1 = Vec::Zero(n), m2 = Vec::Zero(n), g(n);
  std::vector<int> order(res.records_per_epoch);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int k = 0; k < res.records_per_epoch; ++k) order[k] = k % static_cast<int>(data.size());
    std::mt19937_64 rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(epoch), 0x5eedULL);
    std::shuffle(order.begin(), order.end(), rng);
    for (int k : order) {
      const ChoiceRecord& rec = data[k];
      g.setZero();
      md.add_gradient(md.m * res.theta, rec, rec.weight / mean_w, g);
      ++res.updates;
      m1 = cfg.beta1 * m1 + (1 - cfg.beta1) * g;
      m2 = cfg.beta2 * m2 + (1 - cfg.beta2) * g.cwiseProduct(g);
      const double c1 = 1 - std::pow(cfg.beta1, static_cast<double>(res.updates));
      const double c2 = 1 - std::pow(cfg.beta2, static_cast<double>(res.updates));
      res.theta.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.epsilon);
    }
    const double l = full_loss();
    res.trace.push_back({res.updates, l});
    if (!std::isfinite(l) || !res.theta.allFinite())
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (loss " + std::to_string(l) + ")");
  }
  return res;
}

void write_trace_csv(std::ostream& os, const TrainingResult& r) {
  os << "update,loss\n" << std::setprecision(12);
  for (auto [u, l] : r.trace) os << u << ',' << l << '\n';
}

}  // namespace porlhf
