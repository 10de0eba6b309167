#include "porlhf/feedback.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace porlhf {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double full_obs_choice(const Vec& returns, int i, int j, double beta) {
  return sigmoid(beta * (returns(i) - returns(j)));
}

double obs_choice(const BeliefMatrix& b, const Vec& returns, int o, int o2, double beta) {
  return sigmoid(beta * (b.row(o).dot(returns) - b.row(o2).dot(returns)));
}

ChoiceTable choice_table(const Vec& scores, double beta, ChoiceLevel level) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const Eigen::Index n = scores.size();
  ChoiceTable t{level, Mat(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    t.prob(i, i) = 0.5;
    for (Eigen::Index j = 0; j < i; ++j) {
      t.prob(i, j) = sigmoid(beta * (scores(i) - scores(j)));
      t.prob(j, i) = 1.0 - t.prob(i, j);
    }
  }
  return t;
}

ChoiceTable full_obs_table(const Vec& returns, double beta) {
  return choice_table(returns, beta, ChoiceLevel::StateFullObs);
}

ChoiceTable obs_table(const BeliefMatrix& b, const Vec& returns, double beta) {
  return choice_table(b * returns, beta, ChoiceLevel::Observation);
}

ChoiceTable state_choice_through_obs(const Mat& theta, const ChoiceTable& obs_level) {
  if (obs_level.prob.rows() != theta.cols()) throw std::invalid_argument("table and ungrounding operator do not match");
  return {ChoiceLevel::StateThroughObs, theta * obs_level.prob * theta.transpose()};
}

Vec flatten_table(const Mat& p) {
  Vec v(p.size());
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) v(i * p.cols() + j) = p(i, j);
  return v;
}

Mat unflatten_table(const Vec& v, Eigen::Index n) {
  if (v.size() != n * n) throw std::invalid_argument("flattened table has wrong size");
  Mat p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = v(i * n + j);
  return p;
}

Vec invert_choices(const ChoiceTable& table, double beta, int ref) {
  const Eigen::Index n = table.prob.rows();
  if (ref < 0 || ref >= n) throw std::invalid_argument("reference index out of range");
  Vec v(n);
  for (Eigen::Index x = 0; x < n; ++x) {
    const double a = table.prob(x, ref), b = table.prob(ref, x);
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) throw std::domain_error("saturated preference, not invertible");
    v(x) = std::log(a / b) / beta;
  }
  return v;
}

ChoiceDataset synthesize_exact(const ChoiceTable& table) {
  ChoiceDataset d;
  const Eigen::Index n = table.prob.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d.push_back({static_cast<int>(i), static_cast<int>(j), table.prob(i, j), 1.0});
  return d;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

ChoiceDataset synthesize_sampled(const ChoiceTable& table, int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample count must be positive");
  ChoiceDataset d;
  const Eigen::Index m = table.prob.rows();
  std::uint64_t pair = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j, ++pair) {
      std::mt19937_64 rng = stream_rng(seed, pair);
      std::bernoulli_distribution draw(table.prob(i, j));
      int wins = 0;
      for (int k = 0; k < n; ++k) wins += draw(rng) ? 1 : 0;
      if (wins > 0) d.push_back({static_cast<int>(i), static_cast<int>(j), 1.0, static_cast<double>(wins)});
      if (wins < n) d.push_back({static_cast<int>(i), static_cast<int>(j), 0.0, static_cast<double>(n - wins)});
    }
  return d;
}

void write_dataset_csv(std::ostream& os, const ChoiceDataset& d) {
  os << "pair_left,pair_right,target_prob,weight\n";
  os << std::setprecision(17);
  for (const ChoiceRecord& r : d) os << r.left << ',' << r.right << ',' << r.target << ',' << r.weight << '\n';
}

ChoiceDataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("pair_left,pair_right,target_prob,weight", 0) != 0)
    throw std::invalid_argument("dataset CSV header missing");
  ChoiceDataset d;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ChoiceRecord r;
    char c1, c2, c3;
    if (!(ls >> r.left >> c1 >> r.right >> c2 >> r.target >> c3 >> r.weight) || c1 != ',' || c2 != ',' || c3 != ',')
      throw std::invalid_argument("malformed dataset row: " + line);
    d.push_back(r);
  }
  return d;
}

}  // namespace porlhf
