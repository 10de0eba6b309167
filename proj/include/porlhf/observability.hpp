#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "porlhf/linalg.hpp"
#include "porlhf/mdp.hpp"

namespace porlhf {

// kernel(s, o) = P_O(o | s).
struct ObservationModel {
  std::vector<std::string> observations;
  Mat kernel;

  int num_observations() const { return static_cast<int>(observations.size()); }
  bool deterministic() const;
  // Observation index per state; throws unless deterministic.
  std::vector<int> observation_map() const;
  void validate(int num_states) const;
};

ObservationModel deterministic_observations(std::vector<std::string> names, const std::vector<int>& map);
// Observation space equal to the state space.
ObservationModel identity_observations(const Mdp& mdp);

using ObservationSequence = std::vector<int>;

struct ObservationSequenceSpace {
  std::vector<ObservationSequence> sequences;  // lexicographic
  Mat kernel;                                  // rows state sequences, cols observation sequences
  std::vector<int> sequence_map;               // O(s) per state sequence, only for deterministic kernels

  int size() const { return static_cast<int>(sequences.size()); }
  bool deterministic() const { return !sequence_map.empty() || kernel.rows() == 0; }
  int index_of(const ObservationSequence& o) const;
};

ObservationSequenceSpace build_observation_space(const ObservationModel& obs, const std::vector<StateSequence>& seqs);
std::string observation_sequence_name(const ObservationModel& obs, const ObservationSequence& o);

// Theta, rows state sequences, columns observation sequences.
Mat ungrounding_operator(const ObservationSequenceSpace& space);

// Theta (x) Theta, materialized only below the entry cap.
Mat kronecker_square(const Mat& theta, std::size_t cap = 100000000);
// (Theta (x) Theta) vec(P) without materializing, returned as a matrix: Theta P Theta^T.
Mat kronecker_square_apply(const Mat& theta, const Mat& p);

struct InjectivityResult {
  int rank = 0;
  bool injective = false;
};

InjectivityResult injectivity(const Mat& m, double tol = kRankTolerance);

}  // namespace porlhf
