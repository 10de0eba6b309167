#pragma once

#include <Eigen/Dense>

namespace porlhf {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

constexpr double kRankTolerance = 1e-9;

// Singular values below tol * sigma_max count as zero.
int numeric_rank(const Mat& m, double tol = kRankTolerance);

// Orthonormal bases (columns). Empty matrices yield zero columns.
Mat nullspace(const Mat& m, double tol = kRankTolerance);
Mat column_space(const Mat& m, double tol = kRankTolerance);
// Same, keeping singular values above a fixed absolute threshold.
Mat column_space_above(const Mat& m, double threshold);

// Largest singular value.
double operator_norm(const Mat& m);

// Rank over the rationals. Each entry is first snapped to the nearest
// fraction with denominator <= max_denominator.
int exact_rank(const Mat& m, long max_denominator = 1000000);

}  // namespace porlhf
