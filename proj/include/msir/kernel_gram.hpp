#pragma once

#include <span>
#include <vector>

#include "msir/dataset.hpp"
#include "msir/matrix.hpp"
#include "msir/metric_spaces.hpp"

namespace msir {

// Gaussian kernel of a metric: k(x, y) = exp(-gamma * d(x, y)^2).
struct KernelConfig {
  double gamma = 1.0;
  MetricKind metric = MetricKind::euclidean;
  MetricOptions options{};
};

struct GramPair {
  Matrix K;  // raw kernel matrix
  Matrix G;  // Q K Q with Q = I - 11^T / n
  KernelConfig config;
  std::size_t n = 0;
};

double gaussian_kernel(double d, double gamma);

// Symmetric matrix of pairwise distances; each pair is evaluated once.
Matrix pairwise_distances(std::span<const Point> points, MetricKind metric, const MetricOptions& options = {},
                          unsigned workers = 1);

// Kernel matrix from precomputed distances.
Matrix kernel_from_distances(const Matrix& distances, double gamma);

// Requires n >= 2. Row blocks are split across `workers` threads; the result
// does not depend on the worker count.
GramPair gram_matrix(std::span<const Point> points, const KernelConfig& config, unsigned workers = 1);

// Q K Q for square K, computed by subtracting row, column and grand means.
Matrix center_gram(const Matrix& k);

// (k(x, X_1), ..., k(x, X_n)).
std::vector<double> kernel_vector(const Point& x, std::span<const Point> training, const KernelConfig& config);

// gamma = 1 / (2 m^2) with m the median pairwise distance.
double median_heuristic_bandwidth(std::span<const Point> points, MetricKind metric, const MetricOptions& options = {});
double median_heuristic_from_distances(const Matrix& distances);

// Grid gamma for the predictor kernel minimizing the leave-one-out error of a
// Nadaraya-Watson estimate of the response: squared error for scalar Y, squared
// RKHS error of the response kernel feature for metric Y (response kernel at its
// median-heuristic bandwidth under metric_y), misclassification for labels.
// Ties go to the smallest gamma.
double loocv_bandwidth(const Dataset& data, MetricKind metric, std::span<const double> grid,
                       MetricKind metric_y = MetricKind::euclidean, const MetricOptions& options = {});

// Leave-one-out error of the Nadaraya-Watson estimate at one bandwidth.
double loocv_error(const Matrix& distances_x, const Response& y, double gamma, const Matrix* response_kernel);

}  // namespace msir
