#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "msir/matrix.hpp"
#include "msir/metric_spaces.hpp"

namespace msir {

// Empirical distance correlation (V-statistic form) with Euclidean distances
// within each sample; a and b hold one observation per row. Returns 0 when
// either distance variance is at most 1e-14.
double distance_correlation(const Matrix& a, const Matrix& b);

// Leave-one-out misclassification rate of quadratic discriminant analysis:
// for each held-out i, class means and unbiased covariances (plus a ridge of
// 1e-8 * trace / d) are fit on the rest, and i goes to the class maximizing
// log N(x_i; mu_k, S_k) + log(n_k / (n - 1)). Every class needs >= d + 2 members.
double qda_loocv_error(const Matrix& predictors, std::span<const int> labels);

struct BenchConfig {
  int model_id = 2;
  std::size_t n = 250;
  double sigma = 0.05;
  MetricKind metric = MetricKind::torus_geodesic;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::size_t d = 2;
  unsigned jobs = 1;
  // Predictor and response bandwidths as multiples of the median-heuristic gamma.
  double gamma_x_scale = 2.0;
  double gamma_y_scale = 1.0;
  double ridge_c = 0.2;
  double train_fraction = 0.8;
};

struct ExperimentReport {
  std::vector<double> per_replication;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single replication
  BenchConfig config;
};

// One replication: generate the torus data from stream (seed, 2 r), split it
// using stream (seed, 2 r + 1), fit on the training part and score
// dCor(test Y, test predictors).
double torus_replication(const BenchConfig& config, std::size_t rep);

// All replications; threads over replications when config.jobs > 1. Results do
// not depend on the thread count.
ExperimentReport torus_benchmark(const BenchConfig& config);

ExperimentReport summarize(std::vector<double> scores, const BenchConfig& config);

// Columns model_id,n,sigma,metric,rep,score; one row per replication, then two
// aggregate rows whose rep field is "mean" and "sd".
void write_report_csv(std::ostream& out, const ExperimentReport& report);

}  // namespace msir
