#pragma once

// Metric sliced inverse regression on Gram-matrix coordinates.
//
// With centered Gram matrices G_X, G_Y and ridge parameters tau = c * phi_1(G),
// the operator coordinate is
//
//   L = (G_X + tau1 I)^{-1} G_Y (G_Y + tau2 I)^{-1} G_X              (metric Y)
//   L = (G_X + tau1 I)^{-1} Q (sum_k 1_k 1_k^T / n_k) Q G_X           (class labels)
//
// and the fitted directions v_1..v_d are the leading eigenvectors of L L^T.
// A new point x maps to the sufficient predictors v_j^T Q k_X(x).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "msir/dataset.hpp"
#include "msir/kernel_gram.hpp"
#include "msir/matrix.hpp"

namespace msir {

enum class ResponseMode { metric, categorical };
// gram_product: eigenvectors of L L^T. coordinate: eigenvectors of L itself,
// obtained through a symmetric similarity transform.
enum class EigenTarget { gram_product, coordinate };

// A fixed gamma, or `median_scale` times the median-heuristic gamma.
struct Bandwidth {
  std::optional<double> value;
  double median_scale = 1.0;

  static Bandwidth fixed(double g) { return {g, 1.0}; }
  static Bandwidth auto_median(double scale = 1.0) { return {std::nullopt, scale}; }
};

struct MsirConfig {
  std::size_t d = 2;
  double ridge_c = 0.2;
  MetricKind metric_x = MetricKind::euclidean;
  // Ignored for label responses, which always use the class-indicator form.
  MetricKind metric_y = MetricKind::euclidean;
  Bandwidth gamma_x = Bandwidth::auto_median();
  Bandwidth gamma_y = Bandwidth::auto_median();
  std::size_t partitions = 1;
  EigenTarget eigen_target = EigenTarget::gram_product;
  MetricOptions options{};
  unsigned workers = 1;
};

void validate(const MsirConfig& config);

// Labels relabelled to 1..K in ascending order of the original values.
struct ClassSummary {
  std::vector<int> labels;       // 1..K per sample
  std::vector<std::size_t> counts;  // n_k, index k-1
  std::vector<int> original;     // original label for class k at index k-1

  std::size_t n() const noexcept { return labels.size(); }
  std::size_t classes() const noexcept { return counts.size(); }
};

ClassSummary summarize_classes(std::span<const int> labels);

struct MsirModel {
  std::vector<Point> training_x;
  KernelConfig kernel_x;
  double tau1 = 0.0;
  // Zero for categorical responses, which have no response Gram matrix.
  double tau2 = 0.0;
  std::vector<double> eigenvalues;  // d, nonincreasing
  Matrix eigenvectors;              // n x d, unit columns
  ResponseMode response_mode = ResponseMode::metric;
  EigenTarget eigen_target = EigenTarget::gram_product;

  std::size_t n() const noexcept { return training_x.size(); }
  std::size_t d() const noexcept { return eigenvalues.size(); }
};

// c * phi_1(G). Throws NumericalError("degenerate Gram") when phi_1(G) <= 0.
double ridge_parameter(const Matrix& g, double c);

Matrix msir_coordinate(const Matrix& gx, const Matrix& gy, double tau1, double tau2);

// Q (sum_k 1_k 1_k^T / n_k) Q.
Matrix class_inner_matrix(const ClassSummary& classes);
// (1/n_k) 1_k - (1/n) 1 for class k in 1..K.
std::vector<double> class_direction_coordinate(const ClassSummary& classes, std::size_t k);

Matrix msir_discrete_coordinate(const Matrix& gx, const ClassSummary& classes, double tau1);

// Everything fit() computes, for inspection and testing.
struct FitDetail {
  MsirModel model;
  GramPair gram_x;
  std::optional<GramPair> gram_y;
  Matrix coordinate;             // L
  std::vector<double> spectrum;  // all eigenvalues of the eigen-target, nonincreasing
};

FitDetail fit_detail(const Dataset& data, const MsirConfig& config);
MsirModel fit(const Dataset& data, const MsirConfig& config);

// (v_j^T Q k_X(x))_{j=1..d}
std::vector<double> transform(const MsirModel& model, const Point& x);
// One row per point.
Matrix transform(const MsirModel& model, std::span<const Point> points);
// Row i is v^T Q K_X e_i, the in-sample predictor of training point i.
Matrix in_sample_predictors(const MsirModel& model, const Matrix& kx);

// Per component j, signs s in {+1,-1}^Q maximizing ||sum_q s_q u_{j,q}||^2 where
// u_{j,q} is column j of blocks[q]. Exhaustive for Q <= 15 with the first block
// anchored at +1; greedy against the running sum otherwise. Ties keep +1.
// Result is indexed [q][j].
std::vector<std::vector<int>> align_signs(std::span<const Matrix> blocks);

struct PartitionedFit {
  std::vector<std::vector<std::size_t>> blocks;  // sample indices per subset
  // Subset models with their eigenvector columns multiplied by the aligned signs.
  std::vector<MsirModel> models;
  std::vector<std::vector<int>> signs;  // [q][j]
  Matrix predictors;                    // n x d average over subsets
};

// Seeded uniform shuffle into config.partitions near-equal blocks.
std::vector<std::vector<std::size_t>> random_partition(std::size_t n, std::size_t parts, std::uint64_t seed);

PartitionedFit fit_partitioned(const Dataset& data, const MsirConfig& config, std::uint64_t seed);
PartitionedFit fit_on_blocks(const Dataset& data, const MsirConfig& config,
                             std::vector<std::vector<std::size_t>> blocks);

// Mean of the member transforms; the models carry aligned signs already.
Matrix ensemble_transform(std::span<const MsirModel> models, std::span<const Point> points);

}  // namespace msir
