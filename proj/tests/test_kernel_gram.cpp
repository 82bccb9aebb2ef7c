#include <gtest/gtest.h>

#include <cmath>

#include "msir/dataset.hpp"
#include "msir/dense_linalg.hpp"
#include "msir/errors.hpp"
#include "msir/kernel_gram.hpp"
#include "test_support.hpp"

using namespace msir;
namespace mt = msir::testing;

namespace {

std::vector<Point> line_points(std::initializer_list<double> xs) {
  std::vector<Point> pts;
  for (double x : xs) pts.emplace_back(VectorPoint({x}));
  return pts;
}

std::vector<Point> random_points(MetricKind k, std::size_t n, std::size_t dim) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(mt::random_point(k, dim));
  return pts;
}

// Centering through explicit Q = I - 11^T/n products.
Matrix explicit_centering(const Matrix& k) {
  const std::size_t n = k.rows();
  Matrix q = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) -= 1.0 / static_cast<double>(n);
  return mt::naive_product(mt::naive_product(q, k), q);
}

}  // namespace

TEST(GaussianKernel, Examples) {
  EXPECT_EQ(gaussian_kernel(0.0, 3.7), 1.0);
  EXPECT_NEAR(gaussian_kernel(1.0, 1.0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(gaussian_kernel(2.0, 0.25), std::exp(-1.0), 1e-16);
}

TEST(GaussianKernel, ErrorsAndMonotone) {
  EXPECT_THROW(gaussian_kernel(NAN, 1.0), DataError);
  EXPECT_THROW(gaussian_kernel(1.0, INFINITY), DataError);
  EXPECT_THROW(gaussian_kernel(-1.0, 1.0), DataError);
  EXPECT_THROW(gaussian_kernel(1.0, 0.0), DataError);
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double k = gaussian_kernel(0.05 * i, 0.7);
    EXPECT_LT(k, prev);
    prev = k;
  }
}

TEST(GramMatrix, Examples) {
  auto same = line_points({0.3, 0.3});
  GramPair g = gram_matrix(same, {2.0, MetricKind::euclidean});
  EXPECT_EQ(g.K, (Matrix{{1, 1}, {1, 1}}));
  EXPECT_EQ(g.n, 2u);

  auto pts = line_points({0.0, 1.0});
  g = gram_matrix(pts, {1.0, MetricKind::euclidean});
  EXPECT_NEAR(g.K(0, 1), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(g.K(1, 0), std::exp(-1.0), 1e-16);
  EXPECT_EQ(g.K(0, 0), 1.0);
  EXPECT_THROW(gram_matrix(line_points({1.0}), {1.0, MetricKind::euclidean}), DataError);
}

TEST(GramMatrix, InvariantsAcrossMetrics) {
  for (MetricKind k : mt::all_metrics()) {
    auto pts = random_points(k, 25, 3);
    const double gamma = median_heuristic_bandwidth(pts, k);
    GramPair g = gram_matrix(pts, {gamma, k});
    // The verbatim symmetrized KL has d(M, M) = p/2.
    const double diag = k == MetricKind::spd_sym_kl ? std::exp(-gamma * 1.5 * 1.5) : 1.0;
    for (std::size_t i = 0; i < 25; ++i) {
      EXPECT_NEAR(g.K(i, i), diag, 1e-12) << to_string(k);
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < 25; ++j) {
        EXPECT_EQ(g.K(i, j), g.K(j, i));
        EXPECT_GT(g.K(i, j), 0.0);
        EXPECT_LE(g.K(i, j), 1.0);
        row += g.G(i, j);
        col += g.G(j, i);
      }
      EXPECT_LE(std::abs(row), 1e-8 * 25);
      EXPECT_LE(std::abs(col), 1e-8 * 25);
    }
  }
}

// exp(-gamma d^2) is positive semi-definite when d is a Hilbert-space distance:
// euclidean, log-euclidean, frobenius and pearson are of that kind.
TEST(GramMatrix, PsdForHilbertianMetrics) {
  for (MetricKind k : {MetricKind::euclidean, MetricKind::spd_log_euclidean, MetricKind::spd_frobenius,
                       MetricKind::spd_pearson}) {
    auto pts = random_points(k, 25, 3);
    GramPair g = gram_matrix(pts, {median_heuristic_bandwidth(pts, k), k});
    auto eg = linalg::sym_eigendecomposition(g.G);
    EXPECT_GE(eg.eigenvalues.back(), -1e-8 * eg.eigenvalues.front()) << to_string(k);
  }
}

// The remaining kinds give indefinite Gram matrices on random samples. The
// smallest relative eigenvalue is recorded in the test report.
TEST(GramMatrix, RecordsIndefinitenessForOtherMetrics) {
  for (MetricKind k : {MetricKind::torus_geodesic, MetricKind::arc_length, MetricKind::hamming,
                       MetricKind::spd_affine, MetricKind::spd_s_divergence, MetricKind::spd_sym_kl}) {
    auto pts = random_points(k, 25, 3);
    GramPair g = gram_matrix(pts, {median_heuristic_bandwidth(pts, k), k});
    auto eg = linalg::sym_eigendecomposition(g.G);
    const double rel = eg.eigenvalues.back() / eg.eigenvalues.front();
    RecordProperty(std::string("min_relative_eigenvalue_") + std::string(to_string(k)), std::to_string(rel));
    EXPECT_GT(eg.eigenvalues.front(), 0.0);
    EXPECT_GE(rel, -1.0);
  }
}

TEST(GramMatrix, WorkerCountDoesNotChangeResult) {
  auto pts = random_points(MetricKind::spd_affine, 30, 3);
  KernelConfig cfg{0.3, MetricKind::spd_affine};
  GramPair a = gram_matrix(pts, cfg, 1);
  GramPair b = gram_matrix(pts, cfg, 4);
  EXPECT_EQ(a.K, b.K);
  EXPECT_EQ(a.G, b.G);
}

TEST(CenterGram, Examples) {
  Matrix c = center_gram(Matrix::identity(2));
  EXPECT_LE(max_abs_diff(c, Matrix{{0.5, -0.5}, {-0.5, 0.5}}), 1e-16);
  EXPECT_LE(max_abs(center_gram(Matrix(5, 5, 1.0))), 1e-16);
  Matrix g = center_gram(mt::random_spd(6));
  EXPECT_LE(max_abs_diff(center_gram(g), g), 1e-10);
  EXPECT_THROW(center_gram(Matrix(2, 3)), DataError);
}

TEST(CenterGram, MatchesExplicitProjector) {
  for (std::size_t n = 2; n <= 20; ++n) {
    Matrix k = mt::random_spd(n);
    EXPECT_LE(max_abs_diff(center_gram(k), explicit_centering(k)), 1e-12);
  }
}

TEST(KernelVector, Examples) {
  auto pts = line_points({0.0, 1.0});
  KernelConfig cfg{1.0, MetricKind::euclidean};
  auto v = kernel_vector(VectorPoint({0.5}), pts, cfg);
  EXPECT_NEAR(v[0], std::exp(-0.25), 1e-16);
  EXPECT_NEAR(v[1], std::exp(-0.25), 1e-16);

  auto rnd = random_points(MetricKind::torus_geodesic, 15, 2);
  KernelConfig tc{2.0, MetricKind::torus_geodesic};
  GramPair g = gram_matrix(rnd, tc);
  for (std::size_t i = 0; i < rnd.size(); ++i) {
    auto row = kernel_vector(rnd[i], rnd, tc);
    for (std::size_t j = 0; j < rnd.size(); ++j) EXPECT_EQ(row[j], g.K(i, j));
  }
}

TEST(KernelVector, EquidistantGivesConstant) {
  std::vector<Point> corners = {VectorPoint({0.0, 0.0}), VectorPoint({1.0, 0.0}), VectorPoint({0.0, 1.0}),
                                VectorPoint({1.0, 1.0})};
  auto v = kernel_vector(VectorPoint({0.5, 0.5}), corners, {0.8, MetricKind::euclidean});
  for (double x : v) EXPECT_DOUBLE_EQ(x, std::exp(-0.8 * 0.5));
}

TEST(MedianHeuristic, Examples) {
  EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(line_points({0, 1, 3}), MetricKind::euclidean), 0.125);
  EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(line_points({2, 3}), MetricKind::euclidean), 0.5);
  try {
    median_heuristic_bandwidth(line_points({4, 4, 4}), MetricKind::euclidean);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate sample"), std::string::npos);
  }
}

TEST(MedianHeuristic, EvenCountAveragesMiddlePair) {
  // distances {1,2,3,3,4,6}? points {0,1,3,4}: 1,3,4,2,3,1 -> sorted 1,1,2,3,3,4, median 2.5
  EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(line_points({0, 1, 3, 4}), MetricKind::euclidean),
                   1.0 / (2.0 * 2.5 * 2.5));
}

TEST(Loocv, SingleGridPoint) {
  Dataset d{line_points({0, 1, 2, 3}), ScalarResponse{0, 1, 4, 9}};
  const double grid[] = {0.7};
  EXPECT_EQ(loocv_bandwidth(d, MetricKind::euclidean, grid), 0.7);
}

TEST(Loocv, SelectedGammaMinimizesGridError) {
  // noiseless torus distance-to-anchor response
  std::vector<Point> x;
  ScalarResponse y;
  for (int i = 0; i < 50; ++i) {
    Point p = mt::random_point(MetricKind::torus_geodesic, 2);
    y.push_back(distance(MetricKind::torus_geodesic, p, VectorPoint({1.0, 1.0}, SpaceTag::torus_unit_square)));
    x.push_back(p);
  }
  Dataset d{x, y};
  std::vector<double> grid = {0.5, 2, 8, 32, 128, 512};
  const double best = loocv_bandwidth(d, MetricKind::torus_geodesic, grid);
  Matrix dist = pairwise_distances(d.x, MetricKind::torus_geodesic);
  const double best_err = loocv_error(dist, d.y, best, nullptr);
  for (double g : grid) EXPECT_LE(best_err, loocv_error(dist, d.y, g, nullptr));
}

TEST(Loocv, TiesGoToSmallestGamma) {
  // a constant response has zero error at every bandwidth
  Dataset d{line_points({0, 1, 2, 5}), ScalarResponse{3, 3, 3, 3}};
  const double grid[] = {4.0, 0.25, 1.0};
  EXPECT_EQ(loocv_bandwidth(d, MetricKind::euclidean, grid), 0.25);
}

TEST(Loocv, LabelsAndErrors) {
  Dataset d{line_points({0, 0.1, 0.2, 5, 5.1, 5.2}), LabelResponse{1, 1, 1, 2, 2, 2}};
  const double grid[] = {0.01, 1.0};
  const double g = loocv_bandwidth(d, MetricKind::euclidean, grid);
  Matrix dist = pairwise_distances(d.x, MetricKind::euclidean);
  EXPECT_EQ(loocv_error(dist, d.y, g, nullptr), 0.0);
  EXPECT_THROW(loocv_bandwidth(d, MetricKind::euclidean, std::span<const double>{}), DataError);
  Dataset tiny{line_points({0, 1}), ScalarResponse{0, 1}};
  EXPECT_THROW(loocv_bandwidth(tiny, MetricKind::euclidean, grid), DataError);
}
