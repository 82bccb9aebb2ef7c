#include "msir/kernel_gram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "msir/errors.hpp"

namespace msir {

double gaussian_kernel(double d, double gamma) {
  if (!std::isfinite(d) || !std::isfinite(gamma)) throw DataError("gaussian_kernel: non-finite argument");
  if (d < 0.0) throw DataError("gaussian_kernel: negative distance");
  if (!(gamma > 0.0)) throw DataError("gaussian_kernel: gamma must be positive");
  return std::exp(-gamma * d * d);
}

Matrix pairwise_distances(std::span<const Point> points, MetricKind metric, const MetricOptions& options,
                          unsigned workers) {
  const std::size_t n = points.size();
  for (const Point& p : points) check_compatible(metric, p);
  Matrix d(n, n);

  // Row i fills the upper triangle (i, j > i); rows are dealt round-robin so
  // each worker gets a similar share of the triangle.
  auto fill_rows = [&](unsigned worker, unsigned stride) {
    for (std::size_t i = worker; i < n; i += stride)
      for (std::size_t j = i + 1; j < n; ++j) d(i, j) = distance(metric, points[i], points[j], options);
  };
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          fill_rows(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < n; ++i) {
    d(i, i) = distance(metric, points[i], points[i], options);
    for (std::size_t j = i + 1; j < n; ++j) d(j, i) = d(i, j);
  }
  return d;
}

Matrix kernel_from_distances(const Matrix& distances, double gamma) {
  Matrix k(distances.rows(), distances.cols());
  for (std::size_t i = 0; i < distances.rows(); ++i)
    for (std::size_t j = 0; j < distances.cols(); ++j) k(i, j) = gaussian_kernel(distances(i, j), gamma);
  return k;
}

GramPair gram_matrix(std::span<const Point> points, const KernelConfig& config, unsigned workers) {
  if (points.size() < 2) throw DataError("gram_matrix: need at least two points");
  if (!(config.gamma > 0.0) || !std::isfinite(config.gamma)) throw DataError("gram_matrix: gamma must be positive");
  GramPair out;
  out.K = kernel_from_distances(pairwise_distances(points, config.metric, config.options, workers), config.gamma);
  out.G = center_gram(out.K);
  out.config = config;
  out.n = points.size();
  return out;
}

Matrix center_gram(const Matrix& k) {
  if (!k.square()) throw DataError("center_gram: matrix must be square");
  const std::size_t n = k.rows();
  if (n == 0) return k;
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      row_mean[i] += k(i, j);
      col_mean[j] += k(i, j);
    }
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    row_mean[i] *= inv;
    col_mean[i] *= inv;
    grand += row_mean[i];
  }
  grand *= inv;
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = k(i, j) - row_mean[i] - col_mean[j] + grand;
  return g;
}

std::vector<double> kernel_vector(const Point& x, std::span<const Point> training, const KernelConfig& config) {
  check_compatible(config.metric, x);
  std::vector<double> k(training.size());
  for (std::size_t i = 0; i < training.size(); ++i)
    k[i] = gaussian_kernel(distance(config.metric, x, training[i], config.options), config.gamma);
  return k;
}

double median_heuristic_from_distances(const Matrix& distances) {
  const std::size_t n = distances.rows();
  if (n < 2) throw DataError("median_heuristic_bandwidth: need at least two points");
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(distances(i, j));
  if (*std::max_element(d.begin(), d.end()) <= 0.0)
    throw DataError("median_heuristic_bandwidth: degenerate sample (all pairwise distances are zero)");
  const std::size_t mid = d.size() / 2;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
  double m = d[mid];
  if (d.size() % 2 == 0) {
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  if (!(m > 0.0)) throw DataError("median_heuristic_bandwidth: degenerate sample (median pairwise distance is zero)");
  return 1.0 / (2.0 * m * m);
}

double median_heuristic_bandwidth(std::span<const Point> points, MetricKind metric, const MetricOptions& options) {
  if (points.size() < 2) throw DataError("median_heuristic_bandwidth: need at least two points");
  return median_heuristic_from_distances(pairwise_distances(points, metric, options));
}

double loocv_error(const Matrix& dx, const Response& y, double gamma, const Matrix* response_kernel) {
  const std::size_t n = dx.rows();
  const Matrix w = kernel_from_distances(dx, gamma);

  auto weights_for = [&](std::size_t i) {
    std::vector<double> wi(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      wi[j] = j == i ? 0.0 : w(i, j);
      total += wi[j];
    }
    if (!(total > 0.0)) {
      // Every neighbour underflowed; fall back to the leave-one-out mean.
      for (std::size_t j = 0; j < n; ++j) wi[j] = j == i ? 0.0 : 1.0;
      total = static_cast<double>(n - 1);
    }
    for (double& v : wi) v /= total;
    return wi;
  };

  double err = 0.0;
  if (const auto* s = std::get_if<ScalarResponse>(&y)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto wi = weights_for(i);
      double pred = 0.0;
      for (std::size_t j = 0; j < n; ++j) pred += wi[j] * (*s)[j];
      err += (pred - (*s)[i]) * (pred - (*s)[i]);
    }
  } else if (const auto* labels = std::get_if<LabelResponse>(&y)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto wi = weights_for(i);
      std::map<int, double> votes;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) votes[(*labels)[j]] += wi[j];
      int best = votes.begin()->first;
      double best_vote = -1.0;
      for (const auto& [label, v] : votes)
        if (v > best_vote) {
          best_vote = v;
          best = label;
        }
      if (best != (*labels)[i]) err += 1.0;
    }
  } else {
    if (!response_kernel) throw DataError("loocv_error: metric response needs a response kernel");
    const Matrix& ky = *response_kernel;
    for (std::size_t i = 0; i < n; ++i) {
      const auto wi = weights_for(i);
      double cross = 0.0;
      double quad = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (wi[j] == 0.0) continue;
        cross += wi[j] * ky(i, j);
        for (std::size_t k = 0; k < n; ++k) quad += wi[j] * wi[k] * ky(j, k);
      }
      err += ky(i, i) - 2.0 * cross + quad;
    }
  }
  return err / static_cast<double>(n);
}

double loocv_bandwidth(const Dataset& data, MetricKind metric, std::span<const double> grid, MetricKind metric_y,
                       const MetricOptions& options) {
  if (grid.empty()) throw DataError("loocv_bandwidth: empty grid");
  for (double g : grid)
    if (!(g > 0.0) || !std::isfinite(g)) throw DataError("loocv_bandwidth: grid values must be positive");
  validate(data);
  if (data.size() < 3) throw DataError("loocv_bandwidth: need at least three samples");

  const Matrix dx = pairwise_distances(data.x, metric, options);
  median_heuristic_from_distances(dx);  // rejects a degenerate sample

  Matrix ky;
  const Matrix* ky_ptr = nullptr;
  if (const auto* ys = std::get_if<MetricResponse>(&data.y)) {
    const Matrix dy = pairwise_distances(*ys, metric_y, options);
    ky = kernel_from_distances(dy, median_heuristic_from_distances(dy));
    ky_ptr = &ky;
  }

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best_gamma = sorted.front();
  double best_err = loocv_error(dx, data.y, best_gamma, ky_ptr);
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double e = loocv_error(dx, data.y, sorted[i], ky_ptr);
    if (e < best_err - 1e-12 * std::max(1.0, std::abs(best_err))) {
      best_err = e;
      best_gamma = sorted[i];
    }
  }
  return best_gamma;
}

}  // namespace msir
