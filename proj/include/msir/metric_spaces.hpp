#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msir/matrix.hpp"

namespace msir {

enum class SpaceTag { euclidean, torus_unit_square, unit_sphere, binary };

std::string_view to_string(SpaceTag tag);
std::optional<SpaceTag> parse_space_tag(std::string_view id);

// A point in a vector-type space. Construction validates the tag's invariant:
// torus coordinates in [0,1], unit-sphere norm 1 within 1e-9, binary entries in {0,1}.
class VectorPoint {
 public:
  VectorPoint(std::vector<double> coords, SpaceTag tag = SpaceTag::euclidean);

  const std::vector<double>& coords() const noexcept { return coords_; }
  SpaceTag tag() const noexcept { return tag_; }
  std::size_t size() const noexcept { return coords_.size(); }

  bool operator==(const VectorPoint&) const = default;

 private:
  std::vector<double> coords_;
  SpaceTag tag_;
};

// A symmetric positive definite matrix, validated by Cholesky on construction.
class SpdPoint {
 public:
  explicit SpdPoint(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.rows(); }

  bool operator==(const SpdPoint&) const = default;

 private:
  Matrix m_;
};

using Point = std::variant<VectorPoint, SpdPoint>;

enum class MetricKind {
  euclidean,
  torus_geodesic,
  arc_length,
  hamming,
  spd_affine,
  spd_log_euclidean,
  spd_s_divergence,
  spd_sym_kl,
  spd_frobenius,
  spd_pearson,
};

std::string_view to_string(MetricKind kind);
// Lowercase id as used in CLI flags and model files.
std::optional<MetricKind> parse_metric(std::string_view id);
bool is_spd_metric(MetricKind kind);
// Kinds satisfying the triangle inequality (divergences excluded).
bool is_true_metric(MetricKind kind);
// The tag a vector metric expects its points to carry (euclidean accepts any).
SpaceTag expected_tag(MetricKind kind);

struct MetricOptions {
  // Subtract p/2 from spd_sym_kl so that d(M, M) = 0.
  bool kl_centered = false;
};

double vector_distance(MetricKind kind, const VectorPoint& x, const VectorPoint& y);
double spd_distance(MetricKind kind, const SpdPoint& a, const SpdPoint& b, const MetricOptions& options = {});
// Dispatches on the payload; throws DataError on a payload/kind mismatch.
double distance(MetricKind kind, const Point& x, const Point& y, const MetricOptions& options = {});

// Throws DataError unless the point's payload and tag are valid for kind.
void check_compatible(MetricKind kind, const Point& p);

}  // namespace msir
