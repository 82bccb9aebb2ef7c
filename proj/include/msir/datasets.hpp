#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "msir/dataset.hpp"
#include "msir/matrix.hpp"
#include "msir/metric_spaces.hpp"

namespace msir {

// Anchor of the torus regression models: (0.5, 0.5) for model 1, (1, 1) for model 2.
std::vector<double> torus_anchor(int model_id);

// Y = d_G(x, anchor) + noise for one predictor on the unit-square torus.
double torus_response(int model_id, const VectorPoint& x, double noise = 0.0);

// X_i ~ Uniform[0,1]^2, Y_i = d_G(X_i, anchor) + sigma * N(0,1), drawn from
// CounterRng(seed, stream). Per sample the draws are x1, x2, then the normal.
Dataset generate_torus_dataset(int model_id, std::size_t n, double sigma, std::uint64_t seed,
                               std::uint64_t stream = 0);

// Class k in 1..K (sample i has class i mod K + 1): M = B B^T / p + (1 + k * separation) I.
Dataset generate_spd_dataset(std::size_t n, std::size_t p, std::size_t classes, double separation,
                             std::uint64_t seed);

// Sparse compositions with exactly support_size nonzeros. Each class favours
// its own contiguous block of p / K coordinates (weight 4 versus 1 when the
// support is drawn without replacement); nonzero values are Exp(1) draws
// normalized to sum 1. Labels are 1..K, sample i has class i mod K + 1.
Dataset generate_composition_dataset(std::size_t n, std::size_t p, std::size_t support_size, std::size_t classes,
                                     std::uint64_t seed);

// (sqrt v_1, ..., sqrt v_p) on the unit sphere.
VectorPoint sqrt_compositional_map(std::span<const double> v);

// Nonzero entries become 1. Entries with |v_i| <= threshold count as zero.
VectorPoint dichotomize(std::span<const double> v, double threshold = 0.0);

// Projects every matrix onto the top-m eigenvectors of the sample-mean matrix
// and lifts eigenvalues below `floor` to `floor`.
std::vector<SpdPoint> spd_common_projection(std::span<const SpdPoint> matrices, std::size_t m, double floor);

}  // namespace msir
