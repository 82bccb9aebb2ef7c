#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "msir/metric_spaces.hpp"

namespace msir {

using ScalarResponse = std::vector<double>;
using LabelResponse = std::vector<int>;
using MetricResponse = std::vector<Point>;
using Response = std::variant<ScalarResponse, MetricResponse, LabelResponse>;

// Paired sample {(X_i, Y_i)}. All x share one payload type.
struct Dataset {
  std::vector<Point> x;
  Response y;

  std::size_t size() const noexcept { return x.size(); }
};

std::size_t response_size(const Response& y);

// Throws DataError unless |x| = |y| >= 1 and x has a uniform payload type.
void validate(const Dataset& d);

// Rows selected by index, in the given order.
Dataset subset(const Dataset& d, const std::vector<std::size_t>& rows);

}  // namespace msir
