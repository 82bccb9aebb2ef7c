#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "msir/dataset.hpp"
#include "msir/matrix.hpp"
#include "msir/metric_spaces.hpp"

namespace msir {

enum class PredictorFormat { vector, spd, composition };
enum class ResponseFormat { scalar, label, vector };
// Applied to composition rows after renormalization.
enum class CompositionMap { none, sqrt_sphere, dichotomize };

// File layouts (UTF-8, decimal point, comma separated, one header line):
//   vector       y,x1,...,xp | label,x1,...,xp | y1,...,yq,x1,...,xp
//   spd          label,p,m11,m12,...,mpp (row-major; symmetry checked at 1e-8)
//   composition  label,x1,...,xp (rows renormalized when the sum is within 1e-6 of 1)
struct CsvSchema {
  PredictorFormat predictors = PredictorFormat::vector;
  ResponseFormat response = ResponseFormat::scalar;
  SpaceTag tag = SpaceTag::euclidean;  // vector predictors
  CompositionMap composition_map = CompositionMap::none;
  double dichotomize_threshold = 0.0;
};

Dataset load_csv_dataset(const std::string& path, const CsvSchema& schema);
Dataset parse_csv_dataset(std::istream& in, const CsvSchema& schema);

// Guesses format and response from the header. The metric picks the point tag
// and, for compositions, the map (arc_length -> sqrt map, hamming -> dichotomize).
CsvSchema infer_schema(const std::string& path, MetricKind metric);

// Shortest of 15..17 significant digits that reads back to the same double.
std::string format_double(double v);
// Always 17 significant digits.
std::string format_double17(double v);

void write_dataset_csv(std::ostream& out, const Dataset& d);
void write_dataset_csv(const std::string& path, const Dataset& d);

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header);

}  // namespace msir
