#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace perikit {

using index_t = std::int32_t;   // node / column indices
using offset_t = std::int64_t;  // row offsets into flattened adjacency

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input deck / geometry.
class DeckError : public Error {
 public:
  using Error::Error;
};

// Blow-up, solver breakdown, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Validation-vs-reference failure (CLI exit code 4).
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kMaxDim = 3;

// Euclidean distance between two d-vectors stored at p and q.
inline double distance(const double* p, const double* q, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double t = q[a] - p[a];
    s += t * t;
  }
  return std::sqrt(s);
}

}  // namespace perikit
