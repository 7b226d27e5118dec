#pragma once

#include <stdexcept>
#include <string>

namespace presence {

/// Bad or missing input data: empty traces, malformed CSV rows, misaligned series.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The self-training loop could not continue (a class emptied, the noise
/// estimator found no feasible solution).
class AlgorithmError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace presence
