#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace linkpmf {

using NodeId = std::uint32_t;

/// Row-major dense matrix; rows are nodes, columns are latent dimensions.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or record. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inputs whose dimensions disagree (graph vs. covariates, train vs. test, ...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Pairwise (cascade) summation. The result depends only on the input order,
/// never on thread count, which keeps reductions reproducible.
double pairwise_sum(std::span<const double> values);

}  // namespace linkpmf
