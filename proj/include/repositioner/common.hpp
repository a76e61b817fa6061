#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace repositioner {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  invalid_argument,
  not_found,
  ambiguous,
  io,
  parse,
  validation,
  dimension_mismatch,
  non_finite,
  convergence,
  checksum,
  fingerprint,
  conflict,
  unsupported,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as an Error carrying a machine code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class AmbiguousNameError : public Error {
 public:
  AmbiguousNameError(const std::string& message, std::vector<std::string> candidates)
      : Error(ErrorCode::ambiguous, message), candidates_(std::move(candidates)) {}

  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

 private:
  std::vector<std::string> candidates_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

using Rng = std::mt19937_64;

// Derives an independent generator for a named stream so components seeded
// from the same user seed never share draws.
Rng make_rng(std::uint64_t seed, std::string_view stream);

std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream);

Matrix random_normal(Index rows, Index cols, double stddev, Rng& rng);
Matrix random_uniform(Index rows, Index cols, double low, double high, Rng& rng);

bool all_finite(const Matrix& m);

}  // namespace repositioner
