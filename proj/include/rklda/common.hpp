#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace rklda {

using Index = Eigen::Index;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

/// How a failure should be reported to the caller of the CLI.
enum class ErrorClass { kData, kNumerical };

class Error : public std::runtime_error {
 public:
  Error(std::string kind, ErrorClass cls, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), cls_(cls) {}

  const std::string& kind() const noexcept { return kind_; }
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  std::string kind_;
  ErrorClass cls_;
};

#define RKLDA_DEFINE_ERROR(Name, Class)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(#Name, Class, what) {} \
  };

RKLDA_DEFINE_ERROR(InvalidData, ErrorClass::kData)
RKLDA_DEFINE_ERROR(IndexError, ErrorClass::kData)
RKLDA_DEFINE_ERROR(DegenerateLabels, ErrorClass::kData)
RKLDA_DEFINE_ERROR(DegenerateMatrix, ErrorClass::kData)
RKLDA_DEFINE_ERROR(TooLarge, ErrorClass::kData)
RKLDA_DEFINE_ERROR(ClassCoverageError, ErrorClass::kData)
RKLDA_DEFINE_ERROR(ZeroRowError, ErrorClass::kNumerical)
RKLDA_DEFINE_ERROR(NumericalDivergence, ErrorClass::kNumerical)
RKLDA_DEFINE_ERROR(DegenerateSubspace, ErrorClass::kNumerical)

#undef RKLDA_DEFINE_ERROR

// Random numbers
//
// All randomness flows through std::mt19937_64, whose output sequence is fixed
// by the C++ standard. Conversions to doubles and bounded integers are done here
// rather than through <random> distributions, whose algorithms are
// implementation-defined. Substreams are derived from (seed, stream id) with the
// SplitMix64 finalizer so replicates and trials never share a sequence.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection; bound > 0.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

/// Standard normal via Box-Muller on uniform01; used by the synthetic generators.
inline double standard_normal(Rng& rng) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace rklda
