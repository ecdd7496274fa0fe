#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsmle {

/// A point in parameter space (d real coordinates).
using ParameterPoint = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Compact box subset of R^d; every parameter handled by the library is
/// expected to lie inside its box.
class ParameterBox {
  public:
    ParameterBox() = default;
    explicit ParameterBox(std::vector<Interval> dims);

    std::size_t dimension() const { return dims_.size(); }
    const Interval& dim(std::size_t i) const { return dims_.at(i); }
    const std::vector<Interval>& dims() const { return dims_; }

    bool contains(const ParameterPoint& p, double tol = 0.0) const;
    ParameterPoint clamp(ParameterPoint p) const;

  private:
    std::vector<Interval> dims_;
};

/// Small dense row-major matrix. Alphabets are tiny, so no attempt is made
/// at being clever.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return d_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return d_[r * cols_ + c]; }

    static Matrix identity(std::size_t n);

    Matrix multiplied(const Matrix& rhs) const;
    Matrix power(unsigned k) const;

    /// Per-row sums (handy for stochasticity checks).
    std::vector<double> row_sums() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> d_;
};

/// v^T M for a row vector v.
std::vector<double> left_multiply(const std::vector<double>& v, const Matrix& m);

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPosInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Error hierarchy. Zero-likelihood and degenerate Monte Carlo weights are
// values with flags, not exceptions; everything else that violates a contract
// throws one of these.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Transition structure fails the primitivity check, so there is no unique
/// equilibrium state to build.
class NonPrimitiveError : public Error {
  public:
    using Error::Error;
};

/// Power iteration failed to converge within the iteration cap.
class EigenFailureError : public Error {
  public:
    using Error::Error;
};

/// An exhaustive computation was requested beyond its size bound.
class TooLargeError : public Error {
  public:
    using Error::Error;
};

class UnsupportedVariantError : public Error {
  public:
    using Error::Error;
};

/// Requested precision or length beyond the coding depth of a coded map.
class DepthExceededError : public Error {
  public:
    using Error::Error;
};

/// Every grid point evaluated to -inf; no maximizer can be reported.
class AllDegenerateError : public Error {
  public:
    using Error::Error;
};

/// Filesystem-level failure (open/create/write).
class IoError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

class DataFormatError : public Error {
  public:
    DataFormatError(long line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    long line() const { return line_; }

  private:
    long line_ = 0;
};

// ---------------------------------------------------------------------------

/// FNV-1a 64-bit hash; used for config hashes and output checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

/// Format a double so that parsing it back reproduces the exact value.
std::string format_double(double v);

double euclidean_distance(const ParameterPoint& a, const ParameterPoint& b);

}  // namespace dsmle
