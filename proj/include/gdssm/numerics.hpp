// Copyright 2026 The gdssm Authors. Apache 2.0 License.
//
// Dense row-major matrices and keyed random streams. Everything downstream
// works in 64-bit floats; the construction/oracle equivalence checks need
// ~1e-10 agreement, which single precision cannot deliver.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gdssm {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Vector col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> v);

  Matrix transposed() const;
  void fill(double v);

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  bool operator==(const Matrix& o) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// Throws std::invalid_argument naming both shapes when a.cols != b.rows.
Matrix mat_mul(const Matrix& a, const Matrix& b);
Vector mat_vec(const Matrix& a, std::span<const double> x);
// aᵀ·x without materialising the transpose.
Vector mat_t_vec(const Matrix& a, std::span<const double> x);
Matrix outer(std::span<const double> a, std::span<const double> b);
Matrix hadamard(const Matrix& a, const Matrix& b);

// a += s · u vᵀ
void add_outer(Matrix& a, double s, std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius_norm(const Matrix& a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

// ⟨a,b⟩/(‖a‖‖b‖); nullopt when either vector has zero norm.
std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b);

// Counter-based stream keyed by (seed, stream_id). Draw k of a stream is
// mix(key + mix(k)), so streams never share state and can be consumed in any
// order or on any thread.
//
// Unit samples are (top 52 bits + 0.5) · 2^-52, strictly inside (0, 1), so
// a·(2u - 1) stays strictly inside (-a, a). Normal draws use the basic
// Box-Muller transform on two consecutive unit samples (u1, u2):
//   r = sqrt(-2 ln u1),  z0 = r cos(2π u2),  z1 = r sin(2π u2)
// with z1 cached for the following call.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  double unit_open();             // (0, 1)
  double uniform(double a);       // (-a, a)
  double standard_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

enum class Distribution { kUniform, kStandardNormal };

// `a` is the half-width for kUniform and ignored otherwise.
Vector rng_draw(RngStream& stream, Distribution dist, std::size_t n, double a = 1.0);

std::uint64_t mix64(std::uint64_t x);
// Derives a stream id from a domain tag and up to two indices.
std::uint64_t stream_key(std::uint64_t domain, std::uint64_t a, std::uint64_t b = 0);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
// Throws std::invalid_argument unless the whole string is a number.
double parse_double(std::string_view s);

// FNV-1a, used for stable config hashes.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace gdssm
