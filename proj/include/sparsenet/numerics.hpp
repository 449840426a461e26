#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace sparsenet {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Nested-list construction, mostly for tests: {{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * bᵀ; both operands are walked along contiguous rows.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// aᵀ * b.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

/// Caps the worker threads the matmul kernels may use. 0 or 1 means the
/// calling thread only. Parallel kernels split the output by rows, so every
/// entry is accumulated in the same order and results stay bit-identical.
void set_num_threads(unsigned n);
unsigned num_threads();
/// Reads SPARSENET_THREADS and applies it; unset or unparsable means 0.
void configure_threads_from_env();

/// Row-wise softmax with log-sum-exp stabilization.
Matrix softmax(const Matrix& logits);

struct LossAndGrad {
  double loss = 0.0;
  Matrix dlogits;
};

/// Mean cross-entropy over the batch and its gradient with respect to the logits
/// (softmax - onehot, divided by the batch size).
LossAndGrad softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Index of the largest entry of `values`; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values) noexcept;

/// xoshiro256** generator seeded through splitmix64.
///
/// Seeding: s[i] = splitmix64 outputs 1..4 where splitmix64 advances its state
/// by 0x9E3779B97F4A7C15 and mixes with 0xBF58476D1CE4E5B9 (>>30) and
/// 0x94D049BB133111EB (>>27, >>31). Draws use the reference xoshiro256**
/// update: result = rotl(s1 * 5, 7) * 9; t = s1 << 17; s2 ^= s0; s3 ^= s1;
/// s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45).
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t next() noexcept;
  std::uint64_t operator()() noexcept { return next(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal() noexcept;

  /// Fisher-Yates shuffle, back to front.
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace sparsenet
