#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace navrl {

/// Dense row-major matrix; just enough linear algebra for the agent's
/// forward/backward passes.
template <typename S>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, S(0)) {}

  S* row(std::size_t r) { return a.data() + r * cols; }
  const S* row(std::size_t r) const { return a.data() + r * cols; }
  S& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  S at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

namespace detail {

/// Dot product with four independent accumulators; a single running sum
/// serializes on FP-add latency and costs ~4x.
template <typename S>
S dot(const S* a, const S* b, std::size_t n) {
  S s0 = S(0), s1 = S(0), s2 = S(0), s3 = S(0);
  std::size_t c = 0;
  for (; c + 4 <= n; c += 4) {
    s0 += a[c] * b[c];
    s1 += a[c + 1] * b[c + 1];
    s2 += a[c + 2] * b[c + 2];
    s3 += a[c + 3] * b[c + 3];
  }
  for (; c < n; ++c) s0 += a[c] * b[c];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

/// out = M x
template <typename S>
void matvec(const Matrix<S>& m, std::span<const S> x, std::span<S> out) {
  for (std::size_t r = 0; r < m.rows; ++r)
    out[r] = detail::dot(m.row(r), x.data(), m.cols);
}

/// out += M x
template <typename S>
void matvec_add(const Matrix<S>& m, std::span<const S> x, std::span<S> out) {
  for (std::size_t r = 0; r < m.rows; ++r)
    out[r] += detail::dot(m.row(r), x.data(), m.cols);
}

/// out += M^T y
template <typename S>
void matvec_transposed_add(const Matrix<S>& m, std::span<const S> y,
                           std::span<S> out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const S* row = m.row(r);
    const S yr = y[r];
    if (yr == S(0)) continue;
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c] * yr;
  }
}

/// M += u v^T
template <typename S>
void add_outer(Matrix<S>& m, std::span<const S> u, std::span<const S> v) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    S* row = m.row(r);
    const S ur = u[r];
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += ur * v[c];
  }
}

template <typename S>
void add_to(std::span<S> acc, std::span<const S> v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

}  // namespace navrl
