#include "mad/matrix.hpp"

#include <algorithm>

namespace mad {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

namespace {

void prepare(Matrix& out, std::size_t rows, std::size_t cols, bool accumulate) {
  if (accumulate) {
    assert(out.rows() == rows && out.cols() == cols);
    return;
  }
  if (out.rows() != rows || out.cols() != cols) {
    out = Matrix(rows, cols);
  } else {
    out.fill(0.0);
  }
}

// Left operand element (r, p) lives at a[r * a_rs + p * a_ps]; the right
// operand is row-major with leading dimension ldb.
struct Operands {
  const double* a;
  std::size_t a_rs;
  std::size_t a_ps;
  const double* b;
  std::size_t ldb;
  double* c;
  std::size_t ldc;
  std::size_t k;
};

// Four-lane vector; element-wise ops keep the scalar rounding of each lane.
typedef double Lanes __attribute__((vector_size(32), aligned(8)));
constexpr std::size_t kLanes = 4;

template <std::size_t R, std::size_t V>
inline void vector_tile(const Operands& o, std::size_t i, std::size_t j) {
  Lanes acc[R][V];
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      acc[r][v] = *reinterpret_cast<const Lanes*>(o.c + (i + r) * o.ldc + j + v * kLanes);
    }
  }
  const double* arow = o.a + i * o.a_rs;
  const double* bcol = o.b + j;
  for (std::size_t p = 0; p < o.k; ++p) {
    const double* brow = bcol + p * o.ldb;
    Lanes bv[V];
    for (std::size_t v = 0; v < V; ++v) {
      bv[v] = *reinterpret_cast<const Lanes*>(brow + v * kLanes);
    }
    for (std::size_t r = 0; r < R; ++r) {
      const double ar = arow[r * o.a_rs + p * o.a_ps];
      const Lanes av = {ar, ar, ar, ar};
      for (std::size_t v = 0; v < V; ++v) acc[r][v] += av * bv[v];
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      *reinterpret_cast<Lanes*>(o.c + (i + r) * o.ldc + j + v * kLanes) = acc[r][v];
    }
  }
}

template <std::size_t R>
inline void scalar_column(const Operands& o, std::size_t i, std::size_t j) {
  double acc[R];
  for (std::size_t r = 0; r < R; ++r) acc[r] = o.c[(i + r) * o.ldc + j];
  const double* arow = o.a + i * o.a_rs;
  for (std::size_t p = 0; p < o.k; ++p) {
    const double bpj = o.b[p * o.ldb + j];
    for (std::size_t r = 0; r < R; ++r) acc[r] += arow[r * o.a_rs + p * o.a_ps] * bpj;
  }
  for (std::size_t r = 0; r < R; ++r) o.c[(i + r) * o.ldc + j] = acc[r];
}

template <std::size_t R>
inline void row_block(const Operands& o, std::size_t i, std::size_t n) {
  constexpr std::size_t kWide = 3;
  std::size_t j = 0;
  for (; j + kWide * kLanes <= n; j += kWide * kLanes) vector_tile<R, kWide>(o, i, j);
  for (; j + kLanes <= n; j += kLanes) vector_tile<R, 1>(o, i, j);
  for (; j < n; ++j) scalar_column<R>(o, i, j);
}

void gemm(const Operands& o, std::size_t m, std::size_t n) {
  constexpr std::size_t kRows = 4;
  std::size_t i = 0;
  for (; i + kRows <= m; i += kRows) row_block<kRows>(o, i, n);
  for (; i < m; ++i) row_block<1>(o, i, n);
}

}  // namespace

void matmul(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  assert(a.cols() == b.rows());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  prepare(out, m, n, accumulate);
  gemm({a.data(), k, 1, b.data(), n, out.data(), n, k}, m, n);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  assert(a.rows() == b.rows());
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  prepare(out, m, n, accumulate);
  gemm({a.data(), 1, m, b.data(), n, out.data(), n, k}, m, n);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  assert(a.cols() == b.cols());
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  prepare(out, m, n, accumulate);
  Matrix bt(k, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt(p, j) = b(j, p);
  }
  gemm({a.data(), k, 1, bt.data(), n, out.data(), n, k}, m, n);
}

}  // namespace mad
