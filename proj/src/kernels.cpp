#include "cirn/kernels.hpp"

#include <algorithm>

namespace cirn::kernels
{

namespace serial
{

void vec_mat(
  std::span<const double> x, std::span<const double> w, std::span<const double> b,
  std::span<double> y, std::size_t in, std::size_t out)
{
  for (std::size_t j = 0; j < out; ++j) {
    y[j] = b.empty() ? 0.0 : b[j];
  }
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) {
      continue;
    }
    const double * row = w.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) {
      y[j] += xi * row[j];
    }
  }
}

void mat_vec_accumulate(
  std::span<const double> w, std::span<const double> dy, std::span<double> dx,
  std::size_t in, std::size_t out)
{
  for (std::size_t i = 0; i < in; ++i) {
    const double * row = w.data() + i * out;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) {
      acc += row[j] * dy[j];
    }
    dx[i] += acc;
  }
}

void outer_accumulate(
  std::span<const double> x, std::span<const double> dy, std::span<double> dw,
  std::size_t in, std::size_t out)
{
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) {
      continue;
    }
    double * row = dw.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) {
      row[j] += xi * dy[j];
    }
  }
}

void mat_mul(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  for (std::size_t i = 0; i < n; ++i) {
    vec_mat(a.subspan(i * k, k), b, {}, c.subspan(i * m, m), k, m);
  }
}

void mat_mul_at_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  for (std::size_t r = 0; r < k; ++r) {
    outer_accumulate(a.subspan(r * n, n), b.subspan(r * m, m), c, n, m);
  }
}

void mat_mul_bt_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  for (std::size_t i = 0; i < n; ++i) {
    mat_vec_accumulate(b, a.subspan(i * k, k), c.subspan(i * m, m), m, k);
  }
}

}  // namespace serial

namespace omp
{

namespace
{

// Output columns handled by one task; keeps rows contiguous per task.
constexpr std::size_t kColumnBlock = 32;

}  // namespace

void vec_mat(
  std::span<const double> x, std::span<const double> w, std::span<const double> b,
  std::span<double> y, std::size_t in, std::size_t out)
{
  const std::size_t blocks = (out + kColumnBlock - 1) / kColumnBlock;
  #pragma omp parallel for schedule(static) if (in * out >= kParallelThreshold)
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const std::size_t j0 = blk * kColumnBlock;
    const std::size_t j1 = std::min(out, j0 + kColumnBlock);
    for (std::size_t j = j0; j < j1; ++j) {
      y[j] = b.empty() ? 0.0 : b[j];
    }
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) {
        continue;
      }
      const double * row = w.data() + i * out;
      for (std::size_t j = j0; j < j1; ++j) {
        y[j] += xi * row[j];
      }
    }
  }
}

void mat_vec_accumulate(
  std::span<const double> w, std::span<const double> dy, std::span<double> dx,
  std::size_t in, std::size_t out)
{
  #pragma omp parallel for schedule(static) if (in * out >= kParallelThreshold)
  for (std::size_t i = 0; i < in; ++i) {
    const double * row = w.data() + i * out;
    double acc = 0.0;
    for (std::size_t j = 0; j < out; ++j) {
      acc += row[j] * dy[j];
    }
    dx[i] += acc;
  }
}

void outer_accumulate(
  std::span<const double> x, std::span<const double> dy, std::span<double> dw,
  std::size_t in, std::size_t out)
{
  #pragma omp parallel for schedule(static) if (in * out >= kParallelThreshold)
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) {
      continue;
    }
    double * row = dw.data() + i * out;
    for (std::size_t j = 0; j < out; ++j) {
      row[j] += xi * dy[j];
    }
  }
}

void mat_mul(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  #pragma omp parallel for schedule(static) if (n * k * m >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    serial::vec_mat(a.subspan(i * k, k), b, {}, c.subspan(i * m, m), k, m);
  }
}

void mat_mul_at_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  // Parallel over output rows i; each row sums over r in ascending order.
  #pragma omp parallel for schedule(static) if (n * k * m >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    double * out_row = c.data() + i * m;
    for (std::size_t r = 0; r < k; ++r) {
      const double ari = a[r * n + i];
      if (ari == 0.0) {
        continue;
      }
      const double * b_row = b.data() + r * m;
      for (std::size_t j = 0; j < m; ++j) {
        out_row[j] += ari * b_row[j];
      }
    }
  }
}

void mat_mul_bt_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m)
{
  #pragma omp parallel for schedule(static) if (n * k * m >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    serial::mat_vec_accumulate(b, a.subspan(i * k, k), c.subspan(i * m, m), m, k);
  }
}

}  // namespace omp

}  // namespace cirn::kernels
