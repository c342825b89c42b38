#ifndef CIRN_KERNELS_HPP_
#define CIRN_KERNELS_HPP_

#include <cstddef>
#include <span>

// Dense kernels behind the policy network. Matrices are row-major with
// shape (rows x cols). `serial` is the reference; `omp` splits the output
// index space across threads and keeps each element's summation order, so
// the two produce bitwise-identical results for any thread count.
namespace cirn::kernels
{

namespace serial
{

/// y[j] = b[j] + sum_i x[i] * w[i, j]   (w: in x out). Empty b means zero.
void vec_mat(
  std::span<const double> x, std::span<const double> w, std::span<const double> b,
  std::span<double> y, std::size_t in, std::size_t out);

/// dx[i] += sum_j w[i, j] * dy[j]
void mat_vec_accumulate(
  std::span<const double> w, std::span<const double> dy, std::span<double> dx,
  std::size_t in, std::size_t out);

/// dw[i, j] += x[i] * dy[j]
void outer_accumulate(
  std::span<const double> x, std::span<const double> dy, std::span<double> dw,
  std::size_t in, std::size_t out);

/// c[i, j] = sum_k a[i, k] * b[k, j]   (a: n x k, b: k x m)
void mat_mul(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

/// c[i, j] += sum_k a[k, i] * b[k, j]   (a: k x n, b: k x m)
void mat_mul_at_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

/// c[i, j] += sum_k a[i, k] * b[j, k]   (a: n x k, b: m x k)
void mat_mul_bt_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

}  // namespace serial

namespace omp
{

void vec_mat(
  std::span<const double> x, std::span<const double> w, std::span<const double> b,
  std::span<double> y, std::size_t in, std::size_t out);

void mat_vec_accumulate(
  std::span<const double> w, std::span<const double> dy, std::span<double> dx,
  std::size_t in, std::size_t out);

void outer_accumulate(
  std::span<const double> x, std::span<const double> dy, std::span<double> dw,
  std::size_t in, std::size_t out);

void mat_mul(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

void mat_mul_at_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

void mat_mul_bt_accumulate(
  std::span<const double> a, std::span<const double> b, std::span<double> c,
  std::size_t n, std::size_t k, std::size_t m);

}  // namespace omp

/// Work size (multiply-adds) below which the omp kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

}  // namespace cirn::kernels

#endif  // CIRN_KERNELS_HPP_
