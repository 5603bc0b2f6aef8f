#include "seacgd/kernels.hpp"

#include <cassert>

namespace seacgd::kernels {

namespace serial {

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double squared_norm(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double add_and_squared_norm(std::span<const double> u, std::span<double> y) {
  assert(u.size() == y.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    y[i] += u[i];
    acc += u[i] * u[i];
  }
  return acc;
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + beta * y[i];
}

}  // namespace serial

namespace {

bool go_parallel(std::size_t n) { return n >= kParallelThreshold; }

}  // namespace

double sum(std::span<const double> x) {
  if (!go_parallel(x.size())) return serial::sum(x);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double* p = x.data();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc += p[i];
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  if (!go_parallel(x.size())) return serial::dot(x, y);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double* a = x.data();
  const double* b = y.data();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(std::span<const double> x) {
  if (!go_parallel(x.size())) return serial::squared_norm(x);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double* p = x.data();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t i = 0; i < n; ++i) acc += p[i] * p[i];
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  if (!go_parallel(x.size())) return serial::axpy(alpha, x, y);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double* a = x.data();
  double* b = y.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) b[i] += alpha * a[i];
}

double add_and_squared_norm(std::span<const double> u, std::span<double> y) {
  assert(u.size() == y.size());
  if (!go_parallel(u.size())) return serial::add_and_squared_norm(u, y);
  const auto n = static_cast<std::ptrdiff_t>(u.size());
  const double* a = u.data();
  double* b = y.data();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    b[i] += a[i];
    acc += a[i] * a[i];
  }
  return acc;
}

void scale(double alpha, std::span<double> x) {
  if (!go_parallel(x.size())) return serial::scale(alpha, x);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double* p = x.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) p[i] *= alpha;
}

void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  assert(x.size() == y.size());
  if (!go_parallel(x.size())) return serial::axpby(alpha, x, beta, y);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const double* a = x.data();
  double* b = y.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) b[i] = alpha * a[i] + beta * b[i];
}

}  // namespace seacgd::kernels
