// Dense vector kernels used on the hot paths of the dense iterate storage,
// objective evaluation and the power iteration.
//
// Every kernel has an OpenMP version (namespace kernels) and a plain serial
// reference (namespace kernels::serial). The OpenMP versions only fork a
// team above kParallelThreshold elements; below it they run the serial loop,
// so small problems stay bit-identical between the two. Reductions above the
// threshold may differ from the serial reference in the last bits.
#pragma once

#include <cstddef>
#include <span>

namespace seacgd::kernels {

inline constexpr std::size_t kParallelThreshold = 1 << 15;

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y += u, returns ||u||^2. The fused form of one block update.
double add_and_squared_norm(std::span<const double> u, std::span<double> y);
/// x *= alpha
void scale(double alpha, std::span<double> x);
/// y = alpha * x + beta * y
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);

namespace serial {

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double squared_norm(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double add_and_squared_norm(std::span<const double> u, std::span<double> y);
void scale(double alpha, std::span<double> x);
void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y);

}  // namespace serial

}  // namespace seacgd::kernels
