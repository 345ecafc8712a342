#pragma once

// Data-parallel building blocks. Every parallel kernel has a serial twin and
// writes each output slot from exactly one iteration, so results do not depend
// on the thread schedule.

#include "dhr/linalg.hpp"

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace dhr::kernels {

enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);
int max_threads();

// Runs body(i) for i in [0, n). Exceptions are collected per index and the one
// with the lowest index is rethrown after the loop.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec e = default_exec());

template <class T>
std::vector<T> map_indices(std::size_t n, const std::function<T(std::size_t)>& f, Exec e = default_exec()) {
  std::vector<T> out(n);
  for_each_index(n, [&](std::size_t i) { out[i] = f(i); }, e);
  return out;
}

// Matrix whose column j is column(j); rows fixed in advance.
Mat assemble_columns(Eigen::Index rows, Eigen::Index cols, const std::function<Vec(Eigen::Index)>& column,
                     Exec e = default_exec());

// Pairwise sum with a fixed tree layout: ((t0+t1)+(t2+t3))+...
Mat tree_sum(std::vector<Mat> terms, Exec e = default_exec());

// Kernel of the linear map c -> sum_k c_k * vec(apply(basis_k)) stacked over
// all constraint maps. Constraint blocks are assembled per column in parallel and
// folded into a StackedKernel in a fixed order.
Mat constraint_kernel(Eigen::Index unknowns, const std::vector<std::function<Vec(Eigen::Index)>>& constraints,
                      Eigen::Index rows_per_constraint, double tol, Exec e = default_exec());

}  // namespace dhr::kernels
