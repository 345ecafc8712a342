#include "dhr/kernels.hpp"

#include <omp.h>

#include <atomic>

namespace dhr::kernels {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};
}

Exec default_exec() { return g_exec.load(); }
void set_default_exec(Exec e) { g_exec.store(e); }
int max_threads() { return omp_get_max_threads(); }

void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body, Exec e) {
  if (n == 0) return;
  if (e == Exec::serial || n == 1 || omp_in_parallel()) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

Mat assemble_columns(Eigen::Index rows, Eigen::Index cols, const std::function<Vec(Eigen::Index)>& column, Exec e) {
  Mat out(rows, cols);
  for_each_index(
      static_cast<std::size_t>(cols),
      [&](std::size_t j) {
        Vec c = column(static_cast<Eigen::Index>(j));
        if (c.size() != rows) throw Error("assemble_columns: column length mismatch");
        out.col(static_cast<Eigen::Index>(j)) = c;
      },
      e);
  return out;
}

Mat tree_sum(std::vector<Mat> terms, Exec e) {
  if (terms.empty()) throw Error("tree_sum: no terms");
  while (terms.size() > 1) {
    const std::size_t half = terms.size() / 2;
    std::vector<Mat> next((terms.size() + 1) / 2);
    for_each_index(
        half, [&](std::size_t i) { next[i] = terms[2 * i] + terms[2 * i + 1]; }, e);
    if (terms.size() % 2 == 1) next.back() = std::move(terms.back());
    terms = std::move(next);
  }
  return terms.front();
}

Mat constraint_kernel(Eigen::Index unknowns, const std::vector<std::function<Vec(Eigen::Index)>>& constraints,
                      Eigen::Index rows_per_constraint, double tol, Exec e) {
  StackedKernel acc(unknowns);
  for (const auto& c : constraints) acc.add(assemble_columns(rows_per_constraint, unknowns, c, e));
  return acc.kernel(tol);
}

}  // namespace dhr::kernels
