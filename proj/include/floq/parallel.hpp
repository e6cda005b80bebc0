#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace floq {

// Every sweep takes an execution policy. The serial path is the reference;
// the parallel path must produce bit-identical results because each work item
// is independent and results land in preallocated slots.
enum class Exec { serial, parallel };

inline int default_jobs() { return omp_get_num_procs(); }

template <class F>
auto parallel_map(std::size_t n, Exec exec, F&& f, int jobs = 0)
    -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(n);
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  const int threads = jobs > 0 ? jobs : default_jobs();
  const auto count = static_cast<long>(n);
  // Exceptions cannot cross the region; the lowest failing index is rethrown.
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Order-fixed pairwise summation of equally sized vectors.
template <class V>
V pairwise_sum(const std::vector<V>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  V a = pairwise_sum(parts, lo, mid);
  a += pairwise_sum(parts, mid, hi);
  return a;
}

}  // namespace floq
