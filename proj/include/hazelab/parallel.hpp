#pragma once

// OpenMP helpers with a determinism guarantee: every parallel loop writes
// disjoint elements and every reduction combines fixed-order partials, so
// results are bit-identical for any thread count (including 1).

#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hazelab {

inline int max_threads() {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#if defined(_OPENMP)
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

template <typename Fn>
void parallel_for(int count, Fn&& fn) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) fn(i);
}

// Sum of fn(i) over [0, count); partials are combined serially in index order.
template <typename Fn>
double parallel_sum(int count, Fn&& fn) {
    std::vector<double> partial(size_t(count), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) partial[i] = fn(i);
    double s = 0.0;
    for (double v : partial) s += v;
    return s;
}

}  // namespace hazelab
