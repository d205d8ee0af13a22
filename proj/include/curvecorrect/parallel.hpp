#pragma once

#include <cstddef>

#if defined(CURVECORRECT_HAVE_OPENMP)
#include <omp.h>
#endif

namespace curvecorrect {

/// Number of worker threads the OpenMP runtime would use (1 without OpenMP).
inline int hardware_jobs() noexcept {
#if defined(CURVECORRECT_HAVE_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs body(i) for every i in [0, count).
///
/// jobs == 1 is the serial reference path; jobs == 0 uses all hardware
/// threads; jobs > 1 caps the OpenMP team size. Bodies must be pure apart
/// from writing to slots owned by iteration i, so the serial and parallel
/// paths produce bit-identical results (asserted in the test suite).
/// Exceptions must not escape a body when jobs != 1.
template <typename Body>
void parallel_for(std::size_t count, int jobs, Body&& body) {
#if defined(CURVECORRECT_HAVE_OPENMP)
    if (jobs != 1 && count > 1) {
        const int team = jobs <= 0 ? omp_get_max_threads() : jobs;
#pragma omp parallel for schedule(dynamic) num_threads(team)
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#else
    (void)jobs;
#endif
    for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace curvecorrect
