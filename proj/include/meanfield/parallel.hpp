#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meanfield {

// Worker count for data-parallel kernels. MF_SAMPLER_THREADS caps it;
// unset or invalid means "whatever OpenMP would use".
inline int worker_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
    if (const char* env = std::getenv("MF_SAMPLER_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<long>(n, cap);
    }
    return std::max(1, n);
#else
    return 1;
#endif
}

}  // namespace meanfield
