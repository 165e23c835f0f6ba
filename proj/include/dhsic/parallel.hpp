#pragma once

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dhsic {

// Worker count used by the OpenMP kernels. Order of precedence:
// explicit request > DHSIC_THREADS environment variable > OpenMP default.
// Results never depend on the value; only wall time does.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DHSIC_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace dhsic
