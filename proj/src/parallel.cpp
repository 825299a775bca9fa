#include "trajopt/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace trajopt::parallel {

namespace {
thread_local bool g_enabled = true;
}

bool enabled() { return g_enabled; }

void set_enabled(bool on) { g_enabled = on; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace trajopt::parallel
