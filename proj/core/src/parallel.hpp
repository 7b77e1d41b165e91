#pragma once

#ifdef _OPENMP
#include <omp.h>
#define LINKPMF_PARALLEL_FOR \
  _Pragma("omp parallel for schedule(static) num_threads(::linkpmf::num_threads())")
#define LINKPMF_PARALLEL_FOR_COUNT(var) \
  _Pragma(LINKPMF_STRINGIFY(omp parallel for schedule(static) num_threads(::linkpmf::num_threads()) reduction(+ : var)))
#define LINKPMF_STRINGIFY(x) #x
#else
#define LINKPMF_PARALLEL_FOR
#define LINKPMF_PARALLEL_FOR_COUNT(var)
#endif

namespace linkpmf {
int num_threads();
}
