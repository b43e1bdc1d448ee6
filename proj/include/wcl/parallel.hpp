#ifndef WCL_PARALLEL_HPP
#define WCL_PARALLEL_HPP

namespace wcl {

// Thread count used by the OpenMP compute kernels (matrix assembly,
// Hessenberg reduction, word enumeration).  Defaults to 1; batch-level
// parallelism across independent tasks is handled separately by the CLI.
// Every kernel is written so that its result is bit-identical for any
// setting: work is split into fixed chunks whose partial results are
// combined in a fixed order, and no chunk's arithmetic depends on the
// number of threads.
int kernel_threads();
void set_kernel_threads(int n);

} // namespace wcl

#endif
