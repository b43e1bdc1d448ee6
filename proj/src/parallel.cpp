#include "wcl/parallel.hpp"

namespace wcl {

namespace {
int g_kernel_threads = 1;
}

int kernel_threads() { return g_kernel_threads; }

void set_kernel_threads(int n) { g_kernel_threads = n < 1 ? 1 : n; }

} // namespace wcl
