#include "lhmp/common.hpp"

#include <cstdlib>
#include <thread>

namespace lhmp {

int worker_threads() {
  if (const char* env = std::getenv("LHMP_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace lhmp
