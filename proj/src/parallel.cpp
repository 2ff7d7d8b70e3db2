#include "iostab/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

namespace iostab {

int campaign_threads() {
  if (const char* env = std::getenv("IOSTAB_NUM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
      // Unparseable values fall back to the default.
    }
  }
  return omp_get_max_threads();
}

void run_cells(int cells, const std::function<void(int)>& body, bool parallel) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(cells, 0)));
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(campaign_threads())
    for (int i = 0; i < cells; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < cells; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace iostab
