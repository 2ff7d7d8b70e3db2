#pragma once

#include <functional>

namespace iostab {

/// Thread cap for campaigns: IOSTAB_NUM_THREADS if set to a positive integer,
/// otherwise the OpenMP default.
int campaign_threads();

/// Runs body(0..cells-1). Cells must write only to their own slot; the first
/// exception (by cell index) is rethrown after every cell has finished.
void run_cells(int cells, const std::function<void(int)>& body, bool parallel = true);

}  // namespace iostab
