#pragma once

#include <string>

#include "netshrink/search.hpp"

namespace netshrink {

// Emits plot-ready artifacts into out_dir:
//   acc_vs_flops.csv          one row per record with accuracy
//   frontier_r_vs_ratio.csv   frontier members, realized ratio vs r
//   frontier_d_vs_ratio.csv
//   frontier_w_vs_ratio.csv
//   spearman.json             {spearman_r, spearman_d, spearman_w}
void write_reports(const RecordStore& store, const std::string& out_dir,
                   double fraction = 0.20);

} // namespace netshrink
