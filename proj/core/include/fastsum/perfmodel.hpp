#pragma once

#include <cstdint>
#include <string>

#include "fastsum/counters.hpp"

namespace fastsum::perf {

//! Analytical chip description. The GT200 values reproduce the classic
//! single-precision peak: 622.08 (SP) + 311.04 (SFU) = 933.12 Gflop/s, and
//! 77.76 Gflop/s double precision.
struct ChipSpec {
  double clock_ghz = 0.0;
  int tpc_count = 0;
  int sm_per_tpc = 0;
  int sp_per_sm = 0;
  int sfu_per_sm = 0;
  int sp_flops_per_cycle = 0;
  int sfu_flops_per_cycle = 0;
  int dp_fpu_per_sm = 0;
  int dp_flops_per_cycle = 0;
  int max_threads_per_sm = 0;
  int max_blocks_per_sm = 0;
  int shared_mem_bytes_per_sm = 0;
};

struct PeakReport {
  double sp_gflops = 0.0;
  double sfu_gflops = 0.0;
  double combined_gflops = 0.0;  // sp + sfu, exact
  double dp_gflops = 0.0;
};

struct KernelMetrics {
  double gops = 0.0;
  double gbps = 0.0;
  double items_per_second = 0.0;
};

PeakReport peak_throughput(const ChipSpec& chip);

//! active / max, in [0, 1].
double occupancy(int active_threads, int max_threads);

//! floor((shared - reserved) / item_bytes): how many items of a given size fit
//! in the shared store after a reservation.
std::int64_t shared_fit(std::int64_t item_bytes, std::int64_t shared_bytes,
                        std::int64_t reserved_bytes);

KernelMetrics kernel_metrics(const KernelCounters& counters, std::uint64_t items);

//! Loads a flat JSON document holding exactly the ChipSpec field names.
//! Missing or mistyped fields raise spec_parse_error naming the field.
ChipSpec load_chip_spec(const std::string& path);

//! The bundled GT200 description.
ChipSpec gt200_spec();

}  // namespace fastsum::perf
