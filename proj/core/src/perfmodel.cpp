#include "fastsum/perfmodel.hpp"

#include <fstream>
#include <stdexcept>

#include "fastsum/errors.hpp"
#include "json.hpp"

namespace fastsum::perf {

PeakReport peak_throughput(const ChipSpec& chip) {
  if (!(chip.clock_ghz > 0.0)) throw std::invalid_argument("peak_throughput: clock must be > 0");
  const double sms = chip.clock_ghz * chip.tpc_count * chip.sm_per_tpc;
  PeakReport r;
  r.sp_gflops = sms * chip.sp_per_sm * chip.sp_flops_per_cycle;
  r.sfu_gflops = sms * chip.sfu_per_sm * chip.sfu_flops_per_cycle;
  r.combined_gflops = r.sp_gflops + r.sfu_gflops;
  r.dp_gflops = sms * chip.dp_fpu_per_sm * chip.dp_flops_per_cycle;
  return r;
}

double occupancy(int active_threads, int max_threads) {
  if (max_threads <= 0) throw std::invalid_argument("occupancy: max_threads must be > 0");
  if (active_threads < 0 || active_threads > max_threads) {
    throw std::invalid_argument("occupancy: active_threads must be in [0, max_threads]");
  }
  return static_cast<double>(active_threads) / static_cast<double>(max_threads);
}

std::int64_t shared_fit(std::int64_t item_bytes, std::int64_t shared_bytes,
                        std::int64_t reserved_bytes) {
  if (item_bytes <= 0) throw std::invalid_argument("shared_fit: item_bytes must be > 0");
  if (reserved_bytes < 0 || reserved_bytes >= shared_bytes) {
    throw std::invalid_argument("shared_fit: reserved_bytes must be in [0, shared_bytes)");
  }
  return (shared_bytes - reserved_bytes) / item_bytes;
}

KernelMetrics kernel_metrics(const KernelCounters& counters, std::uint64_t items) {
  if (!(counters.elapsed_seconds > 0.0)) {
    throw std::invalid_argument("kernel_metrics: elapsed_seconds must be > 0");
  }
  KernelMetrics m;
  m.gops = static_cast<double>(counters.arithmetic_ops) / counters.elapsed_seconds / 1e9;
  m.gbps = static_cast<double>(counters.bytes_read + counters.bytes_written) /
           counters.elapsed_seconds / 1e9;
  m.items_per_second = static_cast<double>(items) / counters.elapsed_seconds;
  return m;
}

ChipSpec load_chip_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_chip_spec: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw spec_parse_error("<document>", std::string("load_chip_spec: invalid JSON: ") + e.what());
  }

  ChipSpec spec;
  auto get_number = [&doc](const char* field, auto& dst) {
    if (!doc.contains(field)) {
      throw spec_parse_error(field, std::string("load_chip_spec: missing field '") + field + "'");
    }
    if (!doc[field].is_number()) {
      throw spec_parse_error(field,
                             std::string("load_chip_spec: field '") + field + "' is not a number");
    }
    dst = doc[field].get<std::remove_reference_t<decltype(dst)>>();
  };
  get_number("clock_ghz", spec.clock_ghz);
  get_number("tpc_count", spec.tpc_count);
  get_number("sm_per_tpc", spec.sm_per_tpc);
  get_number("sp_per_sm", spec.sp_per_sm);
  get_number("sfu_per_sm", spec.sfu_per_sm);
  get_number("sp_flops_per_cycle", spec.sp_flops_per_cycle);
  get_number("sfu_flops_per_cycle", spec.sfu_flops_per_cycle);
  get_number("dp_fpu_per_sm", spec.dp_fpu_per_sm);
  get_number("dp_flops_per_cycle", spec.dp_flops_per_cycle);
  get_number("max_threads_per_sm", spec.max_threads_per_sm);
  get_number("max_blocks_per_sm", spec.max_blocks_per_sm);
  get_number("shared_mem_bytes_per_sm", spec.shared_mem_bytes_per_sm);
  return spec;
}

ChipSpec gt200_spec() {
  ChipSpec s;
  s.clock_ghz = 1.296;
  s.tpc_count = 10;
  s.sm_per_tpc = 3;
  s.sp_per_sm = 8;
  s.sfu_per_sm = 2;
  s.sp_flops_per_cycle = 2;
  s.sfu_flops_per_cycle = 4;
  s.dp_fpu_per_sm = 1;
  s.dp_flops_per_cycle = 2;
  s.max_threads_per_sm = 1024;
  s.max_blocks_per_sm = 8;
  s.shared_mem_bytes_per_sm = 16384;
  return s;
}

}  // namespace fastsum::perf
