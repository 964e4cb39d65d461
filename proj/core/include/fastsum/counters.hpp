#pragma once

#include <cstdint>

namespace fastsum {

//! Modeled work counters for a kernel run. Arithmetic is counted per the op
//! model documented at each kernel (complex multiply = 6, complex add = 2,
//! real multiply/add/divide = 1); bytes are the modeled expansion/result
//! traffic, not hardware transactions.
struct KernelCounters {
  std::uint64_t arithmetic_ops = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t bytes_written = 0;
  double elapsed_seconds = 0.0;

  KernelCounters& operator+=(const KernelCounters& o) {
    arithmetic_ops += o.arithmetic_ops;
    bytes_read += o.bytes_read;
    bytes_written += o.bytes_written;
    elapsed_seconds += o.elapsed_seconds;
    return *this;
  }
};

//! Default working-set budget for chunked batch execution. Chunking affects
//! scheduling only, never results.
inline constexpr std::size_t kDefaultWorkingSetBytes = 16384;

}  // namespace fastsum
