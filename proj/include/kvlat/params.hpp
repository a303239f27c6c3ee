#pragma once

#include <cstdint>
#include <limits>

namespace kvlat {

// Per-core timing and shape parameters of one KV operation. All durations are
// seconds; m_accesses is the mean number of memory accesses per IO (real-valued,
// per-IO after the S-split), s_ios the mean number of IOs per KV operation.
struct OperationModelParams {
    double t_mem = 0.1e-6;       // memory suboperation compute time
    double t_sw = 0.05e-6;       // context switch time
    double t_io_pre = 4.0e-6;    // pre-IO suboperation time (submit path)
    double t_io_post = 3.0e-6;   // post-IO suboperation time (completion path)
    double l_mem = 1.0e-6;       // secondary-memory load latency
    double l_io = 80.0e-6;       // IO device latency (hidden by threads in the closed forms)
    std::uint32_t n_threads = 64;      // user-level threads per core
    std::uint32_t prefetch_depth = 10; // per-core prefetch queue depth
    double m_accesses = 10.0;    // mean memory accesses per IO
    double s_ios = 1.0;          // mean IOs per KV operation

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Device and system limits plus tiering knobs for the extended model.
// Bandwidths/rates default to unbounded (no cap).
struct SystemParams {
    double a_mem = 64.0;         // memory access (cacheline) size, bytes
    double b_mem = kUnbounded;   // max memory bandwidth, bytes/sec
    double a_io = 4096.0;        // IO access size, bytes
    double b_io = kUnbounded;    // max SSD bandwidth, bytes/sec
    double r_io = kUnbounded;    // max SSD random access rate, ops/sec
    double rho = 1.0;            // offloading ratio to secondary memory, [0,1]
    double epsilon = 0.0;        // premature CPU-cache eviction probability, [0,1)
    double l_dram = 0.1e-6;      // DRAM latency, seconds

    void validate() const;
};

// Inputs of the cost-performance ratio.
struct CprParams {
    double c = 0.4;  // replaced-DRAM cost share of total server cost, (0,1)
    double b = 0.5;  // secondary-memory bit cost relative to DRAM, (0,1]
    double d = 0.0;  // throughput degradation from using secondary memory, [0,1)

    void validate() const;
};

}  // namespace kvlat
