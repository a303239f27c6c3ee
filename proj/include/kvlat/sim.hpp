#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvlat/params.hpp"
#include "kvlat/workload.hpp"

namespace kvlat::sim {

enum class Phasing { Aligned, Staggered };

struct LatencyPoint {
    double latency = 0.0;      // seconds
    double probability = 1.0;
};

// Full specification of one simulator run. All randomness derives from seed.
struct SimConfig {
    OperationModelParams params;
    SystemParams system;  // unbounded by default
    workload::Distribution m_distribution = workload::Distribution::fixed(10);
    Phasing phasing = Phasing::Staggered;
    std::uint64_t stagger_seed = 0;  // 0: derived from seed
    std::vector<LatencyPoint> io_latency_mixture;  // empty: point mass at params.l_io
    std::uint64_t warmup_ops = 0;    // 0: 10 * n_threads
    std::uint64_t measure_ops = 2000;
    std::uint64_t seed = 1;
    // Trace mode: per-operation hop and IO counts drawn from a profile instead
    // of m_distribution / s_ios.
    std::optional<workload::WorkloadProfile> profile;
    bool include_io = true;

    void validate() const;
};

struct LoadLatencyHistogram {
    double bucket_width = 0.1e-6;  // seconds
    std::vector<std::uint64_t> counts;
    std::uint64_t overflow = 0;
    std::uint64_t total = 0;

    // Mass of the bucket containing the given latency.
    double mass_in_bucket_of(double latency) const;
    double mass_at_or_above(double latency) const;

    bool operator==(const LoadLatencyHistogram&) const = default;
};

struct SubopCounts {
    std::uint64_t memory = 0;
    std::uint64_t pre_io = 0;
    std::uint64_t post_io = 0;
    std::uint64_t evicted_reload = 0;

    bool operator==(const SubopCounts&) const = default;
};

struct ThreadAccounting {
    double busy = 0.0;    // executing suboperations and context switches
    double stall = 0.0;   // core idle on a late or evicted line
    double queued = 0.0;  // waiting in the ready FIFO

    bool operator==(const ThreadAccounting&) const = default;
};

struct SimResult {
    std::uint64_t ops_completed = 0;
    double sim_time = 0.0;    // measured window, seconds
    double throughput = 0.0;  // ops_completed / sim_time
    double stall_time_total = 0.0;
    double busy_time_total = 0.0;
    double mean_op_latency = 0.0;  // mean start-to-completion of measured ops
    LoadLatencyHistogram load_latency_histogram;
    SubopCounts subop_counts;
    std::vector<ThreadAccounting> thread_accounting;
    std::uint64_t io_polls = 0;
    std::uint32_t max_inflight_prefetches = 0;
    std::uint32_t n_threads = 0;

    bool operator==(const SimResult&) const = default;
};

// Simulates one CPU core running n_threads cooperative threads over
// latency-injected memory and an asynchronous IO device until measure_ops
// operations complete after warmup.
SimResult run_simulation(const SimConfig& cfg);

// Same machine with the IO segment removed.
SimResult run_memory_only(const SimConfig& cfg);

struct ThreadSweepResult {
    std::uint32_t best_n = 0;
    SimResult best;
    std::vector<SimResult> all;
};

// Runs the simulation per candidate thread count and returns the
// argmax-throughput result; ties break toward smaller N.
ThreadSweepResult sweep_thread_count(const SimConfig& cfg,
                                     const std::vector<std::uint32_t>& n_candidates);

}  // namespace kvlat::sim
