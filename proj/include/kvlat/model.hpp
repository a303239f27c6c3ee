#pragma once

#include <cstdint>
#include <string>

#include "kvlat/params.hpp"

namespace kvlat::model {

// Closed-form throughput variants. The first three are memory-only; the rest
// model one IO per M memory accesses (per-IO form).
enum class Variant {
    Single,
    Multi,
    MemPrefetchLimited,
    MaskOnly,
    BestCase,
    Probabilistic,
    Extended,
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);  // accepts short aliases
bool variant_is_memory_only(Variant v);

// Default truncation tolerance for the k-summation of the expected wait time.
constexpr double kDefaultTailTol = 1e-12;
// Hard cap on the truncation index; exceeding it raises std::runtime_error.
constexpr int kTruncationCap = 10000;

// --- memory-only reciprocals (seconds per operation) ---
double reciprocal_single(const OperationModelParams& p);
double reciprocal_multi(const OperationModelParams& p);
double reciprocal_mem_prefetch_limited(const OperationModelParams& p);

// Largest memory latency with zero degradation, memory-only: P*(t_mem+t_sw).
double hidable_latency_mem_only(const OperationModelParams& p);

// --- memory-and-IO ---
// Per-IO CPU overhead E = t_io_pre + t_io_post + 2*t_sw.
double io_overhead(const OperationModelParams& p);
double reciprocal_mask_only(const OperationModelParams& p);
double reciprocal_best_case(const OperationModelParams& p);
// Largest memory latency with zero degradation under the best-case form:
// P*(t_mem+t_sw) + P*E/M.
double hidable_latency_with_io(const OperationModelParams& p);

// Prefetch wait time of a window with j pre-IO and k post-IO suboperations.
double wait_time(int j, int k, const OperationModelParams& p);

// Weight of a window with j pre-IO and k post-IO suboperations among its
// P + k suboperations. Computed in log space; real-valued M is accepted.
double sequence_probability(int j, int k, const OperationModelParams& p);

// Expected prefetch wait per suboperation (ratio of expectations, k-summation
// truncated once the captured window mass reaches 1 - tail_tol). Throws
// std::runtime_error if that takes more than k_cap rows.
double expected_wait_per_subop(const OperationModelParams& p,
                               double tail_tol = kDefaultTailTol,
                               int k_cap = kTruncationCap);

// Probabilistic reciprocal: M*(t_mem+t_sw) + E + (M+2)*W_subop.
double reciprocal_probabilistic(const OperationModelParams& p,
                                double tail_tol = kDefaultTailTol);

// Effective memory latency seen by a window with j pre-IO suboperations when
// tiering and the memory bandwidth limit are in play.
double effective_memory_latency(int j, const OperationModelParams& p,
                                const SystemParams& s);

// Extended reciprocal: probabilistic form recomputed with the effective
// memory latency and the four-category suboperation split (premature
// eviction), capped by SSD bandwidth and IOPS.
double reciprocal_extended(const OperationModelParams& p, const SystemParams& s,
                           double tail_tol = kDefaultTailTol);

// Evaluate any variant at the given params (system limits are only consulted
// by Extended). Throws on non-positive results.
double reciprocal(Variant v, const OperationModelParams& p,
                  const SystemParams& s = {}, double tail_tol = kDefaultTailTol);

// Per-KV-operation reciprocal for operations with s_ios IOs on average:
// s_ios * reciprocal(variant at the per-IO m_accesses). Identity for s_ios=1.
double reciprocal_multi_io(Variant v, const OperationModelParams& p,
                           const SystemParams& s = {},
                           double tail_tol = kDefaultTailTol);

// 1 - Theta(l_eval)/Theta(l_baseline) for the chosen variant.
double normalized_degradation(Variant v, OperationModelParams p,
                              const SystemParams& s, double l_baseline,
                              double l_eval, double tail_tol = kDefaultTailTol);

// Cost-performance ratio (1-d)/(c*b + (1-c)).
double cpr(const CprParams& c);

// A model evaluation bundled with its throughput and the normalization
// against the same variant at a baseline latency.
struct ThroughputPrediction {
    Variant variant = Variant::Probabilistic;
    double reciprocal = 0.0;  // seconds per operation
    double throughput = 0.0;  // operations per second
    double normalized = 1.0;  // throughput / throughput(baseline latency)
};

ThroughputPrediction predict(Variant v, const OperationModelParams& p,
                             const SystemParams& s, double baseline_latency,
                             double tail_tol = kDefaultTailTol);

}  // namespace kvlat::model
