#include "kvlat/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kvlat {

void OperationModelParams::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0) || std::isinf(v))
            throw std::invalid_argument(std::string(name) + " must be a finite value >= 0");
    };
    nonneg(t_mem, "t_mem");
    nonneg(t_sw, "t_sw");
    nonneg(t_io_pre, "t_io_pre");
    nonneg(t_io_post, "t_io_post");
    nonneg(l_mem, "l_mem");
    nonneg(l_io, "l_io");
    if (n_threads < 1) throw std::invalid_argument("n_threads must be >= 1");
    if (prefetch_depth < 1) throw std::invalid_argument("prefetch_depth must be >= 1");
    if (!(m_accesses > 0.0)) throw std::invalid_argument("m_accesses must be > 0");
    if (!(s_ios > 0.0)) throw std::invalid_argument("s_ios must be > 0");
}

void SystemParams::validate() const {
    if (!(a_mem > 0.0)) throw std::invalid_argument("a_mem must be > 0");
    if (!(a_io > 0.0)) throw std::invalid_argument("a_io must be > 0");
    if (!(b_mem > 0.0)) throw std::invalid_argument("b_mem must be > 0");
    if (!(b_io > 0.0)) throw std::invalid_argument("b_io must be > 0");
    if (!(r_io > 0.0)) throw std::invalid_argument("r_io must be > 0");
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0,1]");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in [0,1)");
    if (!(l_dram >= 0.0)) throw std::invalid_argument("l_dram must be >= 0");
}

void CprParams::validate() const {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must be in (0,1)");
    if (!(b > 0.0)) throw std::invalid_argument("b must be > 0");
    if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("d must be in [0,1)");
    if (!(c * b + (1.0 - c) > 0.0)) throw std::invalid_argument("cpr denominator must be positive");
}

}  // namespace kvlat

namespace kvlat::model {

namespace {

double checked_reciprocal(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("non-positive reciprocal");
    return r;
}

// Expected prefetch wait per suboperation over windows of P slot-consuming
// suboperations (memory or pre-IO) plus inserted ones (post-IO and, when
// eviction is modeled, post-eviction reloads). Window weights follow the
// multinomial form; both sums are truncated at the same row k once the
// captured window mass reaches (1 - tail_tol) of the analytic total.
double expected_wait_core(const OperationModelParams& p, double eps,
                          const std::vector<double>& l_eff_by_j, double tail_tol,
                          int k_cap = kTruncationCap) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0))
        throw std::invalid_argument("tail_tol must be in (0,1)");
    if (k_cap < 0) throw std::invalid_argument("k_cap must be >= 0");

    const int depth = static_cast<int>(p.prefetch_depth);
    const double m = p.m_accesses;
    const double slot_time = p.t_mem + p.t_sw;
    const double pre_delta = p.t_io_pre - p.t_mem;
    const double post_cost = p.t_io_post + p.t_sw;

    auto wait = [&](int j, int k_post, int k_ev) {
        const double l = l_eff_by_j[static_cast<std::size_t>(j)];
        const double w = l - depth * slot_time - j * pre_delta -
                         k_post * post_cost - k_ev * (l + p.t_sw);
        return std::max(0.0, w);
    };

    // Zero-wait shortcut: insertions never increase the wait, so the maximum
    // over j at k = 0 bounds every term.
    double max_wait = 0.0;
    for (int j = 0; j <= depth; ++j) max_wait = std::max(max_wait, wait(j, 0, 0));
    if (max_wait == 0.0) return 0.0;

    const double p_mem = (1.0 - eps) * m / (m + 2.0);
    const double p_pre = 1.0 / (m + 2.0);
    const double p_post = 1.0 / (m + 2.0);
    const double p_ev = eps * m / (m + 2.0);
    const double log_p_mem = std::log(p_mem);
    const double log_p_pre = std::log(p_pre);
    const double log_p_post = std::log(p_post);
    const double log_p_ev = p_ev > 0.0 ? std::log(p_ev) : 0.0;

    // Categories are exhaustive, so the total window mass is 1/p_slot.
    const double p_slot = p_mem + p_pre;
    const double total_mass = 1.0 / p_slot;

    std::vector<double> lgamma_cache(static_cast<std::size_t>(depth) + 2, 0.0);
    for (std::size_t i = 0; i < lgamma_cache.size(); ++i)
        lgamma_cache[i] = std::lgamma(static_cast<double>(i) + 1.0);
    auto log_fact = [&](int n) {
        return n < static_cast<int>(lgamma_cache.size())
                   ? lgamma_cache[static_cast<std::size_t>(n)]
                   : std::lgamma(static_cast<double>(n) + 1.0);
    };

    double num = 0.0;
    double den = 0.0;
    double cum = 0.0;
    for (int k = 0; k <= k_cap; ++k) {
        double row_mass = 0.0;
        const int k_ev_max = p_ev > 0.0 ? k : 0;
        for (int k_ev = 0; k_ev <= k_ev_max; ++k_ev) {
            const int k_post = k - k_ev;
            for (int j = 0; j <= depth; ++j) {
                const double lw = log_fact(depth + k) - log_fact(depth - j) -
                                  log_fact(j) - log_fact(k_post) - log_fact(k_ev) +
                                  (depth - j) * log_p_mem + j * log_p_pre +
                                  k_post * log_p_post + k_ev * log_p_ev;
                const double prob = std::exp(lw);
                row_mass += prob;
                num += prob * wait(j, k_post, k_ev);
                den += prob * (depth + k);
            }
        }
        cum += row_mass;
        if (cum >= (1.0 - tail_tol) * total_mass) return num / den;
        if (row_mass == 0.0) break;  // underflow: no further mass can accumulate
    }
    throw std::runtime_error("expected wait truncation did not converge within cap");
}

std::vector<double> constant_latency_by_j(const OperationModelParams& p) {
    return std::vector<double>(static_cast<std::size_t>(p.prefetch_depth) + 1, p.l_mem);
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Single: return "single";
        case Variant::Multi: return "multi";
        case Variant::MemPrefetchLimited: return "mem_prefetch_limited";
        case Variant::MaskOnly: return "mask_only";
        case Variant::BestCase: return "best_case";
        case Variant::Probabilistic: return "probabilistic";
        case Variant::Extended: return "extended";
    }
    throw std::logic_error("unknown variant");
}

Variant variant_from_string(const std::string& name) {
    if (name == "single") return Variant::Single;
    if (name == "multi") return Variant::Multi;
    if (name == "mem_prefetch_limited" || name == "prefetch_limited" || name == "mem")
        return Variant::MemPrefetchLimited;
    if (name == "mask_only" || name == "mask") return Variant::MaskOnly;
    if (name == "best_case" || name == "best") return Variant::BestCase;
    if (name == "probabilistic" || name == "prob") return Variant::Probabilistic;
    if (name == "extended" || name == "ext") return Variant::Extended;
    throw std::invalid_argument("unknown model variant: " + name);
}

bool variant_is_memory_only(Variant v) {
    return v == Variant::Single || v == Variant::Multi || v == Variant::MemPrefetchLimited;
}

double reciprocal_single(const OperationModelParams& p) {
    p.validate();
    return checked_reciprocal(p.t_mem + p.l_mem);
}

double reciprocal_multi(const OperationModelParams& p) {
    p.validate();
    const double little = (p.t_mem + p.l_mem) / static_cast<double>(p.n_threads);
    return checked_reciprocal(std::max(p.t_mem + p.t_sw, little));
}

double reciprocal_mem_prefetch_limited(const OperationModelParams& p) {
    p.validate();
    const double little = (p.t_mem + p.l_mem) / static_cast<double>(p.n_threads);
    const double prefetch = p.l_mem / static_cast<double>(p.prefetch_depth);
    return checked_reciprocal(std::max({p.t_mem + p.t_sw, little, prefetch}));
}

double hidable_latency_mem_only(const OperationModelParams& p) {
    p.validate();
    return static_cast<double>(p.prefetch_depth) * (p.t_mem + p.t_sw);
}

double io_overhead(const OperationModelParams& p) {
    p.validate();
    return p.t_io_pre + p.t_io_post + 2.0 * p.t_sw;
}

double reciprocal_mask_only(const OperationModelParams& p) {
    return checked_reciprocal(p.m_accesses * reciprocal_mem_prefetch_limited(p) +
                              io_overhead(p));
}

double reciprocal_best_case(const OperationModelParams& p) {
    p.validate();
    const double cpu = p.m_accesses * (p.t_mem + p.t_sw) + io_overhead(p);
    const double prefetch = p.m_accesses * p.l_mem / static_cast<double>(p.prefetch_depth);
    return checked_reciprocal(std::max(cpu, prefetch));
}

double hidable_latency_with_io(const OperationModelParams& p) {
    p.validate();
    const double depth = static_cast<double>(p.prefetch_depth);
    return depth * (p.t_mem + p.t_sw) + depth * io_overhead(p) / p.m_accesses;
}

double wait_time(int j, int k, const OperationModelParams& p) {
    p.validate();
    if (j < 0 || j > static_cast<int>(p.prefetch_depth))
        throw std::invalid_argument("j must be in [0, prefetch_depth]");
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    const double w = p.l_mem -
                     static_cast<double>(p.prefetch_depth) * (p.t_mem + p.t_sw) -
                     j * (p.t_io_pre - p.t_mem) - k * (p.t_io_post + p.t_sw);
    return std::max(0.0, w);
}

double sequence_probability(int j, int k, const OperationModelParams& p) {
    p.validate();
    if (j < 0 || j > static_cast<int>(p.prefetch_depth))
        throw std::invalid_argument("j must be in [0, prefetch_depth]");
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    const double depth = static_cast<double>(p.prefetch_depth);
    const double m = p.m_accesses;
    const double lw = std::lgamma(depth + k + 1.0) - std::lgamma(depth - j + 1.0) -
                      std::lgamma(j + 1.0) - std::lgamma(k + 1.0) +
                      (depth - j) * std::log(m / (m + 2.0)) +
                      (j + k) * std::log(1.0 / (m + 2.0));
    return std::exp(lw);
}

double expected_wait_per_subop(const OperationModelParams& p, double tail_tol,
                               int k_cap) {
    p.validate();
    return expected_wait_core(p, 0.0, constant_latency_by_j(p), tail_tol, k_cap);
}

double reciprocal_probabilistic(const OperationModelParams& p, double tail_tol) {
    const double w = expected_wait_per_subop(p, tail_tol);
    double r = p.m_accesses * (p.t_mem + p.t_sw) + io_overhead(p);
    r += (p.m_accesses + 2.0) * w;
    return checked_reciprocal(r);
}

double effective_memory_latency(int j, const OperationModelParams& p,
                                const SystemParams& s) {
    p.validate();
    s.validate();
    if (j < 0 || j > static_cast<int>(p.prefetch_depth))
        throw std::invalid_argument("j must be in [0, prefetch_depth]");
    const double tiered = s.rho * p.l_mem + (1.0 - s.rho) * s.l_dram;
    const double bandwidth =
        static_cast<double>(static_cast<int>(p.prefetch_depth) - j) * s.a_mem / s.b_mem;
    return std::max(tiered, bandwidth);
}

double reciprocal_extended(const OperationModelParams& p, const SystemParams& s,
                           double tail_tol) {
    p.validate();
    s.validate();
    std::vector<double> l_eff(static_cast<std::size_t>(p.prefetch_depth) + 1);
    for (int j = 0; j <= static_cast<int>(p.prefetch_depth); ++j)
        l_eff[static_cast<std::size_t>(j)] = effective_memory_latency(j, p, s);
    const double w = expected_wait_core(p, s.epsilon, l_eff, tail_tol);
    const double tiered = s.rho * p.l_mem + (1.0 - s.rho) * s.l_dram;
    double r = p.m_accesses * (p.t_mem + p.t_sw) + io_overhead(p);
    r += s.epsilon * p.m_accesses * (tiered - p.t_mem);
    r += (p.m_accesses + 2.0) * w;
    return checked_reciprocal(std::max({r, s.a_io / s.b_io, 1.0 / s.r_io}));
}

double reciprocal(Variant v, const OperationModelParams& p, const SystemParams& s,
                  double tail_tol) {
    switch (v) {
        case Variant::Single: return reciprocal_single(p);
        case Variant::Multi: return reciprocal_multi(p);
        case Variant::MemPrefetchLimited: return reciprocal_mem_prefetch_limited(p);
        case Variant::MaskOnly: return reciprocal_mask_only(p);
        case Variant::BestCase: return reciprocal_best_case(p);
        case Variant::Probabilistic: return reciprocal_probabilistic(p, tail_tol);
        case Variant::Extended: return reciprocal_extended(p, s, tail_tol);
    }
    throw std::logic_error("unknown variant");
}

double reciprocal_multi_io(Variant v, const OperationModelParams& p,
                           const SystemParams& s, double tail_tol) {
    p.validate();
    return p.s_ios * reciprocal(v, p, s, tail_tol);
}

double normalized_degradation(Variant v, OperationModelParams p, const SystemParams& s,
                              double l_baseline, double l_eval, double tail_tol) {
    if (!(l_baseline >= 0.0) || !(l_eval >= 0.0))
        throw std::invalid_argument("latencies must be >= 0");
    p.l_mem = l_eval;
    const double r_eval = reciprocal(v, p, s, tail_tol);
    p.l_mem = l_baseline;
    const double r_base = reciprocal(v, p, s, tail_tol);
    return 1.0 - r_base / r_eval;
}

double cpr(const CprParams& c) {
    c.validate();
    return (1.0 - c.d) / (c.c * c.b + (1.0 - c.c));
}

ThroughputPrediction predict(Variant v, const OperationModelParams& p,
                             const SystemParams& s, double baseline_latency,
                             double tail_tol) {
    ThroughputPrediction out;
    out.variant = v;
    out.reciprocal = reciprocal(v, p, s, tail_tol);
    out.throughput = 1.0 / out.reciprocal;
    OperationModelParams base = p;
    base.l_mem = baseline_latency;
    out.normalized = reciprocal(v, base, s, tail_tol) / out.reciprocal;
    return out;
}

}  // namespace kvlat::model
