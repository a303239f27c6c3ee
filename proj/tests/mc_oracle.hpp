#pragma once

// Test-only Monte-Carlo oracle for the expected prefetch wait time. Draws an
// iid suboperation stream (memory M/(M+2), pre-IO 1/(M+2), post-IO 1/(M+2)),
// slides a window over each run of P slot-consuming suboperations (memory or
// pre-IO) counting the insertions in all P+1 surrounding gaps, applies the
// wait-time formula per window, and returns total wait / total window length.
// Independent of the truncated-summation implementation it checks.

#include <cstdint>
#include <deque>

#include "kvlat/model.hpp"
#include "kvlat/rng.hpp"

namespace kvlat_test {

struct McWaitEstimate {
    double value = 0.0;
    double std_error = 0.0;  // conservative: corrected for window overlap
};

inline McWaitEstimate mc_expected_wait_per_subop(const kvlat::OperationModelParams& p,
                                                 std::uint64_t n_subops,
                                                 std::uint64_t seed) {
    const int depth = static_cast<int>(p.prefetch_depth);
    const double m = p.m_accesses;
    const double p_mem = m / (m + 2.0);
    const double p_pre = 1.0 / (m + 2.0);

    const double slot_time = p.t_mem + p.t_sw;
    const double pre_delta = p.t_io_pre - p.t_mem;
    const double post_cost = p.t_io_post + p.t_sw;
    auto wait = [&](int j, std::int64_t k) {
        const double w = p.l_mem - depth * slot_time - j * pre_delta -
                         static_cast<double>(k) * post_cost;
        return w > 0.0 ? w : 0.0;
    };

    struct Slot {
        bool is_pre;
        std::int64_t inserts_after;
    };

    kvlat::Rng rng(seed);
    std::deque<Slot> slots;  // last depth+1 slot-consuming subops
    std::int64_t pending_inserts = 0;
    std::int64_t run_j = 0;  // pre-IO count over slots[1..depth]
    std::int64_t run_k = 0;  // inserts over all depth+1 gaps

    double total_wait = 0.0;
    double total_wait_sq = 0.0;
    std::int64_t total_len = 0;
    std::int64_t n_windows = 0;

    for (std::uint64_t i = 0; i < n_subops; ++i) {
        const double u = rng.next_double();
        if (u >= p_mem + p_pre) {
            ++pending_inserts;
            continue;
        }
        const bool is_pre = u >= p_mem;
        if (!slots.empty()) {
            slots.back().inserts_after = pending_inserts;
            run_k += pending_inserts;
        }
        pending_inserts = 0;
        if (slots.size() == static_cast<std::size_t>(depth) + 1) {
            // Window = slots[1..depth] plus inserts in the gaps bounded by
            // slots[0] and the slot arriving now.
            const int j_window =
                static_cast<int>(run_j) - (slots.front().is_pre ? 1 : 0);
            const double w = wait(j_window, run_k);
            total_wait += w;
            total_wait_sq += w * w;
            total_len += depth + run_k;
            ++n_windows;
            const Slot old = slots.front();
            slots.pop_front();
            run_k -= old.inserts_after;
            if (old.is_pre) --run_j;
        }
        if (is_pre) ++run_j;
        slots.push_back({is_pre, 0});
    }

    McWaitEstimate est;
    if (n_windows == 0 || total_len == 0) return est;
    const double nw = static_cast<double>(n_windows);
    est.value = total_wait / static_cast<double>(total_len);
    const double mean_w = total_wait / nw;
    const double var_w = std::max(0.0, total_wait_sq / nw - mean_w * mean_w);
    const double mean_len = static_cast<double>(total_len) / nw;
    // Adjacent windows share depth-1 slots, so treat only every depth-th
    // window as independent when bounding the error of the ratio.
    const double n_eff = std::max(1.0, nw / static_cast<double>(depth));
    est.std_error = std::sqrt(var_w / n_eff) / mean_len;
    return est;
}

}  // namespace kvlat_test
