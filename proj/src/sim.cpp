#include "kvlat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>

#include "kvlat/rng.hpp"

namespace kvlat::sim {

namespace {

constexpr double kPsPerSec = 1e12;

std::int64_t to_ps(double seconds) {
    return static_cast<std::int64_t>(std::llround(seconds * kPsPerSec));
}

double to_sec(std::int64_t ps) { return static_cast<double>(ps) / kPsPerSec; }

// Min-heap over delivery timestamps of in-flight prefetches; a slot is
// occupied from the prefetch start for the full memory latency.
class SlotHeap {
public:
    std::size_t size() const { return heap_.size(); }
    std::int64_t min() const { return heap_.front(); }

    void push(std::int64_t v) {
        heap_.push_back(v);
        std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }

    std::int64_t pop_min() {
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
        const std::int64_t v = heap_.back();
        heap_.pop_back();
        return v;
    }

private:
    std::vector<std::int64_t> heap_;
};

struct OpPlan {
    std::uint32_t hops = 0;
    std::uint32_t ios = 0;
};

enum class Phase : std::uint8_t { OpStart, MemLoad, PreIo, IoWait };

struct ThreadState {
    std::uint32_t hops_left = 0;     // hops remaining in the current segment
    std::uint32_t op_hops_left = 0;  // hops not yet assigned to a segment
    std::uint32_t segs_left = 0;     // segments remaining, including current
    bool seg_has_io = false;
    Phase phase = Phase::MemLoad;

    // The prefetched line for this thread's next load.
    bool line_valid = false;
    bool line_evicted = false;
    std::int64_t line_ready = 0;

    std::int64_t io_done = 0;
    std::int64_t op_start = 0;
    std::int64_t enqueued_at = 0;

    Rng plan_rng{1};
    bool next_plan_valid = false;
    OpPlan next_plan;

    // Measured-window accounting, picoseconds.
    std::int64_t busy = 0;
    std::int64_t stall = 0;
    std::int64_t queued = 0;
};

class Engine {
public:
    explicit Engine(const SimConfig& cfg)
        : cfg_(cfg), engine_rng_(derive_seed(cfg.seed, 0)) {
        n_ = cfg.params.n_threads;
        depth_ = cfg.params.prefetch_depth;
        t_mem_ = to_ps(cfg.params.t_mem);
        t_sw_ = to_ps(cfg.params.t_sw);
        t_pre_ = to_ps(cfg.params.t_io_pre);
        t_post_ = to_ps(cfg.params.t_io_post);
        l_sec_ = to_ps(cfg.params.l_mem);
        l_dram_ = to_ps(cfg.system.l_dram);
        rho_ = cfg.system.rho;
        eps_ = cfg.system.epsilon;
        mem_spacing_ =
            std::isinf(cfg.system.b_mem) ? 0 : to_ps(cfg.system.a_mem / cfg.system.b_mem);
        io_spacing_ = 0;
        if (!std::isinf(cfg.system.b_io))
            io_spacing_ = std::max(io_spacing_, to_ps(cfg.system.a_io / cfg.system.b_io));
        if (!std::isinf(cfg.system.r_io))
            io_spacing_ = std::max(io_spacing_, to_ps(1.0 / cfg.system.r_io));

        if (cfg.io_latency_mixture.empty()) {
            io_mixture_.push_back({to_ps(cfg.params.l_io), 1.0});
        } else {
            double cum = 0.0;
            for (const auto& pt : cfg.io_latency_mixture) {
                cum += pt.probability;
                io_mixture_.push_back({to_ps(pt.latency), cum});
            }
        }

        threads_.resize(n_);
        for (std::uint32_t i = 0; i < n_; ++i)
            threads_[i].plan_rng = Rng(derive_seed(cfg.seed, 1 + i));

        warmup_target_ =
            cfg.warmup_ops != 0 ? cfg.warmup_ops : 10ull * static_cast<std::uint64_t>(n_);
        stop_target_ = warmup_target_ + cfg.measure_ops;

        const double max_lat = std::max(cfg.params.l_mem, cfg.system.l_dram);
        const auto buckets = static_cast<std::size_t>(
            std::ceil(2.0 * static_cast<double>(to_ps(max_lat)) /
                      static_cast<double>(hist_bucket_ps_)));
        hist_counts_.assign(std::max<std::size_t>(buckets + 1, 1), 0);
    }

    SimResult run() {
        seed_ready_queue();
        for (std::uint32_t i = 0; i < n_; ++i) start_next_op(threads_[i], 0);

        while (!stopped_) {
            while (!pending_.empty() && pending_.front().ready_at <= now_) {
                ready_.push_back(pending_.front());
                pending_.pop_front();
            }
            if (ready_.empty()) {
                now_ = pending_.front().ready_at;  // start-of-run gap only
                continue;
            }
            const ReadyEntry entry = ready_.front();
            ready_.pop_front();
            run_turn(entry.tid, std::max(now_, entry.ready_at));
        }
        return finalize();
    }

private:
    struct MixPoint {
        std::int64_t latency;
        double cum;
    };

    struct ReadyEntry {
        std::uint32_t tid;
        std::int64_t ready_at;
    };

    // --- scheduling ---

    void seed_ready_queue() {
        std::vector<std::pair<std::int64_t, std::uint32_t>> starts(n_);
        if (cfg_.phasing == Phasing::Staggered) {
            const std::uint64_t sseed =
                cfg_.stagger_seed != 0 ? cfg_.stagger_seed : derive_seed(cfg_.seed, 0x57a6);
            Rng srng(sseed);
            // One mean operation length of wall time: with a closed set of N
            // threads the mean operation latency is N times its CPU time, and
            // delays of that scale spread thread phases across the whole
            // operation (a sub-round span would leave every thread in the same
            // lattice position of the round-robin schedule).
            const std::int64_t span = to_ps(n_ * mean_op_cpu_time());
            for (std::uint32_t i = 0; i < n_; ++i) {
                const std::int64_t d =
                    span > 0 ? static_cast<std::int64_t>(
                                   srng.next_below(static_cast<std::uint64_t>(span)))
                             : 0;
                starts[i] = {d, i};
            }
            std::sort(starts.begin(), starts.end());
        } else {
            for (std::uint32_t i = 0; i < n_; ++i) starts[i] = {0, i};
        }
        for (const auto& [delay, tid] : starts) {
            threads_[tid].enqueued_at = delay;
            pending_.push_back({tid, delay});
        }
    }

    void reenqueue(std::uint32_t tid, std::int64_t at) {
        threads_[tid].enqueued_at = at;
        ready_.push_back({tid, at});
    }

    // Mean per-operation CPU time; used only to size thread start offsets.
    double mean_op_cpu_time() const {
        const double hops = cfg_.profile ? cfg_.profile->hops_per_op.mean()
                                         : cfg_.m_distribution.mean();
        double ios = 0.0;
        if (cfg_.include_io)
            ios = cfg_.profile ? cfg_.profile->io_count_model.mean() : cfg_.params.s_ios;
        const double e =
            cfg_.params.t_io_pre + cfg_.params.t_io_post + 2.0 * cfg_.params.t_sw;
        return hops * (cfg_.params.t_mem + cfg_.params.t_sw) + ios * e;
    }

    // --- randomness and device channels ---

    std::int64_t draw_mem_latency() {
        if (rho_ >= 1.0) return l_sec_;
        if (rho_ <= 0.0) return l_dram_;
        return engine_rng_.bernoulli(rho_) ? l_sec_ : l_dram_;
    }

    std::int64_t draw_io_latency() {
        if (io_mixture_.size() == 1) return io_mixture_.front().latency;
        const double u = engine_rng_.next_double();
        for (const auto& pt : io_mixture_)
            if (u < pt.cum) return pt.latency;
        return io_mixture_.back().latency;
    }

    std::int64_t memory_channel_deliver(std::int64_t start) {
        std::int64_t d = start + draw_mem_latency();
        if (mem_spacing_ > 0) {
            d = std::max(d, last_mem_completion_ + mem_spacing_);
            last_mem_completion_ = d;
        }
        return d;
    }

    std::int64_t io_channel_complete(std::int64_t submit) {
        std::int64_t d = submit + draw_io_latency();
        if (io_spacing_ > 0) {
            d = std::max(d, last_io_completion_ + io_spacing_);
            last_io_completion_ = d;
        }
        return d;
    }

    // Issue a software prefetch at time t. When the queue is full the start is
    // deferred until a slot frees (earliest delivery first); the slot is held
    // from the start for the full memory latency.
    void issue_prefetch(std::uint32_t tid, std::int64_t t) {
        ThreadState& th = threads_[tid];
        while (slots_.size() > 0 && slots_.min() <= t) slots_.pop_min();
        std::int64_t start = t;
        if (slots_.size() >= depth_) start = slots_.pop_min();
        const std::int64_t delivery = memory_channel_deliver(start);
        slots_.push(delivery);
        max_inflight_ =
            std::max(max_inflight_, static_cast<std::uint32_t>(slots_.size()));
        th.line_valid = true;
        th.line_ready = delivery;
        th.line_evicted = eps_ > 0.0 && engine_rng_.bernoulli(eps_);
    }

    // --- operation plans ---

    OpPlan draw_plan(ThreadState& th) {
        OpPlan plan;
        if (cfg_.profile) {
            plan.hops = cfg_.profile->hops_per_op.sample(th.plan_rng);
            plan.ios = cfg_.include_io ? cfg_.profile->io_count_model.sample(th.plan_rng) : 0;
        } else {
            plan.hops = cfg_.m_distribution.sample(th.plan_rng);
            if (cfg_.include_io) {
                const double whole = std::floor(cfg_.params.s_ios);
                const double frac = cfg_.params.s_ios - whole;
                plan.ios = static_cast<std::uint32_t>(whole);
                if (frac > 0.0 && th.plan_rng.bernoulli(frac)) ++plan.ios;
            }
        }
        return plan;
    }

    const OpPlan& peek_next_plan(ThreadState& th) {
        if (!th.next_plan_valid) {
            th.next_plan = draw_plan(th);
            th.next_plan_valid = true;
        }
        return th.next_plan;
    }

    void start_next_op(ThreadState& th, std::int64_t at) {
        peek_next_plan(th);
        const OpPlan plan = th.next_plan;
        th.next_plan_valid = false;
        th.op_start = at;
        th.op_hops_left = plan.hops;
        if (plan.ios == 0) {
            th.segs_left = 1;
            th.seg_has_io = false;
        } else {
            th.segs_left = plan.ios;
            th.seg_has_io = true;
        }
        enter_segment(th);
        // In IO mode each operation works on a fresh key, so its first hop can
        // only be prefetched once the operation starts. Memory-only mode is one
        // continuous pointer chase and keeps the cross-operation chain.
        if (cfg_.include_io && th.phase == Phase::MemLoad) th.phase = Phase::OpStart;
    }

    void enter_segment(ThreadState& th) {
        if (th.seg_has_io) {
            // Spread the operation's hops over its segments, front-loaded.
            th.hops_left = (th.op_hops_left + th.segs_left - 1) / th.segs_left;
        } else {
            th.hops_left = th.op_hops_left;
        }
        th.op_hops_left -= th.hops_left;
        th.phase = th.hops_left > 0 ? Phase::MemLoad : Phase::PreIo;
    }

    // True in memory-only mode when the chain continues after the current hop,
    // looking ahead at most one operation.
    bool chain_continues(ThreadState& th) {
        if (th.hops_left > 0 || th.op_hops_left > 0) return true;
        if (cfg_.include_io) return false;  // next operation prefetches its own start
        return peek_next_plan(th).hops > 0;
    }

    // --- measurement ---

    void record_load(std::int64_t observed) {
        ++result_.subop_counts.memory;
        ++hist_total_;
        const auto bucket = static_cast<std::size_t>(observed / hist_bucket_ps_);
        if (bucket < hist_counts_.size())
            ++hist_counts_[bucket];
        else
            ++hist_overflow_;
    }

    void complete_op(ThreadState& th, std::int64_t at) {
        ++completed_;
        if (measuring_) {
            ++measured_ops_;
            op_latency_sum_ += at - th.op_start;
        }
        if (completed_ == warmup_target_) {
            measuring_ = true;
            window_start_ = at;
        } else if (completed_ == stop_target_) {
            stopped_ = true;
            window_end_ = at;
        }
        start_next_op(th, at);
    }

    // One scheduled turn of one thread: a single suboperation then a yield.
    void run_turn(std::uint32_t tid, std::int64_t t) {
        ThreadState& th = threads_[tid];
        const bool counted = measuring_;
        if (counted) th.queued += t - std::max(th.enqueued_at, window_start_);

        std::int64_t busy = 0;
        std::int64_t stall = 0;
        bool op_done = false;

        switch (th.phase) {
            case Phase::OpStart: {
                // Pick the operation's key and prefetch its first hop.
                issue_prefetch(tid, t);
                t += t_sw_;
                busy += t_sw_;
                th.phase = Phase::MemLoad;
                break;
            }
            case Phase::MemLoad: {
                // Wait for the prefetched line; a missing or evicted line is
                // fetched on demand at full latency.
                std::int64_t observed;
                if (!th.line_valid) {
                    observed = memory_channel_deliver(t) - t;
                } else if (th.line_evicted && th.line_ready <= t) {
                    observed = memory_channel_deliver(t) - t;
                    if (counted) ++result_.subop_counts.evicted_reload;
                } else {
                    observed = std::max<std::int64_t>(0, th.line_ready - t);
                }
                if (counted) record_load(observed);
                stall += observed;
                t += observed;
                th.line_valid = false;

                t += t_mem_;
                busy += t_mem_;
                --th.hops_left;

                if (chain_continues(th)) issue_prefetch(tid, t);

                t += t_sw_;
                busy += t_sw_;

                if (th.hops_left == 0) {
                    if (th.seg_has_io)
                        th.phase = Phase::PreIo;
                    else
                        op_done = true;  // memory-only operation ends on its last hop
                }
                break;
            }
            case Phase::PreIo: {
                t += t_pre_;
                busy += t_pre_;
                th.io_done = io_channel_complete(t);
                if (counted) ++result_.subop_counts.pre_io;
                t += t_sw_;
                busy += t_sw_;
                th.phase = Phase::IoWait;
                break;
            }
            case Phase::IoWait: {
                if (th.io_done > t) {
                    // Poll and yield; the core never blocks on an IO.
                    if (counted) ++result_.io_polls;
                    if (t_sw_ == 0 && !another_thread_can_progress(tid, t))
                        t = th.io_done;  // zero-cost switches would spin forever
                    t += t_sw_;
                    busy += t_sw_;
                    break;
                }
                t += t_post_;
                busy += t_post_;
                if (counted) ++result_.subop_counts.post_io;
                --th.segs_left;
                if (th.segs_left == 0) {
                    op_done = true;
                } else {
                    // The IO result names the next segment's first address.
                    enter_segment(th);
                    if (th.phase == Phase::MemLoad) issue_prefetch(tid, t);
                }
                t += t_sw_;
                busy += t_sw_;
                break;
            }
        }

        if (counted) {
            th.busy += busy;
            th.stall += stall;
        }
        if (op_done) complete_op(th, t);
        reenqueue(tid, t);
        now_ = t;
    }

    bool another_thread_can_progress(std::uint32_t self, std::int64_t t) const {
        for (const auto& entry : ready_) {
            if (entry.tid == self) continue;
            const ThreadState& other = threads_[entry.tid];
            if (other.phase != Phase::IoWait || other.io_done <= t) return true;
        }
        return false;
    }

    SimResult finalize() {
        // Every other thread sits in the ready FIFO when the final measured
        // operation completes; credit their queue time up to the window end.
        for (std::uint32_t i = 0; i < n_; ++i) {
            ThreadState& th = threads_[i];
            if (th.enqueued_at < window_end_)
                th.queued += window_end_ - std::max(th.enqueued_at, window_start_);
        }

        const std::int64_t window = window_end_ - window_start_;
        if (window <= 0)
            throw std::runtime_error(
                "zero-duration measurement window; increase measure_ops or use "
                "non-zero suboperation times");

        result_.ops_completed = measured_ops_;
        result_.sim_time = to_sec(window);
        result_.throughput = static_cast<double>(measured_ops_) / result_.sim_time;
        result_.mean_op_latency =
            to_sec(op_latency_sum_) / static_cast<double>(measured_ops_);
        result_.n_threads = n_;
        result_.max_inflight_prefetches = max_inflight_;

        result_.thread_accounting.resize(n_);
        for (std::uint32_t i = 0; i < n_; ++i) {
            auto& acct = result_.thread_accounting[i];
            acct.busy = to_sec(threads_[i].busy);
            acct.stall = to_sec(threads_[i].stall);
            acct.queued = to_sec(threads_[i].queued);
            result_.busy_time_total += acct.busy;
            result_.stall_time_total += acct.stall;
        }

        result_.load_latency_histogram.bucket_width = to_sec(hist_bucket_ps_);
        result_.load_latency_histogram.counts = std::move(hist_counts_);
        result_.load_latency_histogram.overflow = hist_overflow_;
        result_.load_latency_histogram.total = hist_total_;
        return result_;
    }

    SimConfig cfg_;
    Rng engine_rng_;

    std::uint32_t n_ = 0;
    std::uint32_t depth_ = 1;
    std::int64_t t_mem_ = 0, t_sw_ = 0, t_pre_ = 0, t_post_ = 0;
    std::int64_t l_sec_ = 0, l_dram_ = 0;
    double rho_ = 1.0, eps_ = 0.0;
    std::int64_t mem_spacing_ = 0, io_spacing_ = 0;
    std::vector<MixPoint> io_mixture_;

    std::vector<ThreadState> threads_;
    std::deque<ReadyEntry> ready_;
    std::deque<ReadyEntry> pending_;  // staggered thread starts, sorted by time
    SlotHeap slots_;
    std::int64_t now_ = 0;
    std::int64_t last_mem_completion_ = 0;
    std::int64_t last_io_completion_ = 0;

    std::uint64_t warmup_target_ = 0, stop_target_ = 0;
    std::uint64_t completed_ = 0, measured_ops_ = 0;
    bool measuring_ = false, stopped_ = false;
    std::int64_t window_start_ = 0, window_end_ = 0;
    std::int64_t op_latency_sum_ = 0;
    std::uint32_t max_inflight_ = 0;

    std::int64_t hist_bucket_ps_ = to_ps(0.1e-6);
    std::vector<std::uint64_t> hist_counts_;
    std::uint64_t hist_overflow_ = 0;
    std::uint64_t hist_total_ = 0;

    SimResult result_;
};

}  // namespace

void SimConfig::validate() const {
    params.validate();
    system.validate();
    m_distribution.validate();
    if (profile) profile->validate();
    if (measure_ops < 1) throw std::invalid_argument("measure_ops must be >= 1");

    if (!io_latency_mixture.empty()) {
        double sum = 0.0;
        for (const auto& pt : io_latency_mixture) {
            if (!(pt.latency >= 0.0))
                throw std::invalid_argument("mixture latency must be >= 0");
            if (!(pt.probability >= 0.0))
                throw std::invalid_argument("mixture probability must be >= 0");
            sum += pt.probability;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("io latency mixture probabilities must sum to 1");
    }

    // Minimum per-operation hop and IO counts, to rule out empty operations.
    const auto min_hops = [](const workload::Distribution& d) -> std::uint32_t {
        switch (d.kind) {
            case workload::Distribution::Kind::Fixed:
                return static_cast<std::uint32_t>(d.value);
            case workload::Distribution::Kind::UniformRange: return d.lo;
            case workload::Distribution::Kind::Geometric: return 1;
        }
        return 0;
    };
    const auto min_ios = [this]() -> std::uint32_t {
        if (!include_io) return 0;
        if (profile) {
            const auto& io = profile->io_count_model;
            switch (io.kind) {
                case workload::IoCountModel::Kind::FixedIOs:
                    return static_cast<std::uint32_t>(std::floor(io.s));
                case workload::IoCountModel::Kind::HitRatio: return io.h1 > 0.0 ? 0 : 1;
                case workload::IoCountModel::Kind::TwoTier:
                    return io.h1 > 0.0 ? 0 : std::min<std::uint32_t>(1, io.miss_ios);
            }
            return 0;
        }
        return static_cast<std::uint32_t>(std::floor(params.s_ios));
    };
    const std::uint32_t hops_floor =
        profile ? min_hops(profile->hops_per_op) : min_hops(m_distribution);
    if (hops_floor == 0 && min_ios() == 0)
        throw std::invalid_argument(
            "operation shape may be empty: zero hops together with zero IOs");

    if (phasing == Phasing::Aligned) {
        const bool fixed_shape =
            profile ? (profile->hops_per_op.kind == workload::Distribution::Kind::Fixed &&
                       profile->io_count_model.kind ==
                           workload::IoCountModel::Kind::FixedIOs &&
                       profile->io_count_model.s == std::floor(profile->io_count_model.s))
                    : (m_distribution.kind == workload::Distribution::Kind::Fixed &&
                       params.s_ios == std::floor(params.s_ios));
        if (!fixed_shape)
            throw std::invalid_argument("aligned phasing requires a fixed per-operation shape");
    }
}

double LoadLatencyHistogram::mass_in_bucket_of(double latency) const {
    if (total == 0) return 0.0;
    const auto idx = static_cast<std::size_t>(latency / bucket_width);
    if (idx >= counts.size())
        return static_cast<double>(overflow) / static_cast<double>(total);
    return static_cast<double>(counts[idx]) / static_cast<double>(total);
}

double LoadLatencyHistogram::mass_at_or_above(double latency) const {
    if (total == 0) return 0.0;
    const auto idx = static_cast<std::size_t>(latency / bucket_width);
    std::uint64_t n = overflow;
    for (std::size_t i = idx; i < counts.size(); ++i) n += counts[i];
    return static_cast<double>(n) / static_cast<double>(total);
}

SimResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    Engine engine(cfg);
    return engine.run();
}

SimResult run_memory_only(const SimConfig& cfg) {
    SimConfig mem_only = cfg;
    mem_only.include_io = false;
    return run_simulation(mem_only);
}

ThreadSweepResult sweep_thread_count(const SimConfig& cfg,
                                     const std::vector<std::uint32_t>& n_candidates) {
    if (n_candidates.empty())
        throw std::invalid_argument("thread sweep requires at least one candidate");
    ThreadSweepResult out;
    for (const std::uint32_t n : n_candidates) {
        SimConfig point = cfg;
        point.params.n_threads = n;
        SimResult r = run_simulation(point);
        if (out.all.empty() || r.throughput > out.best.throughput) {
            out.best = r;
            out.best_n = n;
        }
        out.all.push_back(std::move(r));
    }
    return out;
}

}  // namespace kvlat::sim
