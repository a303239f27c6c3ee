#include "kvlat/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "kvlat/rng.hpp"

namespace kvlat::sweep {

namespace {

// Dispatches grid points to a worker pool; results land in index order, so
// output is deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const unsigned workers =
        std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                           static_cast<unsigned>(std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

const std::vector<std::string>& input_columns() {
    static const std::vector<std::string> cols = {
        "t_mem_s",   "t_sw_s",     "t_io_pre_s", "t_io_post_s", "l_mem_s",
        "l_io_s",    "n_threads",  "prefetch_depth", "m_accesses", "s_ios",
        "a_mem_bytes", "b_mem_bytes_per_s", "a_io_bytes", "b_io_bytes_per_s",
        "r_io_ops_per_s", "rho", "epsilon", "l_dram_s"};
    return cols;
}

void push_input_cells(std::vector<Cell>& row, const GridPoint& pt) {
    row.emplace_back(pt.params.t_mem);
    row.emplace_back(pt.params.t_sw);
    row.emplace_back(pt.params.t_io_pre);
    row.emplace_back(pt.params.t_io_post);
    row.emplace_back(pt.params.l_mem);
    row.emplace_back(pt.params.l_io);
    row.emplace_back(static_cast<std::uint64_t>(pt.params.n_threads));
    row.emplace_back(static_cast<std::uint64_t>(pt.params.prefetch_depth));
    row.emplace_back(pt.params.m_accesses);
    row.emplace_back(pt.params.s_ios);
    row.emplace_back(pt.system.a_mem);
    row.emplace_back(pt.system.b_mem);
    row.emplace_back(pt.system.a_io);
    row.emplace_back(pt.system.b_io);
    row.emplace_back(pt.system.r_io);
    row.emplace_back(pt.system.rho);
    row.emplace_back(pt.system.epsilon);
    row.emplace_back(pt.system.l_dram);
}

sim::SimConfig sim_config_for(const SweepSpec& spec, const GridPoint& pt) {
    sim::SimConfig cfg;
    cfg.params = pt.params;
    cfg.system = pt.system;
    cfg.m_distribution =
        spec.m_distribution
            ? *spec.m_distribution
            : workload::Distribution::fixed(static_cast<std::uint32_t>(
                  std::llround(pt.params.m_accesses)));
    if (spec.m_distribution &&
        spec.m_distribution->kind == workload::Distribution::Kind::Geometric)
        cfg.m_distribution.value = pt.params.m_accesses;  // mean follows the axis
    cfg.phasing = spec.phasing;
    cfg.io_latency_mixture = spec.io_latency_mixture;
    cfg.profile = spec.profile;
    cfg.warmup_ops = spec.warmup_ops;
    cfg.measure_ops = spec.measure_ops;
    cfg.seed = derive_seed(spec.seed, pt.index);
    return cfg;
}

double full_latency_fraction(const sim::SimResult& r, const GridPoint& pt) {
    return r.load_latency_histogram.mass_at_or_above(
        pt.system.rho > 0.0 ? pt.params.l_mem : pt.system.l_dram);
}

}  // namespace

void SweepSpec::validate() const {
    params.validate();
    system.validate();
    if (m_distribution) m_distribution->validate();
    if (profile) profile->validate();
    if (variants.empty()) throw std::invalid_argument("no model variants selected");
    if (!(baseline_latency >= 0.0))
        throw std::invalid_argument("baseline latency must be >= 0");
    std::size_t points = 1;
    for (const auto& [name, values] : axes) {
        if (values.empty())
            throw std::invalid_argument("sweep axis has no values: " + name);
        points *= values.size();
        if (points > max_points)
            throw std::invalid_argument("sweep grid exceeds the point cap");
        OperationModelParams p = params;
        SystemParams s = system;
        apply_axis(name, values.front(), p, s);  // throws on a bad token
    }
}

void apply_axis(const std::string& name, double value, OperationModelParams& p,
                SystemParams& s) {
    const double us = value * 1e-6;
    if (name == "t_mem_us") p.t_mem = us;
    else if (name == "t_sw_us") p.t_sw = us;
    else if (name == "t_io_pre_us") p.t_io_pre = us;
    else if (name == "t_io_post_us") p.t_io_post = us;
    else if (name == "l_mem_us") p.l_mem = us;
    else if (name == "l_io_us") p.l_io = us;
    else if (name == "l_dram_us") s.l_dram = us;
    else if (name == "m") p.m_accesses = value;
    else if (name == "s") p.s_ios = value;
    else if (name == "n") p.n_threads = static_cast<std::uint32_t>(value);
    else if (name == "p") p.prefetch_depth = static_cast<std::uint32_t>(value);
    else if (name == "rho") s.rho = value;
    else if (name == "epsilon") s.epsilon = value;
    else if (name == "a_mem") s.a_mem = value;
    else if (name == "b_mem") s.b_mem = value;
    else if (name == "a_io") s.a_io = value;
    else if (name == "b_io") s.b_io = value;
    else if (name == "r_io") s.r_io = value;
    else throw std::invalid_argument("unknown sweep axis: " + name);
}

std::vector<GridPoint> expand_grid(const SweepSpec& spec) {
    spec.validate();
    std::size_t total = 1;
    for (const auto& [name, values] : spec.axes) total *= values.size();

    std::vector<GridPoint> grid;
    grid.reserve(total);
    for (std::size_t i = 0; i < total; ++i) {
        GridPoint pt;
        pt.index = i;
        pt.params = spec.params;
        pt.system = spec.system;
        std::size_t rem = i;
        for (std::size_t a = spec.axes.size(); a-- > 0;) {
            const auto& [name, values] = spec.axes[a];
            apply_axis(name, values[rem % values.size()], pt.params, pt.system);
            rem /= values.size();
        }
        grid.push_back(pt);
    }
    return grid;
}

Table run_model_sweep(const SweepSpec& spec) {
    const auto grid = expand_grid(spec);
    Table table;
    table.columns.push_back("variant");
    for (const auto& c : input_columns()) table.columns.push_back(c);
    table.columns.insert(table.columns.end(),
                         {"reciprocal_s", "throughput_ops_per_s", "normalized"});

    table.rows.resize(grid.size() * spec.variants.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        const GridPoint& pt = grid[i];
        for (std::size_t v = 0; v < spec.variants.size(); ++v) {
            const model::Variant variant = spec.variants[v];
            const auto pred = model::predict(variant, pt.params, pt.system,
                                             spec.baseline_latency, spec.tail_tol);
            std::vector<Cell> row;
            row.reserve(table.columns.size());
            row.emplace_back(model::to_string(variant));
            push_input_cells(row, pt);
            row.emplace_back(pred.reciprocal);
            row.emplace_back(pred.throughput);
            row.emplace_back(pred.normalized);
            table.rows[i * spec.variants.size() + v] = std::move(row);
        }
    });
    return table;
}

namespace {

const std::vector<std::string>& sim_columns() {
    static const std::vector<std::string> cols = {
        "best_n",        "sim_throughput_ops_per_s", "sim_reciprocal_s",
        "stall_share",   "ops_completed",            "sim_time_s",
        "mean_op_latency_s", "full_latency_load_fraction", "io_polls"};
    return cols;
}

void push_sim_cells(std::vector<Cell>& row, const sim::ThreadSweepResult& sr,
                    const GridPoint& pt) {
    const sim::SimResult& r = sr.best;
    row.emplace_back(static_cast<std::uint64_t>(sr.best_n));
    row.emplace_back(r.throughput);
    row.emplace_back(1.0 / r.throughput);
    row.emplace_back(r.stall_time_total / (r.sim_time > 0 ? r.sim_time : 1.0));
    row.emplace_back(r.ops_completed);
    row.emplace_back(r.sim_time);
    row.emplace_back(r.mean_op_latency);
    row.emplace_back(full_latency_fraction(r, pt));
    row.emplace_back(r.io_polls);
}

std::vector<sim::ThreadSweepResult> simulate_grid(const SweepSpec& spec,
                                                  const std::vector<GridPoint>& grid) {
    if (spec.thread_grid.empty())
        throw std::invalid_argument("simulation requires a non-empty thread grid");
    std::vector<sim::ThreadSweepResult> results(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        results[i] = sim::sweep_thread_count(sim_config_for(spec, grid[i]),
                                             spec.thread_grid);
    });
    return results;
}

}  // namespace

Table run_sim_sweep(const SweepSpec& spec) {
    const auto grid = expand_grid(spec);
    const auto results = simulate_grid(spec, grid);

    Table table;
    table.columns = input_columns();
    for (const auto& c : sim_columns()) table.columns.push_back(c);
    table.rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<Cell> row;
        row.reserve(table.columns.size());
        push_input_cells(row, grid[i]);
        push_sim_cells(row, results[i], grid[i]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

Table run_joint_sweep(const SweepSpec& spec) {
    const auto grid = expand_grid(spec);
    const auto results = simulate_grid(spec, grid);

    Table table;
    table.columns = input_columns();
    for (const auto& c : sim_columns()) table.columns.push_back(c);
    for (const auto& v : spec.variants) {
        table.columns.push_back(model::to_string(v) + "_throughput_ops_per_s");
        table.columns.push_back(model::to_string(v) + "_normalized");
    }
    table.rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const GridPoint& pt = grid[i];
        std::vector<Cell> row;
        row.reserve(table.columns.size());
        push_input_cells(row, pt);
        push_sim_cells(row, results[i], pt);
        for (const auto v : spec.variants) {
            const auto pred = model::predict(v, pt.params, pt.system,
                                             spec.baseline_latency, spec.tail_tol);
            row.emplace_back(1.0 / model::reciprocal_multi_io(v, pt.params, pt.system,
                                                              spec.tail_tol));
            row.emplace_back(pred.normalized);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CompareOutcome run_compare(const SweepSpec& spec) {
    const auto grid = expand_grid(spec);
    const auto results = simulate_grid(spec, grid);

    CompareOutcome out;
    out.table.columns = {"variant"};
    for (const auto& c : input_columns()) out.table.columns.push_back(c);
    out.table.columns.insert(out.table.columns.end(),
                             {"best_n", "model_throughput_ops_per_s",
                              "sim_throughput_ops_per_s", "rel_error"});

    std::vector<CompareSummary> summaries(spec.variants.size());
    for (std::size_t v = 0; v < spec.variants.size(); ++v)
        summaries[v].variant = spec.variants[v];

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const GridPoint& pt = grid[i];
        const double sim_thr = results[i].best.throughput;
        for (std::size_t v = 0; v < spec.variants.size(); ++v) {
            const model::Variant variant = spec.variants[v];
            const double model_thr =
                1.0 / model::reciprocal_multi_io(variant, pt.params, pt.system,
                                                 spec.tail_tol);
            const double rel = (model_thr - sim_thr) / sim_thr;

            auto& s = summaries[v];
            if (i == 0) {
                s.min_error = s.max_error = rel;
            } else {
                s.min_error = std::min(s.min_error, rel);
                s.max_error = std::max(s.max_error, rel);
            }
            s.mean_abs_error += std::abs(rel);

            if (variant == model::Variant::Probabilistic &&
                std::abs(rel) > spec.compare_band)
                out.band_violated = true;

            std::vector<Cell> row;
            row.reserve(out.table.columns.size());
            row.emplace_back(model::to_string(variant));
            push_input_cells(row, pt);
            row.emplace_back(static_cast<std::uint64_t>(results[i].best_n));
            row.emplace_back(model_thr);
            row.emplace_back(sim_thr);
            row.emplace_back(rel);
            out.table.rows.push_back(std::move(row));
        }
    }
    if (!grid.empty())
        for (auto& s : summaries) s.mean_abs_error /= static_cast<double>(grid.size());
    out.summaries = std::move(summaries);
    return out;
}

Table run_cpr(const std::vector<CprParams>& rows) {
    Table table;
    table.columns = {"c", "b", "d", "cpr"};
    table.rows.reserve(rows.size());
    for (const auto& r : rows) {
        std::vector<Cell> row;
        row.emplace_back(r.c);
        row.emplace_back(r.b);
        row.emplace_back(r.d);
        row.emplace_back(model::cpr(r));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::string cell_to_string(const Cell& cell) {
    if (std::holds_alternative<double>(cell)) return format_number(std::get<double>(cell));
    if (std::holds_alternative<std::uint64_t>(cell))
        return std::to_string(std::get<std::uint64_t>(cell));
    return std::get<std::string>(cell);
}

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << cell_to_string(row[c]);
        }
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& table) {
    out << "[";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out << (r ? ",\n " : "\n ") << "{";
        const auto& row = table.rows[r];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ",";
            out << '"' << table.columns[c] << "\":";
            if (std::holds_alternative<std::string>(row[c]))
                out << '"' << std::get<std::string>(row[c]) << '"';
            else if (std::holds_alternative<double>(row[c]) &&
                     !std::isfinite(std::get<double>(row[c])))
                out << "null";
            else
                out << cell_to_string(row[c]);
        }
        out << "}";
    }
    out << "\n]\n";
}

}  // namespace

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
    if (format == OutputFormat::Csv)
        write_csv(out, table);
    else
        write_json(out, table);
}

}  // namespace kvlat::sweep
