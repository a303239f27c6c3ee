// kvlat: evaluate closed-form throughput models for SSD-backed KV operations on
// microsecond-latency memory, run the discrete-event simulator of the same
// mechanism, sweep parameter grids, and compare model against simulator.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kvlat/config.hpp"
#include "kvlat/model.hpp"
#include "kvlat/sweep.hpp"

namespace {

using kvlat::sweep::OutputFormat;
using kvlat::sweep::SweepSpec;

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::vector<std::string> axis_specs;
    std::vector<std::string> variant_names;
    std::optional<std::uint64_t> seed;
    std::optional<double> baseline_latency_us;
    std::optional<double> tail_tol;
    std::optional<double> band;
    std::optional<double> t_mem_us, t_sw_us, t_io_pre_us, t_io_post_us;
    std::optional<double> l_mem_us, l_io_us, l_dram_us;
    std::optional<double> m, s, rho, epsilon;
    std::optional<std::uint32_t> n, p;
    std::optional<double> a_mem, b_mem, a_io, b_io, r_io;
    std::vector<std::uint32_t> thread_grid;
    std::optional<std::string> phasing;
    std::optional<std::string> m_dist;
    std::optional<std::string> workload_name;
    std::optional<std::uint32_t> workload_hops;
    std::optional<std::uint64_t> warmup_ops, measure_ops;
};

void add_common_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON run document");
    cmd->add_option("--out", o.out_path, "Output path (default: stdout)");
    cmd->add_option("--format", o.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--axis", o.axis_specs,
                    "Sweep axis as name=v1,v2,... (repeatable; overrides config axes)");
    cmd->add_option("--variants", o.variant_names,
                    "Comma-separated model variants")
        ->delimiter(',');
    cmd->add_option("--seed", o.seed, "Simulation seed");
    cmd->add_option("--baseline-latency", o.baseline_latency_us,
                    "Normalization baseline memory latency, microseconds");
    cmd->add_option("--tail-tol", o.tail_tol, "Wait-time summation tail tolerance");
    cmd->add_option("--band", o.band, "Compare error band (fraction)");
    cmd->add_option("--t-mem-us", o.t_mem_us, "Memory suboperation time, us");
    cmd->add_option("--t-sw-us", o.t_sw_us, "Context switch time, us");
    cmd->add_option("--t-io-pre-us", o.t_io_pre_us, "Pre-IO suboperation time, us");
    cmd->add_option("--t-io-post-us", o.t_io_post_us, "Post-IO suboperation time, us");
    cmd->add_option("--l-mem-us", o.l_mem_us, "Secondary memory latency, us");
    cmd->add_option("--l-io-us", o.l_io_us, "IO device latency, us");
    cmd->add_option("--l-dram-us", o.l_dram_us, "DRAM latency, us");
    cmd->add_option("--m", o.m, "Mean memory accesses per IO");
    cmd->add_option("--s", o.s, "Mean IOs per operation");
    cmd->add_option("--n", o.n, "Threads per core");
    cmd->add_option("--p", o.p, "Prefetch queue depth");
    cmd->add_option("--rho", o.rho, "Offloading ratio to secondary memory");
    cmd->add_option("--epsilon", o.epsilon, "Premature cache eviction probability");
    cmd->add_option("--a-mem", o.a_mem, "Memory access size, bytes");
    cmd->add_option("--b-mem", o.b_mem, "Memory bandwidth cap, bytes/s");
    cmd->add_option("--a-io", o.a_io, "IO access size, bytes");
    cmd->add_option("--b-io", o.b_io, "SSD bandwidth cap, bytes/s");
    cmd->add_option("--r-io", o.r_io, "SSD random access cap, ops/s");
    cmd->add_option("--thread-grid", o.thread_grid, "Thread counts for best-N search")
        ->delimiter(',');
    cmd->add_option("--phasing", o.phasing, "Thread phasing: aligned or staggered")
        ->check(CLI::IsMember({"aligned", "staggered"}));
    cmd->add_option("--m-dist", o.m_dist,
                    "Hop distribution: fixed, geometric, or uniform:LO:HI");
    cmd->add_option("--workload", o.workload_name,
                    "Workload preset: tree-index, block-cache, two-tier-cache, uniform-micro");
    cmd->add_option("--workload-hops", o.workload_hops, "Preset hop count override");
    cmd->add_option("--warmup-ops", o.warmup_ops, "Operations discarded before measuring");
    cmd->add_option("--measure-ops", o.measure_ops, "Operations measured per run");
}

std::pair<std::string, std::vector<double>> parse_axis_spec(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("axis spec must look like name=v1,v2,...: " + spec);
    std::pair<std::string, std::vector<double>> axis;
    axis.first = spec.substr(0, eq);
    std::stringstream ss(spec.substr(eq + 1));
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) axis.second.push_back(std::stod(tok));
    if (axis.second.empty())
        throw std::invalid_argument("axis spec has no values: " + spec);
    return axis;
}

kvlat::workload::Distribution parse_m_dist(const std::string& text, double mean) {
    if (text == "fixed")
        return kvlat::workload::Distribution::fixed(
            static_cast<std::uint32_t>(std::llround(mean)));
    if (text == "geometric") return kvlat::workload::Distribution::geometric(mean);
    if (text.rfind("uniform:", 0) == 0) {
        const auto rest = text.substr(8);
        const auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("uniform distribution needs uniform:LO:HI");
        return kvlat::workload::Distribution::uniform_range(
            static_cast<std::uint32_t>(std::stoul(rest.substr(0, colon))),
            static_cast<std::uint32_t>(std::stoul(rest.substr(colon + 1))));
    }
    throw std::invalid_argument("unknown hop distribution: " + text);
}

SweepSpec build_spec(const CommonOpts& o) {
    SweepSpec spec;
    if (!o.config_path.empty()) spec = kvlat::config::load_spec_file(o.config_path);

    if (!o.axis_specs.empty()) {
        spec.axes.clear();
        for (const auto& a : o.axis_specs) spec.axes.push_back(parse_axis_spec(a));
    }
    if (!o.variant_names.empty()) {
        spec.variants.clear();
        for (const auto& v : o.variant_names)
            spec.variants.push_back(kvlat::model::variant_from_string(v));
    }
    if (o.seed) spec.seed = *o.seed;
    if (o.baseline_latency_us) spec.baseline_latency = *o.baseline_latency_us * 1e-6;
    if (o.tail_tol) spec.tail_tol = *o.tail_tol;
    if (o.band) spec.compare_band = *o.band;
    if (o.t_mem_us) spec.params.t_mem = *o.t_mem_us * 1e-6;
    if (o.t_sw_us) spec.params.t_sw = *o.t_sw_us * 1e-6;
    if (o.t_io_pre_us) spec.params.t_io_pre = *o.t_io_pre_us * 1e-6;
    if (o.t_io_post_us) spec.params.t_io_post = *o.t_io_post_us * 1e-6;
    if (o.l_mem_us) spec.params.l_mem = *o.l_mem_us * 1e-6;
    if (o.l_io_us) spec.params.l_io = *o.l_io_us * 1e-6;
    if (o.l_dram_us) spec.system.l_dram = *o.l_dram_us * 1e-6;
    if (o.m) spec.params.m_accesses = *o.m;
    if (o.s) spec.params.s_ios = *o.s;
    if (o.n) spec.params.n_threads = *o.n;
    if (o.p) spec.params.prefetch_depth = *o.p;
    if (o.rho) spec.system.rho = *o.rho;
    if (o.epsilon) spec.system.epsilon = *o.epsilon;
    if (o.a_mem) spec.system.a_mem = *o.a_mem;
    if (o.b_mem) spec.system.b_mem = *o.b_mem;
    if (o.a_io) spec.system.a_io = *o.a_io;
    if (o.b_io) spec.system.b_io = *o.b_io;
    if (o.r_io) spec.system.r_io = *o.r_io;
    if (!o.thread_grid.empty()) spec.thread_grid = o.thread_grid;
    if (o.phasing)
        spec.phasing = (*o.phasing == "aligned") ? kvlat::sim::Phasing::Aligned
                                                 : kvlat::sim::Phasing::Staggered;
    if (o.m_dist) spec.m_distribution = parse_m_dist(*o.m_dist, spec.params.m_accesses);
    if (o.workload_name) {
        auto profile = kvlat::workload::preset(*o.workload_name,
                                               o.workload_hops.value_or(10));
        spec.profile = profile;
        // The analytic side consumes the aggregated per-IO form.
        spec.params = kvlat::workload::aggregate_to_model(profile, spec.params);
    }
    if (o.warmup_ops) spec.warmup_ops = *o.warmup_ops;
    if (o.measure_ops) spec.measure_ops = *o.measure_ops;
    return spec;
}

void ensure_thread_grid(SweepSpec& spec) {
    if (spec.thread_grid.empty())
        spec.thread_grid = {4, 8, 16, 32, 64, 128, 256};
}

OutputFormat parse_format(const std::string& f) {
    return f == "json" ? OutputFormat::Json : OutputFormat::Csv;
}

int write_out(const kvlat::sweep::Table& table, const CommonOpts& o) {
    if (o.out_path.empty()) {
        kvlat::sweep::write_table(std::cout, table, parse_format(o.format));
        return 0;
    }
    std::ofstream out(o.out_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot open output path " << o.out_path << "\n";
        return 1;
    }
    kvlat::sweep::write_table(out, table, parse_format(o.format));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Throughput models and event simulation for SSD-based KV stores "
                 "on microsecond-latency memory"};
    app.require_subcommand(1);

    CommonOpts model_opts, sim_opts, sweep_opts, compare_opts, cpr_opts;
    auto* cmd_model = app.add_subcommand("model", "Evaluate closed-form models on a grid");
    add_common_options(cmd_model, model_opts);
    auto* cmd_sim = app.add_subcommand("sim", "Run best-N simulations on a grid");
    add_common_options(cmd_sim, sim_opts);
    auto* cmd_sweep = app.add_subcommand("sweep", "Models and simulation side by side");
    add_common_options(cmd_sweep, sweep_opts);
    auto* cmd_compare =
        app.add_subcommand("compare", "Relative model-vs-simulation error per point");
    add_common_options(cmd_compare, compare_opts);

    auto* cmd_cpr = app.add_subcommand("cpr", "Cost-performance ratio");
    double cpr_c = 0.4, cpr_b = 0.5, cpr_d = 0.0;
    cmd_cpr->add_option("--config", cpr_opts.config_path, "JSON document with cpr rows");
    cmd_cpr->add_option("--out", cpr_opts.out_path, "Output path (default: stdout)");
    cmd_cpr->add_option("--format", cpr_opts.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd_cpr->add_option("--c", cpr_c, "Replaced-DRAM share of server cost");
    cmd_cpr->add_option("--b", cpr_b, "Relative bit cost of secondary memory");
    cmd_cpr->add_option("--d", cpr_d, "Throughput degradation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (cmd_model->parsed()) {
            return write_out(kvlat::sweep::run_model_sweep(build_spec(model_opts)),
                             model_opts);
        }
        if (cmd_sim->parsed()) {
            SweepSpec spec = build_spec(sim_opts);
            spec.include_sim = true;
            ensure_thread_grid(spec);
            return write_out(kvlat::sweep::run_sim_sweep(spec), sim_opts);
        }
        if (cmd_sweep->parsed()) {
            SweepSpec spec = build_spec(sweep_opts);
            spec.include_sim = true;
            ensure_thread_grid(spec);
            return write_out(kvlat::sweep::run_joint_sweep(spec), sweep_opts);
        }
        if (cmd_compare->parsed()) {
            SweepSpec spec = build_spec(compare_opts);
            spec.include_sim = true;
            ensure_thread_grid(spec);
            const auto outcome = kvlat::sweep::run_compare(spec);
            const int rc = write_out(outcome.table, compare_opts);
            if (rc != 0) return rc;
            for (const auto& s : outcome.summaries) {
                std::cerr << kvlat::model::to_string(s.variant)
                          << ": min_error=" << kvlat::sweep::format_number(s.min_error)
                          << " max_error=" << kvlat::sweep::format_number(s.max_error)
                          << " mean_abs_error="
                          << kvlat::sweep::format_number(s.mean_abs_error) << "\n";
            }
            if (outcome.band_violated) {
                std::cerr << "error band violated: probabilistic model outside "
                          << kvlat::sweep::format_number(spec.compare_band * 100.0)
                          << "% of simulated throughput\n";
                return 2;
            }
            return 0;
        }
        if (cmd_cpr->parsed()) {
            std::vector<kvlat::CprParams> rows;
            if (!cpr_opts.config_path.empty()) {
                rows = kvlat::config::load_cpr_rows_file(cpr_opts.config_path);
            } else {
                rows.push_back({cpr_c, cpr_b, cpr_d});
            }
            return write_out(kvlat::sweep::run_cpr(rows), cpr_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
