#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kvlat/model.hpp"
#include "kvlat/params.hpp"
#include "kvlat/sim.hpp"
#include "kvlat/workload.hpp"

namespace kvlat::sweep {

enum class OutputFormat { Csv, Json };

// Full specification of one sweep/compare run: baseline parameters plus the
// grid axes, the model variants to evaluate, and simulator settings.
struct SweepSpec {
    OperationModelParams params;
    SystemParams system;
    // Axis name -> values, expanded as a cartesian product in order (last axis
    // varies fastest). Duration axes are named *_us and given in microseconds.
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    std::vector<model::Variant> variants{model::Variant::MaskOnly,
                                         model::Variant::Probabilistic};

    bool include_sim = false;
    std::vector<std::uint32_t> thread_grid;
    std::optional<workload::Distribution> m_distribution;  // default: Fixed(m_accesses)
    sim::Phasing phasing = sim::Phasing::Staggered;
    std::vector<sim::LatencyPoint> io_latency_mixture;
    std::optional<workload::WorkloadProfile> profile;
    std::uint64_t warmup_ops = 0;
    std::uint64_t measure_ops = 2000;
    std::uint64_t seed = 1;

    double baseline_latency = 0.1e-6;  // seconds
    double tail_tol = model::kDefaultTailTol;
    double compare_band = 0.10;
    std::size_t max_points = 100000;

    void validate() const;
};

struct GridPoint {
    std::size_t index = 0;
    OperationModelParams params;
    SystemParams system;
};

// Applies one axis value to a parameter set; throws std::invalid_argument
// naming the offending axis token.
void apply_axis(const std::string& name, double value, OperationModelParams& p,
                SystemParams& s);

std::vector<GridPoint> expand_grid(const SweepSpec& spec);

using Cell = std::variant<double, std::uint64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

// One row per grid point per variant: inputs, reciprocal, throughput, and the
// throughput normalized to the run's baseline latency.
Table run_model_sweep(const SweepSpec& spec);

// One row per grid point: best-N simulated throughput and diagnostics.
Table run_sim_sweep(const SweepSpec& spec);

// Model and simulator rows side by side.
Table run_joint_sweep(const SweepSpec& spec);

struct CompareSummary {
    model::Variant variant;
    double min_error = 0.0;
    double max_error = 0.0;
    double mean_abs_error = 0.0;
};

struct CompareOutcome {
    Table table;
    std::vector<CompareSummary> summaries;
    bool band_violated = false;  // probabilistic variant left the band
};

// Relative model-vs-simulator error per grid point and variant.
CompareOutcome run_compare(const SweepSpec& spec);

Table run_cpr(const std::vector<CprParams>& rows);

// Shortest round-trip decimal formatting; deterministic across runs.
std::string format_number(double v);

void write_table(std::ostream& out, const Table& table, OutputFormat format);

}  // namespace kvlat::sweep
