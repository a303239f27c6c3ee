#pragma once

#include <cstdint>
#include <string>

#include "kvlat/params.hpp"
#include "kvlat/rng.hpp"

namespace kvlat::workload {

// Per-operation count distribution shared by the simulator (hop counts) and
// the workload profiles.
struct Distribution {
    enum class Kind { Fixed, UniformRange, Geometric };

    Kind kind = Kind::Fixed;
    double value = 10.0;  // Fixed: the count; Geometric: the mean
    std::uint32_t lo = 1;
    std::uint32_t hi = 1;

    static Distribution fixed(std::uint32_t v);
    static Distribution uniform_range(std::uint32_t lo, std::uint32_t hi);
    static Distribution geometric(double mean);  // support {1,2,...}

    double mean() const;
    std::uint32_t sample(Rng& rng) const;
    void validate() const;
};

// Number of IOs issued by one operation.
struct IoCountModel {
    enum class Kind { FixedIOs, HitRatio, TwoTier };

    Kind kind = Kind::FixedIOs;
    double s = 1.0;       // FixedIOs mean (fractional allowed)
    double h1 = 0.0;      // HitRatio: hit probability; TwoTier: tier-1 hit
    double h2 = 0.0;      // TwoTier: tier-2 hit given tier-1 miss
    std::uint32_t miss_ios = 1;  // TwoTier: IOs on the full-miss path

    static IoCountModel fixed_ios(double s);
    static IoCountModel hit_ratio(double h);
    static IoCountModel two_tier(double h1, double h2, std::uint32_t miss_ios = 1);

    double mean() const;
    std::uint32_t sample(Rng& rng) const;
    void validate() const;
};

struct WorkloadProfile {
    std::string name;
    Distribution hops_per_op = Distribution::fixed(10);
    IoCountModel io_count_model = IoCountModel::fixed_ios(1.0);
    double read_fraction = 1.0;  // metadata only; reads and writes behave alike

    void validate() const;
};

// Documented presets: tree-index, block-cache, two-tier-cache, uniform-micro.
// hops_m overrides the in-memory traversal length (tree depth / scan length);
// hop counts are configuration, not measurements.
WorkloadProfile preset(const std::string& name, std::uint32_t hops_m = 10);

// Folds a profile into the per-IO model form: m_accesses = mean hops / mean
// IOs and s_ios = mean IOs per operation. Throws if the mean IO count is zero.
OperationModelParams aggregate_to_model(const WorkloadProfile& profile,
                                        const OperationModelParams& base);

}  // namespace kvlat::workload
