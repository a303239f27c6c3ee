#include "kvlat/workload.hpp"

#include <cmath>
#include <stdexcept>

namespace kvlat::workload {

Distribution Distribution::fixed(std::uint32_t v) {
    Distribution d;
    d.kind = Kind::Fixed;
    d.value = static_cast<double>(v);
    return d;
}

Distribution Distribution::uniform_range(std::uint32_t lo, std::uint32_t hi) {
    Distribution d;
    d.kind = Kind::UniformRange;
    d.lo = lo;
    d.hi = hi;
    return d;
}

Distribution Distribution::geometric(double mean) {
    Distribution d;
    d.kind = Kind::Geometric;
    d.value = mean;
    return d;
}

double Distribution::mean() const {
    switch (kind) {
        case Kind::Fixed: return value;
        case Kind::UniformRange: return 0.5 * (static_cast<double>(lo) + static_cast<double>(hi));
        case Kind::Geometric: return value;
    }
    throw std::logic_error("unknown distribution kind");
}

std::uint32_t Distribution::sample(Rng& rng) const {
    switch (kind) {
        case Kind::Fixed:
            return static_cast<std::uint32_t>(value);
        case Kind::UniformRange:
            return lo + static_cast<std::uint32_t>(rng.next_below(hi - lo + 1));
        case Kind::Geometric: {
            // Support {1,2,...} with success probability 1/mean.
            const double p = 1.0 / value;
            if (p >= 1.0) return 1;
            const double u = 1.0 - rng.next_double();  // in (0,1]
            const double draw = 1.0 + std::floor(std::log(u) / std::log1p(-p));
            return static_cast<std::uint32_t>(std::max(1.0, draw));
        }
    }
    throw std::logic_error("unknown distribution kind");
}

void Distribution::validate() const {
    switch (kind) {
        case Kind::Fixed:
            if (value < 0.0 || value != std::floor(value))
                throw std::invalid_argument("fixed count must be a non-negative integer");
            return;
        case Kind::UniformRange:
            if (lo > hi) throw std::invalid_argument("uniform range requires lo <= hi");
            return;
        case Kind::Geometric:
            if (!(value >= 1.0)) throw std::invalid_argument("geometric mean must be >= 1");
            return;
    }
    throw std::logic_error("unknown distribution kind");
}

IoCountModel IoCountModel::fixed_ios(double s) {
    IoCountModel m;
    m.kind = Kind::FixedIOs;
    m.s = s;
    return m;
}

IoCountModel IoCountModel::hit_ratio(double h) {
    IoCountModel m;
    m.kind = Kind::HitRatio;
    m.h1 = h;
    return m;
}

IoCountModel IoCountModel::two_tier(double h1, double h2, std::uint32_t miss_ios) {
    IoCountModel m;
    m.kind = Kind::TwoTier;
    m.h1 = h1;
    m.h2 = h2;
    m.miss_ios = miss_ios;
    return m;
}

double IoCountModel::mean() const {
    switch (kind) {
        case Kind::FixedIOs: return s;
        case Kind::HitRatio: return 1.0 - h1;
        case Kind::TwoTier:
            return (1.0 - h1) * (h2 + (1.0 - h2) * static_cast<double>(miss_ios));
    }
    throw std::logic_error("unknown io count kind");
}

std::uint32_t IoCountModel::sample(Rng& rng) const {
    switch (kind) {
        case Kind::FixedIOs: {
            const double whole = std::floor(s);
            const double frac = s - whole;
            std::uint32_t n = static_cast<std::uint32_t>(whole);
            if (frac > 0.0 && rng.bernoulli(frac)) ++n;
            return n;
        }
        case Kind::HitRatio:
            return rng.bernoulli(h1) ? 0u : 1u;
        case Kind::TwoTier:
            if (rng.bernoulli(h1)) return 0u;
            return rng.bernoulli(h2) ? 1u : miss_ios;
    }
    throw std::logic_error("unknown io count kind");
}

void IoCountModel::validate() const {
    switch (kind) {
        case Kind::FixedIOs:
            if (!(s >= 0.0)) throw std::invalid_argument("fixed io count must be >= 0");
            return;
        case Kind::HitRatio:
            if (!(h1 >= 0.0 && h1 <= 1.0))
                throw std::invalid_argument("hit ratio must be in [0,1]");
            return;
        case Kind::TwoTier:
            if (!(h1 >= 0.0 && h1 <= 1.0) || !(h2 >= 0.0 && h2 <= 1.0))
                throw std::invalid_argument("tier hit ratios must be in [0,1]");
            return;
    }
    throw std::logic_error("unknown io count kind");
}

void WorkloadProfile::validate() const {
    hops_per_op.validate();
    io_count_model.validate();
    if (!(read_fraction >= 0.0 && read_fraction <= 1.0))
        throw std::invalid_argument("read_fraction must be in [0,1]");
}

WorkloadProfile preset(const std::string& name, std::uint32_t hops_m) {
    WorkloadProfile p;
    p.name = name;
    if (name == "tree-index") {
        // Tree traversal of fixed depth, one value fetch per operation.
        p.hops_per_op = Distribution::fixed(hops_m);
        p.io_count_model = IoCountModel::fixed_ios(1.0);
        return p;
    }
    if (name == "block-cache") {
        // Key scan inside a cached block; an IO only on a block-cache miss.
        p.hops_per_op = Distribution::fixed(hops_m);
        p.io_count_model = IoCountModel::hit_ratio(0.67);
        return p;
    }
    if (name == "two-tier-cache") {
        // Linked-item traversal with a DRAM tier-1 and an SSD tier-2 cache.
        p.hops_per_op = Distribution::fixed(hops_m);
        p.io_count_model = IoCountModel::two_tier(0.34, 0.73);
        return p;
    }
    if (name == "uniform-micro") {
        // The microbenchmark shape: fixed pointer-chase length, one IO.
        p.hops_per_op = Distribution::fixed(hops_m);
        p.io_count_model = IoCountModel::fixed_ios(1.0);
        return p;
    }
    throw std::invalid_argument("unknown workload preset: " + name);
}

OperationModelParams aggregate_to_model(const WorkloadProfile& profile,
                                        const OperationModelParams& base) {
    profile.validate();
    const double mean_ios = profile.io_count_model.mean();
    if (!(mean_ios > 0.0))
        throw std::invalid_argument("profile mean IO count must be > 0 for the per-IO model");
    OperationModelParams out = base;
    out.m_accesses = profile.hops_per_op.mean() / mean_ios;
    out.s_ios = mean_ios;
    return out;
}

}  // namespace kvlat::workload
