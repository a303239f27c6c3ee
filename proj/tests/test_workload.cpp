#include <doctest.h>

#include <stdexcept>

#include "kvlat/rng.hpp"
#include "kvlat/workload.hpp"

using namespace kvlat;
using namespace kvlat::workload;

TEST_CASE("distribution means and sampling") {
    Rng rng(5);

    CHECK(Distribution::fixed(10).mean() == 10.0);
    CHECK(Distribution::fixed(10).sample(rng) == 10);

    const auto uni = Distribution::uniform_range(2, 6);
    CHECK(uni.mean() == 4.0);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto v = uni.sample(rng);
        CHECK(v >= 2);
        CHECK(v <= 6);
        sum += v;
    }
    CHECK(sum / 20000.0 == doctest::Approx(4.0).epsilon(0.02));

    const auto geo = Distribution::geometric(12.0);
    CHECK(geo.mean() == 12.0);
    sum = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const auto v = geo.sample(rng);
        CHECK(v >= 1);
        sum += v;
    }
    CHECK(sum / 200000.0 == doctest::Approx(12.0).epsilon(0.02));

    CHECK_THROWS_AS(Distribution::geometric(0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(Distribution::uniform_range(5, 2).validate(), std::invalid_argument);
}

TEST_CASE("io count models") {
    Rng rng(9);
    CHECK(IoCountModel::fixed_ios(2.0).mean() == 2.0);
    CHECK(IoCountModel::fixed_ios(2.0).sample(rng) == 2);

    const auto hit = IoCountModel::hit_ratio(0.67);
    CHECK(hit.mean() == doctest::Approx(0.33).epsilon(1e-12));
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += hit.sample(rng);
    CHECK(sum / 100000.0 == doctest::Approx(0.33).epsilon(0.03));

    const auto two = IoCountModel::two_tier(0.34, 0.73);
    CHECK(two.mean() == doctest::Approx(0.66).epsilon(1e-12));

    const auto frac = IoCountModel::fixed_ios(0.33);
    sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += frac.sample(rng);
    CHECK(sum / 100000.0 == doctest::Approx(0.33).epsilon(0.03));
}

TEST_CASE("presets") {
    const auto micro = preset("uniform-micro", 10);
    CHECK(micro.hops_per_op.kind == Distribution::Kind::Fixed);
    CHECK(micro.hops_per_op.mean() == 10.0);
    CHECK(micro.io_count_model.mean() == 1.0);

    CHECK(preset("block-cache").io_count_model.mean() == doctest::Approx(0.33).epsilon(1e-12));
    CHECK(preset("tree-index").io_count_model.mean() == 1.0);
    CHECK(preset("two-tier-cache").io_count_model.mean() ==
          doctest::Approx(0.66).epsilon(1e-12));

    CHECK_THROWS_AS(preset("no-such-preset"), std::invalid_argument);
}

TEST_CASE("aggregation to the per-IO model form") {
    OperationModelParams base;

    WorkloadProfile p;
    p.hops_per_op = Distribution::fixed(10);
    p.io_count_model = IoCountModel::fixed_ios(1.0);
    auto agg = aggregate_to_model(p, base);
    CHECK(agg.m_accesses == 10.0);
    CHECK(agg.s_ios == 1.0);

    p.io_count_model = IoCountModel::hit_ratio(0.67);
    agg = aggregate_to_model(p, base);
    CHECK(agg.s_ios == doctest::Approx(0.33).epsilon(1e-12));
    CHECK(agg.m_accesses == doctest::Approx(10.0 / 0.33).epsilon(1e-9));

    p.hops_per_op = Distribution::geometric(12.0);
    p.io_count_model = IoCountModel::fixed_ios(2.0);
    agg = aggregate_to_model(p, base);
    CHECK(agg.m_accesses == 6.0);
    CHECK(agg.s_ios == 2.0);

    // aggregation preserves total expected work
    CHECK(agg.m_accesses * agg.s_ios == doctest::Approx(p.hops_per_op.mean()).epsilon(1e-12));

    p.io_count_model = IoCountModel::hit_ratio(1.0);
    CHECK_THROWS_AS(aggregate_to_model(p, base), std::invalid_argument);
}
