#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kvlat/model.hpp"
#include "kvlat/rng.hpp"
#include "mc_oracle.hpp"

using namespace kvlat;
using namespace kvlat::model;

namespace {

constexpr double kUs = 1e-6;

// Table-1 style reference parameters used throughout.
OperationModelParams reference_params() {
    OperationModelParams p;
    p.t_mem = 0.1 * kUs;
    p.t_sw = 0.05 * kUs;
    p.t_io_pre = 4.0 * kUs;
    p.t_io_post = 3.0 * kUs;
    p.l_mem = 5.0 * kUs;
    p.n_threads = 1000000;  // enough threads that Little's bound never binds
    p.prefetch_depth = 10;
    p.m_accesses = 10.0;
    return p;
}

OperationModelParams random_params(Rng& rng) {
    OperationModelParams p;
    p.t_mem = (0.05 + 0.15 * rng.next_double()) * kUs;
    p.t_sw = (0.02 + 0.08 * rng.next_double()) * kUs;
    p.t_io_pre = (0.5 + 4.5 * rng.next_double()) * kUs;
    p.t_io_post = (0.1 + 2.9 * rng.next_double()) * kUs;
    p.l_mem = (0.5 + 11.5 * rng.next_double()) * kUs;
    p.n_threads = 1000000;
    p.prefetch_depth = 4 + static_cast<std::uint32_t>(rng.next_below(13));
    p.m_accesses = 1.0 + 14.0 * rng.next_double();
    return p;
}

}  // namespace

TEST_CASE("memory-only reciprocals") {
    OperationModelParams p;
    p.t_mem = 0.1 * kUs;
    p.l_mem = 0.1 * kUs;
    CHECK(reciprocal_single(p) == doctest::Approx(0.2 * kUs).epsilon(1e-12));
    p.l_mem = 5.0 * kUs;
    CHECK(reciprocal_single(p) == doctest::Approx(5.1 * kUs).epsilon(1e-12));

    p.t_mem = 0.0;
    p.l_mem = 0.0;
    CHECK_THROWS_WITH_AS(reciprocal_single(p), "non-positive reciprocal",
                         std::invalid_argument);

    p = reference_params();
    p.n_threads = 100;
    CHECK(reciprocal_multi(p) == doctest::Approx(0.15 * kUs).epsilon(1e-12));
    p.n_threads = 10;
    CHECK(reciprocal_multi(p) == doctest::Approx(0.51 * kUs).epsilon(1e-12));
    p.n_threads = 1;
    CHECK(reciprocal_multi(p) == doctest::Approx(5.1 * kUs).epsilon(1e-12));
    CHECK(reciprocal_multi(p) == doctest::Approx(reciprocal_single(p)).epsilon(1e-12));
}

TEST_CASE("prefetch-limited reciprocal and hidable latency") {
    OperationModelParams p = reference_params();
    p.l_mem = 1.5 * kUs;
    CHECK(reciprocal_mem_prefetch_limited(p) == doctest::Approx(0.15 * kUs).epsilon(1e-12));
    p.l_mem = 5.0 * kUs;
    CHECK(reciprocal_mem_prefetch_limited(p) == doctest::Approx(0.5 * kUs).epsilon(1e-12));
    p.l_mem = 0.0;
    CHECK(reciprocal_mem_prefetch_limited(p) == doctest::Approx(0.15 * kUs).epsilon(1e-12));

    CHECK(hidable_latency_mem_only(p) == doctest::Approx(1.5 * kUs).epsilon(1e-12));
    OperationModelParams q = p;
    q.prefetch_depth = 1;
    q.t_mem = 0.0;
    q.t_sw = 0.0;
    CHECK(hidable_latency_mem_only(q) == 0.0);
    q = p;
    q.prefetch_depth = 12;
    CHECK(hidable_latency_mem_only(q) == doctest::Approx(1.8 * kUs).epsilon(1e-12));
}

TEST_CASE("io overhead") {
    OperationModelParams p = reference_params();
    CHECK(io_overhead(p) == doctest::Approx(7.1 * kUs).epsilon(1e-12));
    p.t_io_pre = p.t_io_post = p.t_sw = 0.0;
    CHECK(io_overhead(p) == 0.0);
    p = reference_params();
    p.t_io_pre = 1.5 * kUs;
    p.t_io_post = 0.2 * kUs;
    CHECK(io_overhead(p) == doctest::Approx(1.8 * kUs).epsilon(1e-12));
}

TEST_CASE("mask-only and best-case reciprocals") {
    OperationModelParams p = reference_params();
    CHECK(reciprocal_mask_only(p) == doctest::Approx(12.1 * kUs).epsilon(1e-12));
    p.l_mem = 0.1 * kUs;
    CHECK(reciprocal_mask_only(p) == doctest::Approx(8.6 * kUs).epsilon(1e-12));

    // 29% degradation at 5us against the 0.1us baseline
    const double deg = normalized_degradation(Variant::MaskOnly, reference_params(), {},
                                              0.1 * kUs, 5.0 * kUs);
    CHECK(deg == doctest::Approx(0.29).epsilon(0.035));

    p = reference_params();
    p.l_mem = 8.6 * kUs;
    CHECK(reciprocal_best_case(p) == doctest::Approx(8.6 * kUs).epsilon(1e-12));
    p.l_mem = 0.0;
    CHECK(reciprocal_best_case(p) == doctest::Approx(8.6 * kUs).epsilon(1e-12));
    p.l_mem = 10.0 * kUs;
    CHECK(reciprocal_best_case(p) == doctest::Approx(10.0 * kUs).epsilon(1e-12));

    CHECK(hidable_latency_with_io(reference_params()) ==
          doctest::Approx(8.6 * kUs).epsilon(1e-12));
    p = reference_params();
    p.prefetch_depth = 12;
    CHECK(hidable_latency_with_io(p) == doctest::Approx(10.32 * kUs).epsilon(1e-12));
}

TEST_CASE("window wait time") {
    OperationModelParams p = reference_params();
    CHECK(wait_time(0, 0, p) == doctest::Approx(3.5 * kUs).epsilon(1e-12));
    CHECK(wait_time(1, 0, p) == 0.0);
    p.l_mem = 1.4 * kUs;
    for (int j = 0; j <= 10; ++j)
        for (int k = 0; k <= 5; ++k) CHECK(wait_time(j, k, p) == 0.0);
    CHECK_THROWS_AS(wait_time(-1, 0, p), std::invalid_argument);
    CHECK_THROWS_AS(wait_time(11, 0, p), std::invalid_argument);
    CHECK_THROWS_AS(wait_time(0, -1, p), std::invalid_argument);
}

TEST_CASE("sequence probability") {
    OperationModelParams p = reference_params();
    // (10/12)^10, frozen from direct evaluation
    CHECK(sequence_probability(0, 0, p) == doctest::Approx(0.1615055828898458).epsilon(1e-12));
    CHECK(sequence_probability(10, 0, p) ==
          doctest::Approx(std::pow(1.0 / 12.0, 10)).epsilon(1e-12));
    double mass = 0.0;
    for (int j = 0; j <= 10; ++j)
        for (int k = 0; k <= 60; ++k) {
            const double q = sequence_probability(j, k, p);
            CHECK(q >= 0.0);
            mass += q;
        }
    // Total window weight is (M+2)/(M+1) for the three-category split.
    CHECK(mass == doctest::Approx(12.0 / 11.0).epsilon(1e-9));
    CHECK(sequence_probability(0, 200, p) < 1e-100);
}

TEST_CASE("expected wait per suboperation") {
    OperationModelParams p = reference_params();
    p.l_mem = 1.4 * kUs;
    CHECK(expected_wait_per_subop(p) == 0.0);
    p.l_mem = 1.5 * kUs;
    CHECK(expected_wait_per_subop(p) == 0.0);

    p.l_mem = 5.0 * kUs;
    // Frozen from the Monte-Carlo oracle (1e7 suboperations agree within 1%).
    CHECK(expected_wait_per_subop(p) ==
          doctest::Approx(0.05265754942140602 * kUs).epsilon(1e-9));

    SUBCASE("truncation cap is reported") {
        CHECK_THROWS_AS(expected_wait_per_subop(p, 1e-12, 3), std::runtime_error);
        CHECK_THROWS_AS(expected_wait_per_subop(p, 0.0), std::invalid_argument);
    }

    SUBCASE("truncation stability") {
        for (double l = 2.0; l <= 10.0; l += 2.0) {
            p.l_mem = l * kUs;
            const double a = expected_wait_per_subop(p, 1e-12);
            const double b = expected_wait_per_subop(p, 0.5e-12);
            if (a > 0.0) CHECK(std::abs(a - b) / a < 1e-4);
        }
    }
}

TEST_CASE("expected wait matches the Monte-Carlo window oracle") {
    Rng rng(2024);
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
        const OperationModelParams p = random_params(rng);
        const double eq = expected_wait_per_subop(p);
        const auto mc = kvlat_test::mc_expected_wait_per_subop(p, 10'000'000, 7000 + i);
        const double scale = std::max(eq, mc.value);
        if (scale < 1e-10) continue;  // both effectively zero
        CHECK(std::abs(eq - mc.value) < 0.01 * scale + 3.0 * mc.std_error);
        ++checked;
    }
    CHECK(checked >= 30);  // the draw must exercise non-trivial waits
}

TEST_CASE("probabilistic reciprocal") {
    OperationModelParams p = reference_params();
    p.l_mem = 0.0;
    CHECK(reciprocal_probabilistic(p) == doctest::Approx(8.6 * kUs).epsilon(1e-12));

    const double deg = normalized_degradation(Variant::Probabilistic, reference_params(),
                                              {}, 0.1 * kUs, 5.0 * kUs);
    CHECK(deg > 0.05);
    CHECK(deg < 0.09);

    p.l_mem = 10.0 * kUs;
    const double prob = reciprocal_probabilistic(p);
    CHECK(prob > reciprocal_best_case(p));
    CHECK(prob < reciprocal_mask_only(p));
}

TEST_CASE("sandwich and monotonicity over a random grid") {
    Rng rng(99);
    for (int i = 0; i < 40; ++i) {
        OperationModelParams p = random_params(rng);
        const double best = reciprocal_best_case(p);
        const double prob = reciprocal_probabilistic(p);
        const double mask = reciprocal_mask_only(p);
        CHECK(best <= prob * (1 + 1e-12));
        CHECK(prob <= mask * (1 + 1e-12));

        // every variant's reciprocal is non-decreasing in l_mem
        OperationModelParams hi = p;
        hi.l_mem = p.l_mem * 1.25;
        for (const Variant v : {Variant::Single, Variant::Multi,
                                Variant::MemPrefetchLimited, Variant::MaskOnly,
                                Variant::BestCase, Variant::Probabilistic}) {
            CHECK(reciprocal(v, hi) >= reciprocal(v, p) * (1 - 1e-12));
        }
    }
}

TEST_CASE("reduction chain") {
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        OperationModelParams p = random_params(rng);
        p.n_threads = 3 + static_cast<std::uint32_t>(rng.next_below(60));
        OperationModelParams unbounded = p;
        unbounded.prefetch_depth = 1000000000;
        CHECK(reciprocal_mem_prefetch_limited(unbounded) ==
              doctest::Approx(reciprocal_multi(p)).epsilon(1e-12));

        OperationModelParams one = p;
        one.n_threads = 1;
        if (one.l_mem >= one.t_sw)
            CHECK(reciprocal_multi(one) ==
                  doctest::Approx(reciprocal_single(one)).epsilon(1e-12));
    }
}

TEST_CASE("effective memory latency") {
    OperationModelParams p = reference_params();
    SystemParams s;
    s.rho = 1.0;
    CHECK(effective_memory_latency(0, p, s) == p.l_mem);

    s.rho = 0.0;
    s.l_dram = 0.1 * kUs;
    CHECK(effective_memory_latency(0, p, s) == doctest::Approx(0.1 * kUs).epsilon(1e-12));

    // tiered latency 0.2us loses to the bandwidth term 10 * 64B / 1GB/s
    s.rho = 0.5;
    p.l_mem = 0.3 * kUs;
    s.l_dram = 0.1 * kUs;
    s.a_mem = 64.0;
    s.b_mem = 1e9;
    CHECK(effective_memory_latency(0, p, s) == doctest::Approx(0.64 * kUs).epsilon(1e-12));
    // with one slot already claimed by a pre-IO the bandwidth term shrinks
    CHECK(effective_memory_latency(1, p, s) == doctest::Approx(0.576 * kUs).epsilon(1e-12));
    CHECK_THROWS_AS(effective_memory_latency(-1, p, s), std::invalid_argument);
}

TEST_CASE("extended model") {
    OperationModelParams p = reference_params();
    SystemParams s;  // unbounded, rho=1, epsilon=0

    SUBCASE("collapses to the probabilistic form bit for bit") {
        for (double l : {0.5, 2.0, 5.0, 8.0, 10.0}) {
            p.l_mem = l * kUs;
            CHECK(reciprocal_extended(p, s) == reciprocal_probabilistic(p));
        }
    }

    SUBCASE("io bandwidth floor") {
        p.l_mem = 1.0 * kUs;
        s.a_io = 128e3;
        s.b_io = 500e6;
        CHECK(reciprocal_extended(p, s) == doctest::Approx(256.0 * kUs).epsilon(1e-12));
    }

    SUBCASE("iops floor") {
        p.l_mem = 1.0 * kUs;
        s.r_io = 1e5;
        CHECK(reciprocal_extended(p, s) == doctest::Approx(10.0 * kUs).epsilon(1e-12));
    }

    SUBCASE("eviction strictly hurts") {
        p.l_mem = 5.0 * kUs;
        const double base = reciprocal_extended(p, s);
        s.epsilon = 0.05;
        CHECK(reciprocal_extended(p, s) > base);
    }

    SUBCASE("offloading less strictly helps") {
        // latencies above the hidable limit, where the rho=1 wait is nonzero
        for (double l : {2.0, 3.0, 5.0, 8.0}) {
            p.l_mem = l * kUs;
            SystemParams half = s;
            half.rho = 0.5;
            half.l_dram = 0.1 * kUs;
            CHECK(reciprocal_extended(p, half) < reciprocal_extended(p, s));
        }
    }
}

TEST_CASE("multi-io wrapper") {
    OperationModelParams p = reference_params();
    p.s_ios = 1.0;
    CHECK(reciprocal_multi_io(Variant::MaskOnly, p) ==
          doctest::Approx(reciprocal_mask_only(p)).epsilon(1e-15));

    // S=2 with per-IO M=5: equals 2*(5*mem_reciprocal) + 2E
    OperationModelParams split = p;
    split.m_accesses = 5.0;
    split.s_ios = 2.0;
    const double expected =
        2.0 * (5.0 * reciprocal_mem_prefetch_limited(split) + io_overhead(split));
    CHECK(reciprocal_multi_io(Variant::MaskOnly, split) ==
          doctest::Approx(expected).epsilon(1e-12));

    // fractional mean IOs per op are accepted
    OperationModelParams frac = p;
    frac.m_accesses = 30.3;
    frac.s_ios = 0.33;
    CHECK(reciprocal_multi_io(Variant::MaskOnly, frac) > 0.0);
}

TEST_CASE("normalized degradation") {
    OperationModelParams p = reference_params();
    CHECK(normalized_degradation(Variant::MaskOnly, p, {}, 5.0 * kUs, 5.0 * kUs) ==
          doctest::Approx(0.0));
}

TEST_CASE("cost-performance ratio") {
    CHECK(cpr({0.4, 0.5, 0.02}) == doctest::Approx(1.225).epsilon(1e-12));
    CHECK(cpr({0.4, 1.0 / 3.0, 0.0}) == doctest::Approx(1.0 / (0.4 / 3.0 + 0.6)).epsilon(1e-12));
    CHECK(cpr({0.4, 1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));

    // cpr > 1 iff c(1-b) > d
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        CprParams c;
        c.c = 0.05 + 0.9 * rng.next_double();
        c.b = 0.05 + 0.9 * rng.next_double();
        c.d = 0.9 * rng.next_double();
        CHECK((cpr(c) > 1.0) == (c.c * (1.0 - c.b) > c.d));
    }
}

TEST_CASE("parameter validation") {
    OperationModelParams p = reference_params();
    p.m_accesses = 0.0;
    CHECK_THROWS_AS(reciprocal_mask_only(p), std::invalid_argument);
    p = reference_params();
    p.t_mem = -1e-9;
    CHECK_THROWS_AS(reciprocal_single(p), std::invalid_argument);

    SystemParams s;
    s.epsilon = 1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = {};
    s.rho = 1.5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    CHECK_THROWS_AS(variant_from_string("nonsense"), std::invalid_argument);
    CHECK(variant_from_string("mask") == Variant::MaskOnly);
    CHECK(to_string(Variant::Probabilistic) == "probabilistic");
}
