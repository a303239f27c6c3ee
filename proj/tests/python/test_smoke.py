"""Smoke tests for the Python bindings."""

import math

import pytest

import kvlat


US = 1e-6


def table_params():
    p = kvlat.OperationModelParams()
    p.t_mem = 0.1 * US
    p.t_sw = 0.05 * US
    p.t_io_pre = 4.0 * US
    p.t_io_post = 3.0 * US
    p.l_mem = 5.0 * US
    p.prefetch_depth = 10
    p.m_accesses = 10.0
    p.n_threads = 1_000_000
    return p


def test_model_constants():
    p = table_params()
    assert kvlat.hidable_latency_mem_only(p) == pytest.approx(1.5 * US)
    assert kvlat.hidable_latency_with_io(p) == pytest.approx(8.6 * US)
    assert kvlat.io_overhead(p) == pytest.approx(7.1 * US)
    assert kvlat.reciprocal_mask_only(p) == pytest.approx(12.1 * US)


def test_degradation_and_prediction():
    p = table_params()
    deg = kvlat.normalized_degradation(
        kvlat.Variant.MaskOnly, p, kvlat.SystemParams(), 0.1 * US, 5.0 * US
    )
    assert deg == pytest.approx(0.29, abs=0.01)

    pred = kvlat.predict(kvlat.Variant.Probabilistic, p, kvlat.SystemParams(), 0.1 * US)
    assert pred.reciprocal * pred.throughput == pytest.approx(1.0)
    assert 0.9 < pred.normalized < 1.0


def test_validation_raises():
    p = table_params()
    p.m_accesses = 0.0
    with pytest.raises(ValueError):
        kvlat.reciprocal_mask_only(p)


def test_cpr():
    assert kvlat.cpr(kvlat.CprParams(c=0.4, b=0.5, d=0.02)) == pytest.approx(1.225)


def test_workload_presets():
    profile = kvlat.preset("block-cache")
    assert profile.io_count_model.mean() == pytest.approx(0.33)
    agg = kvlat.aggregate_to_model(profile, table_params())
    assert agg.s_ios == pytest.approx(0.33)
    assert agg.m_accesses * agg.s_ios == pytest.approx(10.0)


def test_simulation_runs_and_is_deterministic():
    cfg = kvlat.SimConfig()
    cfg.params = table_params()
    cfg.params.n_threads = 32
    cfg.m_distribution = kvlat.Distribution.geometric(10.0)
    cfg.measure_ops = 500
    cfg.seed = 3

    a = kvlat.run_simulation(cfg)
    b = kvlat.run_simulation(cfg)
    assert a.throughput == b.throughput
    assert a.ops_completed == 500
    assert a.subop_counts.memory > 0
    assert math.isclose(
        sum(a.load_latency_histogram.counts) + a.load_latency_histogram.overflow,
        a.load_latency_histogram.total,
    )


def test_single_thread_limit():
    cfg = kvlat.SimConfig()
    cfg.params = table_params()
    cfg.params.n_threads = 1
    cfg.m_distribution = kvlat.Distribution.fixed(1)
    cfg.measure_ops = 200
    r = kvlat.run_memory_only(cfg)
    assert r.throughput == pytest.approx(1.0 / (5.1 * US), rel=1e-9)


def test_thread_sweep():
    cfg = kvlat.SimConfig()
    cfg.params = table_params()
    cfg.m_distribution = kvlat.Distribution.geometric(10.0)
    cfg.measure_ops = 300
    res = kvlat.sweep_thread_count(cfg, [16, 32])
    assert res.best_n in (16, 32)
    assert len(res.all) == 2
