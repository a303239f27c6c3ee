#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kvlat/model.hpp"
#include "kvlat/sim.hpp"
#include "kvlat/workload.hpp"

namespace py = pybind11;

using namespace kvlat;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Throughput models and event simulation for SSD-based KV stores "
              "on microsecond-latency memory";

    py::class_<OperationModelParams>(m, "OperationModelParams")
        .def(py::init<>())
        .def_readwrite("t_mem", &OperationModelParams::t_mem)
        .def_readwrite("t_sw", &OperationModelParams::t_sw)
        .def_readwrite("t_io_pre", &OperationModelParams::t_io_pre)
        .def_readwrite("t_io_post", &OperationModelParams::t_io_post)
        .def_readwrite("l_mem", &OperationModelParams::l_mem)
        .def_readwrite("l_io", &OperationModelParams::l_io)
        .def_readwrite("n_threads", &OperationModelParams::n_threads)
        .def_readwrite("prefetch_depth", &OperationModelParams::prefetch_depth)
        .def_readwrite("m_accesses", &OperationModelParams::m_accesses)
        .def_readwrite("s_ios", &OperationModelParams::s_ios)
        .def("validate", &OperationModelParams::validate);

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("a_mem", &SystemParams::a_mem)
        .def_readwrite("b_mem", &SystemParams::b_mem)
        .def_readwrite("a_io", &SystemParams::a_io)
        .def_readwrite("b_io", &SystemParams::b_io)
        .def_readwrite("r_io", &SystemParams::r_io)
        .def_readwrite("rho", &SystemParams::rho)
        .def_readwrite("epsilon", &SystemParams::epsilon)
        .def_readwrite("l_dram", &SystemParams::l_dram)
        .def("validate", &SystemParams::validate);

    py::class_<CprParams>(m, "CprParams")
        .def(py::init<>())
        .def(py::init([](double c, double b, double d) {
                 return CprParams{c, b, d};
             }),
             py::arg("c"), py::arg("b"), py::arg("d"))
        .def_readwrite("c", &CprParams::c)
        .def_readwrite("b", &CprParams::b)
        .def_readwrite("d", &CprParams::d);

    py::enum_<model::Variant>(m, "Variant")
        .value("Single", model::Variant::Single)
        .value("Multi", model::Variant::Multi)
        .value("MemPrefetchLimited", model::Variant::MemPrefetchLimited)
        .value("MaskOnly", model::Variant::MaskOnly)
        .value("BestCase", model::Variant::BestCase)
        .value("Probabilistic", model::Variant::Probabilistic)
        .value("Extended", model::Variant::Extended);

    m.def("reciprocal_single", &model::reciprocal_single);
    m.def("reciprocal_multi", &model::reciprocal_multi);
    m.def("reciprocal_mem_prefetch_limited", &model::reciprocal_mem_prefetch_limited);
    m.def("hidable_latency_mem_only", &model::hidable_latency_mem_only);
    m.def("io_overhead", &model::io_overhead);
    m.def("reciprocal_mask_only", &model::reciprocal_mask_only);
    m.def("reciprocal_best_case", &model::reciprocal_best_case);
    m.def("hidable_latency_with_io", &model::hidable_latency_with_io);
    m.def("wait_time", &model::wait_time, py::arg("j"), py::arg("k"), py::arg("params"));
    m.def("sequence_probability", &model::sequence_probability, py::arg("j"),
          py::arg("k"), py::arg("params"));
    m.def("expected_wait_per_subop", &model::expected_wait_per_subop, py::arg("params"),
          py::arg("tail_tol") = model::kDefaultTailTol,
          py::arg("k_cap") = model::kTruncationCap);
    m.def("reciprocal_probabilistic", &model::reciprocal_probabilistic, py::arg("params"),
          py::arg("tail_tol") = model::kDefaultTailTol);
    m.def("effective_memory_latency", &model::effective_memory_latency, py::arg("j"),
          py::arg("params"), py::arg("system"));
    m.def("reciprocal_extended", &model::reciprocal_extended, py::arg("params"),
          py::arg("system"), py::arg("tail_tol") = model::kDefaultTailTol);
    m.def("reciprocal", &model::reciprocal, py::arg("variant"), py::arg("params"),
          py::arg("system") = SystemParams{},
          py::arg("tail_tol") = model::kDefaultTailTol);
    m.def("reciprocal_multi_io", &model::reciprocal_multi_io, py::arg("variant"),
          py::arg("params"), py::arg("system") = SystemParams{},
          py::arg("tail_tol") = model::kDefaultTailTol);
    m.def("normalized_degradation", &model::normalized_degradation, py::arg("variant"),
          py::arg("params"), py::arg("system"), py::arg("l_baseline"), py::arg("l_eval"),
          py::arg("tail_tol") = model::kDefaultTailTol);
    m.def("cpr", &model::cpr);

    py::class_<model::ThroughputPrediction>(m, "ThroughputPrediction")
        .def_readonly("variant", &model::ThroughputPrediction::variant)
        .def_readonly("reciprocal", &model::ThroughputPrediction::reciprocal)
        .def_readonly("throughput", &model::ThroughputPrediction::throughput)
        .def_readonly("normalized", &model::ThroughputPrediction::normalized);
    m.def("predict", &model::predict, py::arg("variant"), py::arg("params"),
          py::arg("system"), py::arg("baseline_latency"),
          py::arg("tail_tol") = model::kDefaultTailTol);

    py::class_<workload::Distribution> dist(m, "Distribution");
    dist.def_static("fixed", &workload::Distribution::fixed)
        .def_static("uniform_range", &workload::Distribution::uniform_range)
        .def_static("geometric", &workload::Distribution::geometric)
        .def("mean", &workload::Distribution::mean);

    py::class_<workload::IoCountModel>(m, "IoCountModel")
        .def_static("fixed_ios", &workload::IoCountModel::fixed_ios)
        .def_static("hit_ratio", &workload::IoCountModel::hit_ratio)
        .def_static("two_tier", &workload::IoCountModel::two_tier, py::arg("h1"),
                    py::arg("h2"), py::arg("miss_ios") = 1)
        .def("mean", &workload::IoCountModel::mean);

    py::class_<workload::WorkloadProfile>(m, "WorkloadProfile")
        .def(py::init<>())
        .def_readwrite("name", &workload::WorkloadProfile::name)
        .def_readwrite("hops_per_op", &workload::WorkloadProfile::hops_per_op)
        .def_readwrite("io_count_model", &workload::WorkloadProfile::io_count_model)
        .def_readwrite("read_fraction", &workload::WorkloadProfile::read_fraction);
    m.def("preset", &workload::preset, py::arg("name"), py::arg("hops_m") = 10);
    m.def("aggregate_to_model", &workload::aggregate_to_model, py::arg("profile"),
          py::arg("base"));

    py::enum_<sim::Phasing>(m, "Phasing")
        .value("Aligned", sim::Phasing::Aligned)
        .value("Staggered", sim::Phasing::Staggered);

    py::class_<sim::LatencyPoint>(m, "LatencyPoint")
        .def(py::init([](double latency, double probability) {
                 return sim::LatencyPoint{latency, probability};
             }),
             py::arg("latency"), py::arg("probability"))
        .def_readwrite("latency", &sim::LatencyPoint::latency)
        .def_readwrite("probability", &sim::LatencyPoint::probability);

    py::class_<sim::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("params", &sim::SimConfig::params)
        .def_readwrite("system", &sim::SimConfig::system)
        .def_readwrite("m_distribution", &sim::SimConfig::m_distribution)
        .def_readwrite("phasing", &sim::SimConfig::phasing)
        .def_readwrite("stagger_seed", &sim::SimConfig::stagger_seed)
        .def_readwrite("io_latency_mixture", &sim::SimConfig::io_latency_mixture)
        .def_readwrite("warmup_ops", &sim::SimConfig::warmup_ops)
        .def_readwrite("measure_ops", &sim::SimConfig::measure_ops)
        .def_readwrite("seed", &sim::SimConfig::seed)
        .def_readwrite("profile", &sim::SimConfig::profile)
        .def_readwrite("include_io", &sim::SimConfig::include_io)
        .def("validate", &sim::SimConfig::validate);

    py::class_<sim::LoadLatencyHistogram>(m, "LoadLatencyHistogram")
        .def_readonly("bucket_width", &sim::LoadLatencyHistogram::bucket_width)
        .def_readonly("counts", &sim::LoadLatencyHistogram::counts)
        .def_readonly("overflow", &sim::LoadLatencyHistogram::overflow)
        .def_readonly("total", &sim::LoadLatencyHistogram::total)
        .def("mass_in_bucket_of", &sim::LoadLatencyHistogram::mass_in_bucket_of)
        .def("mass_at_or_above", &sim::LoadLatencyHistogram::mass_at_or_above);

    py::class_<sim::SubopCounts>(m, "SubopCounts")
        .def_readonly("memory", &sim::SubopCounts::memory)
        .def_readonly("pre_io", &sim::SubopCounts::pre_io)
        .def_readonly("post_io", &sim::SubopCounts::post_io)
        .def_readonly("evicted_reload", &sim::SubopCounts::evicted_reload);

    py::class_<sim::ThreadAccounting>(m, "ThreadAccounting")
        .def_readonly("busy", &sim::ThreadAccounting::busy)
        .def_readonly("stall", &sim::ThreadAccounting::stall)
        .def_readonly("queued", &sim::ThreadAccounting::queued);

    py::class_<sim::SimResult>(m, "SimResult")
        .def_readonly("ops_completed", &sim::SimResult::ops_completed)
        .def_readonly("sim_time", &sim::SimResult::sim_time)
        .def_readonly("throughput", &sim::SimResult::throughput)
        .def_readonly("stall_time_total", &sim::SimResult::stall_time_total)
        .def_readonly("busy_time_total", &sim::SimResult::busy_time_total)
        .def_readonly("mean_op_latency", &sim::SimResult::mean_op_latency)
        .def_readonly("load_latency_histogram", &sim::SimResult::load_latency_histogram)
        .def_readonly("subop_counts", &sim::SimResult::subop_counts)
        .def_readonly("thread_accounting", &sim::SimResult::thread_accounting)
        .def_readonly("io_polls", &sim::SimResult::io_polls)
        .def_readonly("max_inflight_prefetches", &sim::SimResult::max_inflight_prefetches)
        .def_readonly("n_threads", &sim::SimResult::n_threads);

    m.def("run_simulation", &sim::run_simulation,
          py::call_guard<py::gil_scoped_release>());
    m.def("run_memory_only", &sim::run_memory_only,
          py::call_guard<py::gil_scoped_release>());

    py::class_<sim::ThreadSweepResult>(m, "ThreadSweepResult")
        .def_readonly("best_n", &sim::ThreadSweepResult::best_n)
        .def_readonly("best", &sim::ThreadSweepResult::best)
        .def_readonly("all", &sim::ThreadSweepResult::all);
    m.def("sweep_thread_count", &sim::sweep_thread_count, py::arg("config"),
          py::arg("n_candidates"), py::call_guard<py::gil_scoped_release>());
}
