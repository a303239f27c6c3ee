#include "kvlat/config.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace kvlat::config {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("config: " + what);
}

void check_keys(const ordered_json& obj, const char* ctx,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) fail(std::string("unknown key '") + key + "' in " + ctx);
    }
}

double get_us(const ordered_json& obj, const char* key, double fallback_seconds) {
    if (!obj.contains(key)) return fallback_seconds;
    return obj.at(key).get<double>() * 1e-6;
}

void parse_params(const ordered_json& obj, OperationModelParams& p) {
    check_keys(obj, "params",
               {"t_mem_us", "t_sw_us", "t_io_pre_us", "t_io_post_us", "l_mem_us",
                "l_io_us", "n_threads", "prefetch_depth", "m_accesses", "s_ios"});
    p.t_mem = get_us(obj, "t_mem_us", p.t_mem);
    p.t_sw = get_us(obj, "t_sw_us", p.t_sw);
    p.t_io_pre = get_us(obj, "t_io_pre_us", p.t_io_pre);
    p.t_io_post = get_us(obj, "t_io_post_us", p.t_io_post);
    p.l_mem = get_us(obj, "l_mem_us", p.l_mem);
    p.l_io = get_us(obj, "l_io_us", p.l_io);
    if (obj.contains("n_threads")) p.n_threads = obj.at("n_threads").get<std::uint32_t>();
    if (obj.contains("prefetch_depth"))
        p.prefetch_depth = obj.at("prefetch_depth").get<std::uint32_t>();
    if (obj.contains("m_accesses")) p.m_accesses = obj.at("m_accesses").get<double>();
    if (obj.contains("s_ios")) p.s_ios = obj.at("s_ios").get<double>();
}

double bounded_or_inf(const ordered_json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_null()) return kUnbounded;
    return v.get<double>();
}

void parse_system(const ordered_json& obj, SystemParams& s) {
    check_keys(obj, "system",
               {"a_mem_bytes", "b_mem_bytes_per_s", "a_io_bytes", "b_io_bytes_per_s",
                "r_io_ops_per_s", "rho", "epsilon", "l_dram_us"});
    if (obj.contains("a_mem_bytes")) s.a_mem = obj.at("a_mem_bytes").get<double>();
    s.b_mem = bounded_or_inf(obj, "b_mem_bytes_per_s", s.b_mem);
    if (obj.contains("a_io_bytes")) s.a_io = obj.at("a_io_bytes").get<double>();
    s.b_io = bounded_or_inf(obj, "b_io_bytes_per_s", s.b_io);
    s.r_io = bounded_or_inf(obj, "r_io_ops_per_s", s.r_io);
    if (obj.contains("rho")) s.rho = obj.at("rho").get<double>();
    if (obj.contains("epsilon")) s.epsilon = obj.at("epsilon").get<double>();
    s.l_dram = get_us(obj, "l_dram_us", s.l_dram);
}

workload::Distribution parse_distribution(const ordered_json& obj) {
    check_keys(obj, "distribution", {"kind", "value", "lo", "hi", "mean"});
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "fixed")
        return workload::Distribution::fixed(obj.at("value").get<std::uint32_t>());
    if (kind == "uniform")
        return workload::Distribution::uniform_range(obj.at("lo").get<std::uint32_t>(),
                                                     obj.at("hi").get<std::uint32_t>());
    if (kind == "geometric")
        return workload::Distribution::geometric(
            obj.contains("mean") ? obj.at("mean").get<double>() : 10.0);
    fail("unknown distribution kind: " + kind);
}

workload::IoCountModel parse_io_count(const ordered_json& obj) {
    check_keys(obj, "io_count_model", {"kind", "s", "h", "h1", "h2", "miss_ios"});
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "fixed_ios") return workload::IoCountModel::fixed_ios(obj.at("s").get<double>());
    if (kind == "hit_ratio")
        return workload::IoCountModel::hit_ratio(obj.at("h").get<double>());
    if (kind == "two_tier")
        return workload::IoCountModel::two_tier(
            obj.at("h1").get<double>(), obj.at("h2").get<double>(),
            obj.contains("miss_ios") ? obj.at("miss_ios").get<std::uint32_t>() : 1);
    fail("unknown io count kind: " + kind);
}

workload::WorkloadProfile parse_profile(const ordered_json& obj) {
    if (obj.is_string()) return workload::preset(obj.get<std::string>());
    check_keys(obj, "workload", {"preset", "hops_m", "name", "hops_per_op",
                                 "io_count_model", "read_fraction"});
    if (obj.contains("preset")) {
        const auto hops =
            obj.contains("hops_m") ? obj.at("hops_m").get<std::uint32_t>() : 10u;
        return workload::preset(obj.at("preset").get<std::string>(), hops);
    }
    workload::WorkloadProfile p;
    if (obj.contains("name")) p.name = obj.at("name").get<std::string>();
    if (obj.contains("hops_per_op")) p.hops_per_op = parse_distribution(obj.at("hops_per_op"));
    if (obj.contains("io_count_model"))
        p.io_count_model = parse_io_count(obj.at("io_count_model"));
    if (obj.contains("read_fraction"))
        p.read_fraction = obj.at("read_fraction").get<double>();
    return p;
}

void parse_sim(const ordered_json& obj, sweep::SweepSpec& spec) {
    check_keys(obj, "sim",
               {"include", "thread_grid", "phasing", "m_distribution",
                "io_latency_mixture", "warmup_ops", "measure_ops"});
    if (obj.contains("include")) spec.include_sim = obj.at("include").get<bool>();
    if (obj.contains("thread_grid"))
        spec.thread_grid = obj.at("thread_grid").get<std::vector<std::uint32_t>>();
    if (obj.contains("phasing")) {
        const std::string ph = obj.at("phasing").get<std::string>();
        if (ph == "aligned") spec.phasing = sim::Phasing::Aligned;
        else if (ph == "staggered") spec.phasing = sim::Phasing::Staggered;
        else fail("unknown phasing: " + ph);
    }
    if (obj.contains("m_distribution"))
        spec.m_distribution = parse_distribution(obj.at("m_distribution"));
    if (obj.contains("io_latency_mixture")) {
        spec.io_latency_mixture.clear();
        for (const auto& pt : obj.at("io_latency_mixture")) {
            check_keys(pt, "io_latency_mixture", {"latency_us", "probability"});
            spec.io_latency_mixture.push_back(
                {pt.at("latency_us").get<double>() * 1e-6,
                 pt.at("probability").get<double>()});
        }
    }
    if (obj.contains("warmup_ops")) spec.warmup_ops = obj.at("warmup_ops").get<std::uint64_t>();
    if (obj.contains("measure_ops"))
        spec.measure_ops = obj.at("measure_ops").get<std::uint64_t>();
}

sweep::SweepSpec parse_spec(const ordered_json& doc) {
    sweep::SweepSpec spec;
    check_keys(doc, "run document",
               {"params", "system", "axes", "variants", "sim", "workload", "seed",
                "baseline_latency_us", "tail_tol", "compare_band", "max_points", "cpr"});
    if (doc.contains("params")) parse_params(doc.at("params"), spec.params);
    if (doc.contains("system")) parse_system(doc.at("system"), spec.system);
    if (doc.contains("axes")) {
        for (const auto& [name, values] : doc.at("axes").items())
            spec.axes.emplace_back(name, values.get<std::vector<double>>());
    }
    if (doc.contains("variants")) {
        spec.variants.clear();
        for (const auto& v : doc.at("variants"))
            spec.variants.push_back(model::variant_from_string(v.get<std::string>()));
    }
    if (doc.contains("sim")) parse_sim(doc.at("sim"), spec);
    if (doc.contains("workload")) spec.profile = parse_profile(doc.at("workload"));
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("baseline_latency_us"))
        spec.baseline_latency = doc.at("baseline_latency_us").get<double>() * 1e-6;
    if (doc.contains("tail_tol")) spec.tail_tol = doc.at("tail_tol").get<double>();
    if (doc.contains("compare_band"))
        spec.compare_band = doc.at("compare_band").get<double>();
    if (doc.contains("max_points")) spec.max_points = doc.at("max_points").get<std::size_t>();
    return spec;
}

ordered_json parse_document(std::istream& in) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() && !doc.is_array()) fail("top-level value must be an object");
    return doc;
}

}  // namespace

sweep::SweepSpec load_spec(std::istream& in) { return parse_spec(parse_document(in)); }

sweep::SweepSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    return load_spec(in);
}

std::vector<CprParams> load_cpr_rows(std::istream& in) {
    const ordered_json doc = parse_document(in);
    const ordered_json rows = doc.is_array() ? doc : doc.value("cpr", ordered_json::array());
    std::vector<CprParams> out;
    for (const auto& r : rows) {
        check_keys(r, "cpr row", {"c", "b", "d"});
        CprParams p;
        p.c = r.at("c").get<double>();
        p.b = r.at("b").get<double>();
        p.d = r.at("d").get<double>();
        out.push_back(p);
    }
    return out;
}

std::vector<CprParams> load_cpr_rows_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    return load_cpr_rows(in);
}

}  // namespace kvlat::config
