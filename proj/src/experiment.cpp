#include "bsr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bsr/errors.hpp"
#include "bsr/rng.hpp"

namespace bsr {

namespace fs = std::filesystem;
using nlohmann::json;

void ExperimentConfig::validate() const {
    if (replicates < 1) throw ConfigError("need at least 1 replicate");
    if (grid_size < 11) throw ConfigError("grid_size must be >= 11");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (acf_lags < 1) throw ConfigError("acf_lags must be >= 1");
    sampler.validate();
    if (shape == ShapeKind::Unimodal)
        throw ConfigError("no sampler is available for the Unimodal shape class");
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t r) {
    Rng data_rng(stream_seed(cfg.master_seed, 2 * r));
    const Dataset d = generate_dataset(cfg.function, cfg.K, NoiseModel{cfg.sigma}, data_rng);
    const HyperParams hp = empirical_hyperparams(d, cfg.shape, cfg.q02_midpoint);
    const double sigma_sq = estimate_sigma_sq(d);

    SamplerConfig sc = cfg.sampler;
    sc.m1 = hp.m1;
    sc.m2 = hp.m2;
    sc.seed = stream_seed(cfg.master_seed, 2 * r + 1);

    const ChainTrace trace = run_chain(d, hp.prior, sc, sigma_sq);
    const auto grid = linspace(d.tau, cfg.grid_size);
    const CurveEstimate est = posterior_mean_curve(trace, grid);

    ReplicateResult res;
    res.metrics = error_metrics(est, cfg.function);
    const auto series = cfg.monitor == MonitorSeries::CurveL1
                            ? curve_l1_series(trace)
                            : curve_err_l1_series(trace, cfg.function);
    res.diag = make_diagnostics(trace, series, cfg.acf_lags);
    return res;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t R = cfg.replicates;
    std::vector<ReplicateResult> results(R);

    struct Failure {
        std::size_t index;
        std::string what;
    };
    std::vector<Failure> failures;
    std::mutex failures_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= R) return;
            try {
                results[r] = run_replicate(cfg, r);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failures_mutex);
                failures.push_back({r, e.what()});
            }
        }
    };

    const std::size_t workers = std::min(cfg.parallelism, R);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (!failures.empty()) {
        auto worst = std::min_element(failures.begin(), failures.end(),
                                      [](const Failure& a, const Failure& b) { return a.index < b.index; });
        std::ostringstream msg;
        msg << "replicate " << worst->index << " failed: " << worst->what;
        throw ConfigError(msg.str());
    }

    ExperimentReport rep;
    rep.per_replicate = std::move(results);
    const double inv_r = 1.0 / static_cast<double>(R);
    for (const auto& res : rep.per_replicate) {
        rep.aggregate.l1 += res.metrics.l1 * inv_r;
        rep.aggregate.sup += res.metrics.sup * inv_r;
        rep.aggregate.mse += res.metrics.mse * inv_r;
        rep.mean_acceptance += res.diag.acceptance_rate * inv_r;
        rep.mean_ess += res.diag.ess * inv_r;
        for (const auto& [n, p] : res.diag.order_pmf_hat) rep.order_pmf_mean[n] += p * inv_r;
    }
    return rep;
}

namespace {

json metrics_to_json(const ErrorMetrics& m) {
    return json{{"l1", m.l1}, {"sup", m.sup}, {"mse", m.mse}};
}

ErrorMetrics metrics_from_json(const json& j) {
    return ErrorMetrics{j.at("l1").get<double>(), j.at("sup").get<double>(),
                        j.at("mse").get<double>()};
}

json pmf_to_json(const std::map<int, double>& pmf) {
    json j = json::object();
    for (const auto& [n, p] : pmf) j[std::to_string(n)] = p;
    return j;
}

std::map<int, double> pmf_from_json(const json& j) {
    std::map<int, double> pmf;
    for (auto it = j.begin(); it != j.end(); ++it) pmf[std::stoi(it.key())] = it.value().get<double>();
    return pmf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string report_to_json(const ExperimentReport& rep) {
    json j;
    j["aggregate"] = metrics_to_json(rep.aggregate);
    j["mean_acceptance"] = rep.mean_acceptance;
    j["mean_ess"] = rep.mean_ess;
    j["order_pmf_mean"] = pmf_to_json(rep.order_pmf_mean);
    json reps = json::array();
    for (const auto& r : rep.per_replicate) {
        json jr;
        jr["metrics"] = metrics_to_json(r.metrics);
        jr["acf"] = r.diag.acf;
        jr["ess"] = r.diag.ess;
        jr["acceptance_rate"] = r.diag.acceptance_rate;
        jr["order_pmf"] = pmf_to_json(r.diag.order_pmf_hat);
        reps.push_back(std::move(jr));
    }
    j["per_replicate"] = std::move(reps);
    return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentReport rep;
    rep.aggregate = metrics_from_json(j.at("aggregate"));
    rep.mean_acceptance = j.at("mean_acceptance").get<double>();
    rep.mean_ess = j.at("mean_ess").get<double>();
    rep.order_pmf_mean = pmf_from_json(j.at("order_pmf_mean"));
    for (const auto& jr : j.at("per_replicate")) {
        ReplicateResult r;
        r.metrics = metrics_from_json(jr.at("metrics"));
        r.diag.acf = jr.at("acf").get<std::vector<double>>();
        r.diag.ess = jr.at("ess").get<double>();
        r.diag.acceptance_rate = jr.at("acceptance_rate").get<double>();
        r.diag.order_pmf_hat = pmf_from_json(jr.at("order_pmf"));
        rep.per_replicate.push_back(std::move(r));
    }
    return rep;
}

void emit_report(const ExperimentReport& rep, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
    const fs::path base(dir);

    write_file(base / "report.json", report_to_json(rep));

    json table;
    table["l1"] = rep.aggregate.l1;
    table["sup"] = rep.aggregate.sup;
    table["mse"] = rep.aggregate.mse;
    table["acceptance_rate"] = rep.mean_acceptance;
    table["ess"] = rep.mean_ess;
    write_file(base / "table.json", table.dump(2));

    {
        std::ostringstream csv;
        csv.precision(17);
        csv << "n,probability\n";
        for (const auto& [n, p] : rep.order_pmf_mean) csv << n << ',' << p << '\n';
        write_file(base / "order_posterior.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv.precision(17);
        csv << "lag,rho\n";
        if (!rep.per_replicate.empty()) {
            const auto& acf = rep.per_replicate.front().diag.acf;
            for (std::size_t k = 0; k < acf.size(); ++k) csv << k + 1 << ',' << acf[k] << '\n';
        }
        write_file(base / "acf_replicate0.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv.precision(17);
        csv << "replicate,l1,sup,mse,acceptance_rate,ess\n";
        for (std::size_t r = 0; r < rep.per_replicate.size(); ++r) {
            const auto& rr = rep.per_replicate[r];
            csv << r << ',' << rr.metrics.l1 << ',' << rr.metrics.sup << ',' << rr.metrics.mse
                << ',' << rr.diag.acceptance_rate << ',' << rr.diag.ess << '\n';
        }
        write_file(base / "per_replicate.csv", csv.str());
    }
}

ExperimentReport parse_report(const std::string& dir) {
    ExperimentReport rep = report_from_json(read_file(fs::path(dir) / "report.json"));
    const double inv_r = 1.0 / static_cast<double>(rep.per_replicate.size());
    ErrorMetrics agg;
    double acc = 0.0, ess = 0.0;
    for (const auto& r : rep.per_replicate) {
        agg.l1 += r.metrics.l1 * inv_r;
        agg.sup += r.metrics.sup * inv_r;
        agg.mse += r.metrics.mse * inv_r;
        acc += r.diag.acceptance_rate * inv_r;
        ess += r.diag.ess * inv_r;
    }
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    if (!close(agg.l1, rep.aggregate.l1) || !close(agg.sup, rep.aggregate.sup) ||
        !close(agg.mse, rep.aggregate.mse) || !close(acc, rep.mean_acceptance) ||
        !close(ess, rep.mean_ess))
        throw IoError("report aggregates do not match per-replicate means");
    return rep;
}

namespace {

TestFunction function_from_string(const std::string& s) {
    if (s == "f1") return TestFunction::F1;
    if (s == "f2") return TestFunction::F2;
    if (s == "f3") return TestFunction::F3;
    if (s == "f4") return TestFunction::F4;
    throw ConfigError("unknown function: " + s);
}

std::string function_to_string(TestFunction f) {
    switch (f) {
        case TestFunction::F1: return "f1";
        case TestFunction::F2: return "f2";
        case TestFunction::F3: return "f3";
        case TestFunction::F4: return "f4";
    }
    return "?";
}

ShapeKind shape_from_string(const std::string& s) {
    if (s == "monotone") return ShapeKind::Monotone;
    if (s == "convex") return ShapeKind::UnimodalConvex;
    if (s == "concave") return ShapeKind::UnimodalConcave;
    throw ConfigError("unknown shape: " + s);
}

std::string shape_to_string(ShapeKind s) {
    switch (s) {
        case ShapeKind::Monotone: return "monotone";
        case ShapeKind::UnimodalConvex: return "convex";
        case ShapeKind::UnimodalConcave: return "concave";
        default: return "?";
    }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON parse error: ") + e.what());
    }
    static const std::set<std::string> known = {
        "function", "sigma", "k", "replicates", "shape", "sampler", "grid_size",
        "master_seed", "output_dir", "parallelism", "monitor", "q02_midpoint", "acf_lags"};
    static const std::set<std::string> known_sampler = {"kind", "c", "updates", "burn_in",
                                                        "thinning", "strict_balance"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigError("unknown config key: " + it.key());

    ExperimentConfig cfg = std::move(base);
    if (j.contains("function")) cfg.function = function_from_string(j["function"].get<std::string>());
    if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
    if (j.contains("k")) cfg.K = j["k"].get<std::size_t>();
    if (j.contains("replicates")) cfg.replicates = j["replicates"].get<std::size_t>();
    if (j.contains("shape")) cfg.shape = shape_from_string(j["shape"].get<std::string>());
    if (j.contains("grid_size")) cfg.grid_size = j["grid_size"].get<std::size_t>();
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("parallelism")) cfg.parallelism = j["parallelism"].get<std::size_t>();
    if (j.contains("q02_midpoint")) cfg.q02_midpoint = j["q02_midpoint"].get<bool>();
    if (j.contains("acf_lags")) cfg.acf_lags = j["acf_lags"].get<int>();
    if (j.contains("monitor")) {
        const auto m = j["monitor"].get<std::string>();
        if (m == "curve_l1") cfg.monitor = MonitorSeries::CurveL1;
        else if (m == "error_l1") cfg.monitor = MonitorSeries::ErrorL1;
        else throw ConfigError("unknown monitor: " + m);
    }
    if (j.contains("sampler")) {
        const auto& js = j["sampler"];
        for (auto it = js.begin(); it != js.end(); ++it)
            if (!known_sampler.count(it.key())) throw ConfigError("unknown sampler key: " + it.key());
        if (js.contains("kind")) {
            const auto k = js["kind"].get<std::string>();
            if (k == "mhra") cfg.sampler.kind = SamplerConfig::Kind::Mhra;
            else if (k == "ima") cfg.sampler.kind = SamplerConfig::Kind::Ima;
            else throw ConfigError("unknown sampler kind: " + k);
        }
        if (js.contains("c")) cfg.sampler.c = js["c"].get<double>();
        if (js.contains("updates")) cfg.sampler.updates = js["updates"].get<std::int64_t>();
        if (js.contains("burn_in")) cfg.sampler.burn_in = js["burn_in"].get<std::int64_t>();
        if (js.contains("thinning")) cfg.sampler.thinning = js["thinning"].get<std::int64_t>();
        if (js.contains("strict_balance")) cfg.sampler.strict_balance = js["strict_balance"].get<bool>();
    }
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["function"] = function_to_string(cfg.function);
    j["sigma"] = cfg.sigma;
    j["k"] = cfg.K;
    j["replicates"] = cfg.replicates;
    j["shape"] = shape_to_string(cfg.shape);
    j["grid_size"] = cfg.grid_size;
    j["master_seed"] = cfg.master_seed;
    j["output_dir"] = cfg.output_dir;
    j["parallelism"] = cfg.parallelism;
    j["monitor"] = cfg.monitor == MonitorSeries::CurveL1 ? "curve_l1" : "error_l1";
    j["q02_midpoint"] = cfg.q02_midpoint;
    j["acf_lags"] = cfg.acf_lags;
    j["sampler"] = {
        {"kind", cfg.sampler.kind == SamplerConfig::Kind::Mhra ? "mhra" : "ima"},
        {"c", cfg.sampler.c},
        {"updates", cfg.sampler.updates},
        {"burn_in", cfg.sampler.burn_in},
        {"thinning", cfg.sampler.thinning},
        {"strict_balance", cfg.sampler.strict_balance},
    };
    return j.dump(2);
}

}  // namespace bsr
