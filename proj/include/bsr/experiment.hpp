#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsr/analysis.hpp"
#include "bsr/model.hpp"
#include "bsr/samplers.hpp"

namespace bsr {

/// Which series feeds the ACF/ESS diagnostics.
enum class MonitorSeries { CurveL1, ErrorL1 };

struct ExperimentConfig {
    TestFunction function = TestFunction::F1;
    double sigma = 1.0;
    std::size_t K = 100;
    std::size_t replicates = 200;
    ShapeKind shape = ShapeKind::Monotone;
    SamplerConfig sampler{};
    std::size_t grid_size = 1001;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    std::size_t parallelism = 1;
    MonitorSeries monitor = MonitorSeries::CurveL1;
    bool q02_midpoint = false;
    int acf_lags = 50;

    void validate() const;
};

struct ReplicateResult {
    ErrorMetrics metrics;
    Diagnostics diag;
};

struct ExperimentReport {
    std::vector<ReplicateResult> per_replicate;
    ErrorMetrics aggregate;               // arithmetic means across replicates
    std::map<int, double> order_pmf_mean;  // averaged order posterior
    double mean_acceptance = 0.0;
    double mean_ess = 0.0;
};

/// Runs every replicate (data generation, hyperparameters, chain, analysis)
/// and aggregates. Replicates execute on up to `parallelism` workers; results
/// are identical to a serial run. Replicate r draws its data from RNG stream
/// 2r and its chain from stream 2r+1, both derived from master_seed.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Runs a single replicate (exposed for tests and incremental use).
ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t replicate_index);

/// Writes report.json (full fidelity), table.json, order_posterior.csv,
/// acf_replicate0.csv and per_replicate.csv into dir (created if missing).
void emit_report(const ExperimentReport& rep, const std::string& dir);

/// Reads report.json back; validates that the stored aggregates equal the
/// per-replicate means.
ExperimentReport parse_report(const std::string& dir);

std::string report_to_json(const ExperimentReport& rep);
ExperimentReport report_from_json(const std::string& text);

/// JSON config file support; keys present in the text overlay `base`,
/// unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace bsr
