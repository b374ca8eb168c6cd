#pragma once

#include "wtlab/construction.hpp"
#include "wtlab/operators.hpp"
#include "wtlab/young.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace wtlab {

// Full parameter set of a run; round-trips through JSON ("wtlab-config-v1")
// and is embedded verbatim in every report payload.
struct ExperimentConfig {
    std::string experiment; // subcommand name
    uint32_t k = 2;
    uint32_t depth = 3;
    std::string orientation = "all_left";
    std::string sides;   // for orientation = "explicit": 'L'/'R' per island
    std::string phi = "linear";
    double r = 1.5;
    bool use_rk = false; // r := r_k(k)
    double weight_scale = 1.0;
    std::vector<double> lambda_grid; // empty: derive from sampled |Hw|
    double lambda_lo_factor = 0.01;
    double lambda_hi_factor = 3.0;
    int lambda_count = 40;
    int resolution = 8;       // superlevel sampling per piece
    int plan_resolution = 16; // extrapolation quadrature cells per piece
    uint32_t margin = 1;      // sample plan excludes the deepest `margin` levels
    double tail_threshold = 1e-2;
    int64_t piece_budget = 2'000'000;
    int64_t sample_budget = 100'000;
    uint64_t seed = 0; // random-step-function property tests only
    std::vector<double> points;      // hilbert-eval
    std::string input_path;          // hilbert-eval: stepfn-v1 file instead of (k, depth)
    std::vector<std::string> phis;   // k-sweep
    std::vector<uint32_t> k_range;   // k-sweep
    std::string depth_rule = "auto"; // k-sweep: "auto" or "2:7,3:4,..."

    nlohmann::ordered_json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

// r_k = 1 + 1/(2*3^(k+1)+1); alpha_{r_k} = 1 + 3^-(k+1).
double r_k(uint32_t k);
double alpha_r(double r);
// Exponent of the A_1-type bound: 1 + 3^-(k+1).
double lemma22_exponent(uint32_t k);

struct PlanPoint {
    uint32_t level;
    size_t island;
    Rational3 x;
    double x_dbl;
    double w;
};

// Sample points inside the middle thirds of the islands of levels
// 1..depth-margin (margin clamped so depth 1 still yields points): triadic
// offsets 8/27, 40/81, 19/27 of the middle third (near-midpoint plus two
// interior flanks; exact midpoints have no finite base-3 expansion).
struct SamplePlan {
    uint32_t margin_effective = 0;
    std::vector<PlanPoint> points;
};

SamplePlan build_sample_plan(const GenerationTree& tree, uint32_t margin);

struct CsvRow {
    std::optional<uint32_t> k, depth;
    std::optional<double> tail_mass;
    std::string phi;
    std::optional<double> r_k, ratio_sup, lambda_star, growth_factor, lemma22_max_ratio,
        hw_min_ratio;
    double duration_ms = 0.0;
};

std::string csv_render(const std::vector<CsvRow>& rows);

struct ExperimentReport {
    nlohmann::ordered_json payload; // deterministic: bit-identical across reruns
    double duration_ms = 0.0;
    int threads_used = 1;
    std::vector<CsvRow> csv_rows;

    std::string payload_string() const { return payload.dump(2); }
    std::string envelope_string() const; // {"format","payload","meta"}
};

ExperimentReport run_lemma22_check(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport run_hw_lowerbound(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport weaktype_ratio(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport extrapolation_functional(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport k_sweep(const ExperimentConfig& cfg, int threads = 1);

// Non-sweep subcommands, routed through the same report machinery so that
// emit-config / from-config round-trips cover every subcommand.
ExperimentReport build_weight_report(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport verify_lemma21_report(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport hilbert_eval_report(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport growth_factor_report(const ExperimentConfig& cfg, int threads = 1);
ExperimentReport orientation_search_report(const ExperimentConfig& cfg, int threads = 1);

// Dispatch on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads = 1);

} // namespace wtlab
