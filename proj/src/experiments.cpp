#include "wtlab/experiments.hpp"

#include "wtlab/errors.hpp"
#include "wtlab/parallel.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace wtlab {

using nlohmann::json;
using nlohmann::ordered_json;

double r_k(uint32_t k) {
    double p = std::pow(3.0, static_cast<double>(k + 1));
    return 1.0 + 1.0 / (2.0 * p + 1.0);
}

double alpha_r(double r) {
    if (!(r > 1.0 && r < 2.0)) throw ParamError("alpha_r needs 1 < r < 2");
    return r / (2.0 - r);
}

double lemma22_exponent(uint32_t k) {
    return 1.0 + 1.0 / std::pow(3.0, static_cast<double>(k + 1));
}

// ---------------------------------------------------------------------------
// config serialization

ordered_json ExperimentConfig::to_json() const {
    ordered_json j;
    j["format"] = "wtlab-config-v1";
    j["experiment"] = experiment;
    j["k"] = k;
    j["depth"] = depth;
    j["orientation"] = orientation;
    j["sides"] = sides;
    j["phi"] = phi;
    j["r"] = r;
    j["use_rk"] = use_rk;
    j["weight_scale"] = weight_scale;
    j["lambda_grid"] = lambda_grid;
    j["lambda_lo_factor"] = lambda_lo_factor;
    j["lambda_hi_factor"] = lambda_hi_factor;
    j["lambda_count"] = lambda_count;
    j["resolution"] = resolution;
    j["plan_resolution"] = plan_resolution;
    j["margin"] = margin;
    j["tail_threshold"] = tail_threshold;
    j["piece_budget"] = piece_budget;
    j["sample_budget"] = sample_budget;
    j["seed"] = seed;
    j["points"] = points;
    j["input_path"] = input_path;
    j["phis"] = phis;
    j["k_range"] = k_range;
    j["depth_rule"] = depth_rule;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (j.contains("format") && j["format"] != "wtlab-config-v1")
        throw ParamError("expected format wtlab-config-v1");
    ExperimentConfig c;
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("experiment", c.experiment);
    get("k", c.k);
    get("depth", c.depth);
    get("orientation", c.orientation);
    get("sides", c.sides);
    get("phi", c.phi);
    get("r", c.r);
    get("use_rk", c.use_rk);
    get("weight_scale", c.weight_scale);
    get("lambda_grid", c.lambda_grid);
    get("lambda_lo_factor", c.lambda_lo_factor);
    get("lambda_hi_factor", c.lambda_hi_factor);
    get("lambda_count", c.lambda_count);
    get("resolution", c.resolution);
    get("plan_resolution", c.plan_resolution);
    get("margin", c.margin);
    get("tail_threshold", c.tail_threshold);
    get("piece_budget", c.piece_budget);
    get("sample_budget", c.sample_budget);
    get("seed", c.seed);
    get("points", c.points);
    get("input_path", c.input_path);
    get("phis", c.phis);
    get("k_range", c.k_range);
    get("depth_rule", c.depth_rule);
    return c;
}

// ---------------------------------------------------------------------------
// sample plan

namespace {

// Offsets within I^delta; 1/2 has no finite base-3 expansion, 40/81 stands in
// for the midpoint.
const std::array<Rational3, 3> kPlanOffsets = {
    Rational3(BigInt(8), 3), Rational3(BigInt(40), 4), Rational3(BigInt(19), 3)};

std::vector<Side> parse_sides(const std::string& s) {
    std::vector<Side> out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == 'L')
            out.push_back(Side::Left);
        else if (c == 'R')
            out.push_back(Side::Right);
        else
            throw ParamError(std::string("invalid character in sides string: '") + c + "'");
    }
    return out;
}

} // namespace

SamplePlan build_sample_plan(const GenerationTree& tree, uint32_t margin) {
    SamplePlan plan;
    plan.margin_effective = std::min(margin, tree.depth() - 1);
    const uint32_t top = tree.depth() - plan.margin_effective;
    for (uint32_t l = 1; l <= top; ++l) {
        double w = exact_alpha(tree.k(), l).convert_to<double>();
        const auto& gen = tree.level(l);
        for (size_t i = 0; i < gen.islands.size(); ++i) {
            TriadicInterval mid = gen.islands[i].interval.middle_third();
            Rational3 left = mid.left();
            Rational3 len = mid.length();
            for (const auto& q : kPlanOffsets) {
                Rational3 x = left + len * q;
                plan.points.push_back({l, i, x, x.to_double(), w});
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// shared run machinery

namespace {

struct Prepared {
    GenerationTree tree;
    StepFunction weight;
    double tail = 0.0;
    std::string policy_used;
    double orientation_score = std::numeric_limits<double>::quiet_NaN();
};

Prepared prepare(const ExperimentConfig& cfg, int threads) {
    ConstructionParams params;
    params.k = cfg.k;
    params.depth = cfg.depth;
    params.policy = orientation_from_string(cfg.orientation);
    params.piece_budget = cfg.piece_budget;
    params.sample_budget = cfg.sample_budget;
    params.threads = threads;
    std::string policy_used = cfg.orientation;
    double score = std::numeric_limits<double>::quiet_NaN();
    if (params.policy == OrientationPolicy::Explicit)
        params.explicit_sides = parse_sides(cfg.sides);
    if (params.policy == OrientationPolicy::GreedySearch) {
        auto found =
            orientation_search(cfg.k, cfg.depth, cfg.sample_budget, cfg.piece_budget, threads);
        params.policy = OrientationPolicy::Explicit;
        params.explicit_sides = std::move(found.sides);
        policy_used = "greedy_search(" + found.policy_used + ")";
        score = found.score;
    }
    GenerationTree tree = build_generations(params);
    auto built = build_weight(tree, cfg.k);
    StepFunction weight =
        cfg.weight_scale == 1.0 ? std::move(built.weight) : built.weight.scaled(cfg.weight_scale);
    Prepared prep{std::move(tree), std::move(weight), built.tail_mass, policy_used, score};
    return prep;
}

// Flag validation runs before any construction or tail refusal.
void validate_common(const ExperimentConfig& cfg, bool needs_phi = false) {
    orientation_from_string(cfg.orientation);
    if (cfg.orientation == "explicit") parse_sides(cfg.sides);
    if (needs_phi) YoungFunction::from_spec(cfg.phi);
    if (cfg.k < 2) throw ParamError("k must be >= 2");
    if (cfg.depth < 1) throw ParamError("depth must be >= 1");
    if (!(cfg.weight_scale > 0.0)) throw ParamError("weight scale must be positive");
    if (!(cfg.tail_threshold > 0.0)) throw ParamError("tail threshold must be positive");
}

void enforce_tail(const ExperimentConfig& cfg) {
    double tail = truncation_tail(cfg.k, cfg.depth);
    if (tail > cfg.tail_threshold) {
        uint32_t need = depth_for_tail(cfg.k, cfg.tail_threshold);
        std::ostringstream os;
        os << "truncation tail " << tail << " exceeds threshold " << cfg.tail_threshold
           << " for (k=" << cfg.k << ", L=" << cfg.depth << "); depth >= " << need
           << " required";
        throw TailRefusal(os.str());
    }
}

ordered_json base_payload(const ExperimentConfig& cfg, const Prepared* prep) {
    ordered_json p;
    p["experiment"] = cfg.experiment;
    p["hilbert_convention"] = kHilbertConvention;
    p["params"] = cfg.to_json();
    if (prep != nullptr) {
        p["tail_mass"] = prep->tail;
        p["orientation_resolved"] = ordered_json{{"policy", prep->policy_used},
                                                 {"sides", prep->tree.sides_string()}};
        if (!std::isnan(prep->orientation_score))
            p["orientation_resolved"]["score"] = prep->orientation_score;
    }
    return p;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

double fold_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double v : xs) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    return s + c;
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    size_t n = xs.size();
    if (n == 0) throw ParamError("median of empty sample set");
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string rational_to_key(const Rational3& x) {
    return x.to_string();
}

// Per-point Hilbert ratios shared by run_hw_lowerbound and orientation scoring.
std::vector<double> hw_ratios(const StepFunction& w, const SamplePlan& plan, int threads,
                              double weight_scale = 1.0) {
    std::vector<double> rho(plan.points.size());
    parallel_for(plan.points.size(), threads, [&](size_t i) {
        const auto& pt = plan.points[i];
        rho[i] = std::abs(hilbert_step(w, pt.x_dbl)) / (pt.w * weight_scale);
    });
    return rho;
}

} // namespace

// ---------------------------------------------------------------------------
// lemma 2.2 check

namespace {

ordered_json lemma22_payload(const ExperimentConfig& cfg, const Prepared& prep, int threads,
                             double* max_ratio_out) {
    const double r = lemma22_exponent(cfg.k);
    SamplePlan plan = build_sample_plan(prep.tree, cfg.margin);
    if (plan.points.empty()) throw ParamError("sample plan is empty; increase depth");

    std::vector<double> ratios(plan.points.size());
    parallel_for(plan.points.size(), threads, [&](size_t i) {
        const auto& pt = plan.points[i];
        ratios[i] = maximal(prep.weight, pt.x_dbl, r) / (pt.w * cfg.weight_scale);
    });

    ordered_json records = ordered_json::array();
    size_t argmax = 0;
    double maxr = -1.0, minr = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < ratios.size(); ++i) {
        const auto& pt = plan.points[i];
        records.push_back({{"level", pt.level},
                           {"island", pt.island},
                           {"x", rational_to_key(pt.x)},
                           {"w", pt.w * cfg.weight_scale},
                           {"ratio", ratios[i]}});
        if (ratios[i] > maxr) {
            maxr = ratios[i];
            argmax = i;
        }
        minr = std::min(minr, ratios[i]);
    }

    ordered_json p = base_payload(cfg, &prep);
    p["r"] = r;
    p["margin_effective"] = plan.margin_effective;
    p["records"] = std::move(records);
    p["summary"] = ordered_json{{"max_ratio", maxr},
                                {"min_ratio", minr},
                                {"argmax_level", plan.points[argmax].level},
                                {"argmax_x", rational_to_key(plan.points[argmax].x)},
                                {"samples", ratios.size()}};
    if (max_ratio_out != nullptr) *max_ratio_out = maxr;
    return p;
}

} // namespace

ExperimentReport run_lemma22_check(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "verify-lemma22";
    Timer t;
    validate_common(cfg);
    enforce_tail(cfg);
    Prepared prep = prepare(cfg, threads);
    ExperimentReport rep;
    double maxr = 0.0;
    rep.payload = lemma22_payload(cfg, prep, threads, &maxr);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.lemma22_max_ratio = maxr;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

// ---------------------------------------------------------------------------
// Hilbert lower-bound trend

namespace {

ordered_json hw_payload(const ExperimentConfig& cfg, const Prepared& prep, int threads,
                        double* min_ratio_out) {
    SamplePlan plan = build_sample_plan(prep.tree, cfg.margin);
    if (plan.points.empty()) throw ParamError("sample plan is empty; increase depth");
    std::vector<double> rho = hw_ratios(prep.weight, plan, threads, cfg.weight_scale);

    ordered_json records = ordered_json::array();
    std::vector<double> level_min(prep.tree.depth() + 1,
                                  std::numeric_limits<double>::infinity());
    double minr = std::numeric_limits<double>::infinity();
    size_t argmin = 0;
    for (size_t i = 0; i < rho.size(); ++i) {
        const auto& pt = plan.points[i];
        records.push_back({{"level", pt.level},
                           {"island", pt.island},
                           {"x", rational_to_key(pt.x)},
                           {"w", pt.w * cfg.weight_scale},
                           {"ratio", rho[i]}});
        level_min[pt.level] = std::min(level_min[pt.level], rho[i]);
        if (rho[i] < minr) {
            minr = rho[i];
            argmin = i;
        }
    }
    ordered_json per_level = ordered_json::array();
    for (uint32_t l = 1; l < level_min.size(); ++l)
        if (std::isfinite(level_min[l]))
            per_level.push_back({{"level", l}, {"min_ratio", level_min[l]}});

    ordered_json p = base_payload(cfg, &prep);
    p["margin_effective"] = plan.margin_effective;
    p["records"] = std::move(records);
    p["summary"] = ordered_json{{"min_ratio", minr},
                                {"argmin_level", plan.points[argmin].level},
                                {"argmin_x", rational_to_key(plan.points[argmin].x)},
                                {"per_level", std::move(per_level)},
                                {"samples", rho.size()}};
    p["notes"] = ordered_json::array(
        {"finite-k trend datum: the k/3 lower bound for this construction applies to the "
         "untruncated weight with k > 3000 and a specific orientation; small-k runs report "
         "the observed ratio only",
         "ratios depend on the Hilbert transform convention recorded in this header"});
    if (min_ratio_out != nullptr) *min_ratio_out = minr;
    return p;
}

} // namespace

ExperimentReport run_hw_lowerbound(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "hw-lowerbound";
    Timer t;
    validate_common(cfg);
    enforce_tail(cfg);
    Prepared prep = prepare(cfg, threads);
    ExperimentReport rep;
    double minr = 0.0;
    rep.payload = hw_payload(cfg, prep, threads, &minr);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.hw_min_ratio = minr;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

// ---------------------------------------------------------------------------
// weak-type ratio

namespace {

std::vector<double> derive_lambda_grid(const ExperimentConfig& cfg,
                                       const std::vector<double>& habs) {
    if (!cfg.lambda_grid.empty()) {
        for (double l : cfg.lambda_grid)
            if (!(l > 0.0)) throw ParamError("lambda grid entries must be positive");
        return cfg.lambda_grid;
    }
    if (cfg.lambda_count < 2) throw ParamError("lambda_count must be >= 2");
    double med = median_of(habs);
    double mx = *std::max_element(habs.begin(), habs.end());
    double lo = cfg.lambda_lo_factor * med;
    double hi = cfg.lambda_hi_factor * mx;
    if (!(lo > 0.0) || !(hi > lo))
        throw ParamError("degenerate lambda grid; supply --lambda-grid explicitly");
    std::vector<double> grid(cfg.lambda_count);
    double lr = std::log(hi / lo);
    for (int i = 0; i < cfg.lambda_count; ++i)
        grid[i] = lo * std::exp(lr * i / (cfg.lambda_count - 1));
    return grid;
}

struct WeaktypeOutcome {
    double ratio_sup = 0.0;
    double lambda_star = 0.0;
};

ordered_json weaktype_payload(const ExperimentConfig& cfg, const Prepared& prep,
                              const YoungFunction& phi, int threads, WeaktypeOutcome* out) {
    SamplePlan plan = build_sample_plan(prep.tree, cfg.margin);
    if (plan.points.empty()) throw ParamError("sample plan is empty; increase depth");
    std::vector<double> habs(plan.points.size());
    parallel_for(plan.points.size(), threads, [&](size_t i) {
        habs[i] = std::abs(hilbert_step(prep.weight, plan.points[i].x_dbl));
    });
    std::vector<double> grid = derive_lambda_grid(cfg, habs);

    SuperlevelScanner scanner(prep.weight, prep.weight, cfg.resolution, threads);
    std::vector<double> numerators(grid.size());
    parallel_for(grid.size(), threads,
                 [&](size_t i) { numerators[i] = grid[i] * scanner.measure(grid[i]); });

    // Denominator: midpoint rule in each piece, with a split-in-3 refinement
    // and the Richardson-style discrepancy between the two.
    const auto& T = prep.weight.breakpoints_dbl();
    const auto& V = prep.weight.values();
    struct DenomNode {
        double x, len, v;
        int pass; // 0 = coarse, 1 = fine
    };
    std::vector<DenomNode> nodes;
    for (size_t i = 0; i < V.size(); ++i) {
        if (V[i] <= 0.0) continue;
        double a = T[i], b = T[i + 1], len = b - a;
        nodes.push_back({0.5 * (a + b), len, V[i], 0});
        for (int j = 0; j < 3; ++j)
            nodes.push_back({a + len * (2 * j + 1) / 6.0, len / 3.0, V[i], 1});
    }
    std::vector<double> mphi(nodes.size());
    parallel_for(nodes.size(), threads,
                 [&](size_t i) { mphi[i] = orlicz_maximal(prep.weight, nodes[i].x, phi); });
    std::vector<double> coarse_terms, fine_terms;
    for (size_t i = 0; i < nodes.size(); ++i) {
        double term = nodes[i].v * nodes[i].len * mphi[i];
        (nodes[i].pass == 0 ? coarse_terms : fine_terms).push_back(term);
    }
    double d_coarse = fold_sum(coarse_terms);
    double d_fine = fold_sum(fine_terms);
    double d_disc = std::abs(d_fine - d_coarse) / std::max(d_fine, 1e-300);

    ordered_json records = ordered_json::array();
    double sup = -1.0;
    size_t argmax = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        double ratio = numerators[i] / d_fine;
        records.push_back({{"lambda", grid[i]},
                           {"superlevel_mass", numerators[i] / grid[i]},
                           {"numerator", numerators[i]},
                           {"ratio", ratio}});
        if (ratio > sup) {
            sup = ratio;
            argmax = i;
        }
    }
    bool boundary = argmax == 0 || argmax + 1 == grid.size();

    ordered_json p = base_payload(cfg, &prep);
    p["phi"] = phi.spec();
    p["margin_effective"] = plan.margin_effective;
    p["lambda_grid_used"] = grid;
    p["records"] = std::move(records);
    p["summary"] = ordered_json{{"ratio_sup", sup},
                                {"lambda_star", grid[argmax]},
                                {"argmax_index", argmax},
                                {"lambda_grid_boundary_hit", boundary},
                                {"denominator", d_fine},
                                {"denominator_coarse", d_coarse},
                                {"denominator_discrepancy", d_disc},
                                {"hw_sample_median", median_of(habs)},
                                {"hw_sample_max",
                                 *std::max_element(habs.begin(), habs.end())}};
    if (boundary)
        p["summary"]["grid_warning"] =
            "ratio supremum attained at a lambda-grid boundary; widen the grid";
    if (out != nullptr) *out = {sup, grid[argmax]};
    return p;
}

} // namespace

ExperimentReport weaktype_ratio(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "weaktype-ratio";
    Timer t;
    validate_common(cfg, true);
    enforce_tail(cfg);
    Prepared prep = prepare(cfg, threads);
    YoungFunction phi = YoungFunction::from_spec(cfg.phi);
    ExperimentReport rep;
    WeaktypeOutcome out;
    rep.payload = weaktype_payload(cfg, prep, phi, threads, &out);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.phi = phi.spec();
    row.r_k = r_k(cfg.k);
    row.ratio_sup = out.ratio_sup;
    row.lambda_star = out.lambda_star;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

// ---------------------------------------------------------------------------
// extrapolation functional

namespace {

struct QuadCell {
    double x, weight, v; // two-point Gauss node and its quadrature weight
};

// plan_resolution uniform cells per piece, the first and last cell subdivided
// geometrically toward the endpoint (the |Hw| log singularity); two-point
// Gauss-Legendre within every cell. Node placement depends only on the
// breakpoint geometry, never on the values.
std::vector<QuadCell> quadrature_cells(const StepFunction& w, int per_piece) {
    if (per_piece < 2) throw ParamError("plan_resolution must be >= 2");
    const double gauss_off = 0.5 / std::sqrt(3.0);
    const auto& T = w.breakpoints_dbl();
    const auto& V = w.values();
    std::vector<QuadCell> cells;
    auto emit = [&](double lo, double hi, double v) {
        double mid = 0.5 * (lo + hi), half = hi - lo;
        cells.push_back({mid - gauss_off * half, 0.5 * half, v});
        cells.push_back({mid + gauss_off * half, 0.5 * half, v});
    };
    auto emit_split = [&](double lo, double hi, double v) {
        for (int s = 0; s < 4; ++s)
            emit(lo + (hi - lo) * s / 4.0, lo + (hi - lo) * (s + 1) / 4.0, v);
    };
    for (size_t i = 0; i < V.size(); ++i) {
        if (V[i] <= 0.0) continue;
        double a = T[i], b = T[i + 1], len = b - a;
        double h = len / per_piece;
        // geometric ladders into both endpoints
        for (double span = h; span > len * 1e-13; span *= 0.5)
            emit_split(a + span * 0.5, a + span, V[i]);
        for (int j = 1; j + 1 < per_piece; ++j) emit(a + h * j, a + h * (j + 1), V[i]);
        for (double span = h; span > len * 1e-13; span *= 0.5)
            emit_split(b - span, b - span * 0.5, V[i]);
    }
    return cells;
}

ordered_json extrapolation_payload(const ExperimentConfig& cfg, const Prepared& prep, double r,
                                   int threads) {
    const double ar = alpha_r(r);
    std::vector<QuadCell> cells = quadrature_cells(prep.weight, cfg.plan_resolution);
    std::vector<double> terms(cells.size());
    parallel_for(cells.size(), threads, [&](size_t i) {
        const auto& c = cells[i];
        double h = hilbert_step(prep.weight, c.x);
        double m = maximal(prep.weight, c.x, ar);
        double integrand = (h / std::pow(m, ar / r));
        integrand *= integrand;
        terms[i] = integrand * std::pow(c.v, ar) * c.weight;
    });
    double functional = fold_sum(terms);
    double mass = prep.weight.mass();

    ordered_json p = base_payload(cfg, &prep);
    p["r"] = r;
    p["alpha_r"] = ar;
    p["summary"] = ordered_json{{"functional", functional},
                                {"functional_over_mass", functional / mass},
                                {"mass", mass},
                                {"quadrature_cells", cells.size()}};
    double rk = r_k(cfg.k);
    if (std::abs(r - rk) <= 1e-12 * rk) {
        double comparator =
            cfg.k * cfg.k / std::pow(27.0, 1.0 + 2.0 / (2.0 - r)) * mass;
        p["summary"]["paper_regime_comparator"] = comparator;
        p["summary"]["comparator_note"] =
            "k^2/27^(1+2/(2-r_k)) * mass; indicative only at searched orientations and "
            "finite depth";
    }
    return p;
}

} // namespace

ExperimentReport extrapolation_functional(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "extrapolation";
    Timer t;
    validate_common(cfg);
    enforce_tail(cfg);
    double r = cfg.use_rk ? r_k(cfg.k) : cfg.r;
    if (!(r > 1.0 && r < 2.0)) throw ParamError("extrapolation requires 1 < r < 2");
    Prepared prep = prepare(cfg, threads);
    ExperimentReport rep;
    rep.payload = extrapolation_payload(cfg, prep, r, threads);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.r_k = r_k(cfg.k);
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

// ---------------------------------------------------------------------------
// k-sweep

namespace {

std::map<uint32_t, uint32_t> parse_depth_rule(const std::string& rule) {
    std::map<uint32_t, uint32_t> out;
    std::stringstream ss(rule);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto pos = item.find(':');
        if (pos == std::string::npos)
            throw ParamError("depth rule entries must look like k:L, got '" + item + "'");
        try {
            out[static_cast<uint32_t>(std::stoul(item.substr(0, pos)))] =
                static_cast<uint32_t>(std::stoul(item.substr(pos + 1)));
        } catch (const std::exception&) {
            throw ParamError("invalid depth rule entry '" + item + "'");
        }
    }
    return out;
}

// Largest L with the island count within budget and the tail within
// threshold; 0 when no such L exists.
uint32_t auto_depth(uint32_t k, int64_t piece_budget, double tail_threshold) {
    uint32_t best = 0;
    for (uint32_t L = 1; L <= 64; ++L) {
        if (island_count(k, L) > piece_budget) break;
        if (truncation_tail(k, L) <= tail_threshold) best = L;
    }
    return best;
}

} // namespace

ExperimentReport k_sweep(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "k-sweep";
    Timer t;
    if (cfg.k_range.empty()) throw ParamError("k-sweep requires a nonempty k range");
    std::vector<std::string> phis = cfg.phis;
    if (phis.empty()) phis = {"linear", "power:2"};
    std::map<uint32_t, uint32_t> explicit_depths;
    if (cfg.depth_rule != "auto") explicit_depths = parse_depth_rule(cfg.depth_rule);

    ordered_json per_k = ordered_json::array();
    ordered_json skipped = ordered_json::array();
    ExperimentReport rep;

    for (uint32_t k : cfg.k_range) {
        Timer cell_timer;
        uint32_t L = 0;
        if (cfg.depth_rule == "auto") {
            L = auto_depth(k, cfg.piece_budget, cfg.tail_threshold);
            if (L == 0) {
                skipped.push_back(
                    {{"k", k},
                     {"reason", "no depth satisfies both the piece budget and the tail "
                                "threshold"}});
                continue;
            }
        } else {
            auto it = explicit_depths.find(k);
            if (it == explicit_depths.end()) {
                skipped.push_back({{"k", k}, {"reason", "no depth assigned by the rule"}});
                continue;
            }
            L = it->second;
            if (island_count(k, L) > cfg.piece_budget) {
                skipped.push_back({{"k", k}, {"reason", "piece budget exceeded"}});
                continue;
            }
            if (truncation_tail(k, L) > cfg.tail_threshold) {
                skipped.push_back({{"k", k}, {"reason", "tail threshold exceeded"}});
                continue;
            }
        }

        ExperimentConfig sub = cfg;
        sub.k = k;
        sub.depth = L;
        Prepared prep = prepare(sub, threads);

        double lemma22_max = 0.0, hw_min = 0.0;
        ExperimentConfig sub22 = sub;
        sub22.experiment = "verify-lemma22";
        ordered_json lemma22_p = lemma22_payload(sub22, prep, threads, &lemma22_max);
        ExperimentConfig subhw = sub;
        subhw.experiment = "hw-lowerbound";
        ordered_json hw_p = hw_payload(subhw, prep, threads, &hw_min);

        ordered_json cells = ordered_json::array();
        double rk = r_k(k);
        for (const auto& phi_spec : phis) {
            YoungFunction phi = YoungFunction::from_spec(phi_spec);
            ExperimentConfig subwt = sub;
            subwt.experiment = "weaktype-ratio";
            subwt.phi = phi_spec;
            WeaktypeOutcome out;
            ordered_json wt_p = weaktype_payload(subwt, prep, phi, threads, &out);
            // growth_factor diverges when Phi grows faster than t^{r_k}
            std::optional<double> gf;
            std::string gf_note;
            try {
                gf = growth_factor(phi, rk);
            } catch (const std::domain_error& e) {
                gf_note = e.what();
            }
            ordered_json cell{{"phi", phi.spec()},
                              {"ratio_sup", out.ratio_sup},
                              {"lambda_star", out.lambda_star},
                              {"weaktype", std::move(wt_p)}};
            if (gf)
                cell["growth_factor"] = *gf;
            else
                cell["growth_factor_undefined"] = gf_note;
            cells.push_back(std::move(cell));
            CsvRow row;
            row.k = k;
            row.depth = L;
            row.tail_mass = prep.tail;
            row.phi = phi.spec();
            row.r_k = rk;
            row.ratio_sup = out.ratio_sup;
            row.lambda_star = out.lambda_star;
            if (gf) row.growth_factor = *gf;
            row.lemma22_max_ratio = lemma22_max;
            row.hw_min_ratio = hw_min;
            row.duration_ms = cell_timer.ms();
            rep.csv_rows.push_back(row);
        }
        per_k.push_back({{"k", k},
                         {"depth", L},
                         {"tail_mass", prep.tail},
                         {"r_k", rk},
                         {"lemma22_max_ratio", lemma22_max},
                         {"hw_min_ratio", hw_min},
                         {"lemma22", std::move(lemma22_p)},
                         {"hw_lowerbound", std::move(hw_p)},
                         {"cells", std::move(cells)}});
    }

    ordered_json p;
    p["experiment"] = cfg.experiment;
    p["hilbert_convention"] = kHilbertConvention;
    p["params"] = cfg.to_json();
    p["per_k"] = std::move(per_k);
    p["skipped"] = std::move(skipped);
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    return rep;
}

// ---------------------------------------------------------------------------
// non-sweep subcommands

ExperimentReport build_weight_report(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "build-weight";
    Timer t;
    validate_common(cfg);
    Prepared prep = prepare(cfg, threads);
    ExperimentReport rep;
    ordered_json p = base_payload(cfg, &prep);
    p["weight"] = nlohmann::ordered_json::parse(prep.weight.to_json());
    p["pieces"] = prep.weight.nonzero_piece_count();
    p["mass"] = prep.weight.mass();
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

ExperimentReport verify_lemma21_report(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "verify-lemma21";
    Timer t;
    validate_common(cfg);
    Prepared prep = prepare(cfg, threads);
    MassBalanceReport mb = verify_mass_balance(prep.tree, prep.weight);
    double mass = prep.weight.mass() / cfg.weight_scale;
    BigRational exact_mass = exact_total_mass(cfg.k, cfg.depth);

    ExperimentReport rep;
    ordered_json p = base_payload(cfg, &prep);
    p["summary"] = ordered_json{
        {"mass", mass},
        {"tail_mass", prep.tail},
        {"mass_plus_tail_minus_one", mass + prep.tail - 1.0},
        {"exact_mass", exact_mass.convert_to<double>()},
        {"exact_mass_rational", boost::multiprecision::numerator(exact_mass).str() + "/" +
                                    boost::multiprecision::denominator(exact_mass).str()},
        {"max_rel_discrepancy", mb.max_rel_discrepancy},
        {"max_recursion_residual", mb.max_recursion_residual},
        {"max_closed_form_discrepancy", mb.max_closed_form_discrepancy},
        {"max_transfer_discrepancy", mb.max_transfer_discrepancy},
        {"checks", mb.checks}};
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.tail_mass = prep.tail;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

ExperimentReport hilbert_eval_report(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "hilbert-eval";
    Timer t;
    if (cfg.points.empty()) throw ParamError("hilbert-eval needs at least one point");

    ExperimentReport rep;
    ordered_json p;
    if (!cfg.input_path.empty()) {
        std::ifstream in(cfg.input_path);
        if (!in) throw ParamError("cannot open step function file: " + cfg.input_path);
        std::stringstream buf;
        buf << in.rdbuf();
        StepFunction f = StepFunction::from_json(buf.str());
        p = base_payload(cfg, nullptr);
        std::vector<double> hs(cfg.points.size());
        parallel_for(cfg.points.size(), threads,
                     [&](size_t i) { hs[i] = hilbert_step(f, cfg.points[i]); });
        ordered_json records = ordered_json::array();
        for (size_t i = 0; i < hs.size(); ++i)
            records.push_back({{"x", cfg.points[i]}, {"hf", hs[i]}});
        p["records"] = std::move(records);
    } else {
        Prepared prep = prepare(cfg, threads);
        p = base_payload(cfg, &prep);
        std::vector<double> hs(cfg.points.size());
        parallel_for(cfg.points.size(), threads,
                     [&](size_t i) { hs[i] = hilbert_step(prep.weight, cfg.points[i]); });
        ordered_json records = ordered_json::array();
        for (size_t i = 0; i < hs.size(); ++i)
            records.push_back({{"x", cfg.points[i]}, {"hf", hs[i]}});
        p["records"] = std::move(records);
    }
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    return rep;
}

ExperimentReport growth_factor_report(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "growth-factor";
    Timer t;
    YoungFunction phi = YoungFunction::from_spec(cfg.phi);
    double r = cfg.use_rk ? r_k(cfg.k) : cfg.r;
    SupScanResult res = growth_factor_detail(phi, r);

    ExperimentReport rep;
    ordered_json p;
    p["experiment"] = cfg.experiment;
    p["params"] = cfg.to_json();
    p["phi"] = phi.spec();
    p["r"] = r;
    p["summary"] = ordered_json{{"growth_factor", res.value}, {"log_t_star", res.log_t_star}};
    if (res.log_t_star < 700.0) p["summary"]["t_star"] = std::exp(res.log_t_star);
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.phi = phi.spec();
    if (cfg.use_rk) {
        row.k = cfg.k;
        row.r_k = r;
    }
    row.growth_factor = res.value;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

ExperimentReport orientation_search_report(const ExperimentConfig& cfg_in, int threads) {
    ExperimentConfig cfg = cfg_in;
    cfg.experiment = "orientation-search";
    Timer t;
    OrientationSearchResult res =
        orientation_search(cfg.k, cfg.depth, cfg.sample_budget, cfg.piece_budget, threads);
    std::string sides;
    sides.reserve(res.sides.size());
    for (Side s : res.sides) sides.push_back(s == Side::Left ? 'L' : 'R');

    ExperimentReport rep;
    ordered_json p;
    p["experiment"] = cfg.experiment;
    p["hilbert_convention"] = kHilbertConvention;
    p["params"] = cfg.to_json();
    p["summary"] = ordered_json{{"sides", sides},
                                {"score", res.score},
                                {"policy_used", res.policy_used},
                                {"islands", res.sides.size()}};
    rep.payload = std::move(p);
    rep.duration_ms = t.ms();
    rep.threads_used = threads;
    CsvRow row;
    row.k = cfg.k;
    row.depth = cfg.depth;
    row.hw_min_ratio = res.score;
    row.duration_ms = rep.duration_ms;
    rep.csv_rows.push_back(row);
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
    const std::string& e = cfg.experiment;
    if (e == "verify-lemma22") return run_lemma22_check(cfg, threads);
    if (e == "hw-lowerbound") return run_hw_lowerbound(cfg, threads);
    if (e == "weaktype-ratio") return weaktype_ratio(cfg, threads);
    if (e == "extrapolation") return extrapolation_functional(cfg, threads);
    if (e == "k-sweep") return k_sweep(cfg, threads);
    if (e == "build-weight") return build_weight_report(cfg, threads);
    if (e == "verify-lemma21") return verify_lemma21_report(cfg, threads);
    if (e == "hilbert-eval") return hilbert_eval_report(cfg, threads);
    if (e == "growth-factor") return growth_factor_report(cfg, threads);
    if (e == "orientation-search") return orientation_search_report(cfg, threads);
    throw ParamError("unknown experiment: '" + e + "'");
}

// ---------------------------------------------------------------------------
// serialization

std::string ExperimentReport::envelope_string() const {
    ordered_json j;
    j["format"] = "wtlab-report-v1";
    j["payload"] = payload;
    j["meta"] = ordered_json{{"duration_ms", duration_ms}, {"threads", threads_used}};
    return j.dump(2);
}

namespace {

std::string csv_num(double v) {
    return ordered_json(v).dump();
}

} // namespace

std::string csv_render(const std::vector<CsvRow>& rows) {
    std::string out =
        "k,L,tail_mass,phi,r_k,ratio_sup,lambda_star,growth_factor,lemma22_max_ratio,"
        "hw_min_ratio,duration_ms\n";
    for (const auto& r : rows) {
        auto opt_u = [](const std::optional<uint32_t>& v) {
            return v ? std::to_string(*v) : std::string();
        };
        auto opt_d = [](const std::optional<double>& v) {
            return v ? csv_num(*v) : std::string();
        };
        out += opt_u(r.k) + "," + opt_u(r.depth) + "," + opt_d(r.tail_mass) + "," + r.phi +
               "," + opt_d(r.r_k) + "," + opt_d(r.ratio_sup) + "," + opt_d(r.lambda_star) +
               "," + opt_d(r.growth_factor) + "," + opt_d(r.lemma22_max_ratio) + "," +
               opt_d(r.hw_min_ratio) + "," + csv_num(r.duration_ms) + "\n";
    }
    return out;
}

} // namespace wtlab
