#include "wtlab/construction.hpp"
#include "wtlab/errors.hpp"
#include "wtlab/experiments.hpp"
#include "wtlab/operators.hpp"
#include "wtlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wtlab {

namespace {

struct GreedyState {
    // Running Hilbert transform of the partial weight at every retained
    // sample point; island placements are committed level by level.
    std::vector<double> xs, ws, hs;
    size_t stride = 1;
    size_t next_global = 0; // global sample counter for the stride filter
    std::vector<std::pair<double, double>> placed; // (a, b) with value below
    std::vector<double> placed_value;

    void add_contribution(double a, double b, double v, int threads) {
        parallel_for(xs.size(), threads, [&](size_t i) {
            hs[i] += v * (std::log(std::abs(xs[i] - a)) - std::log(std::abs(xs[i] - b)));
        });
    }

    double trial_min(double a, double b, double v,
                     const std::vector<double>& own_xs, double own_w,
                     const std::vector<double>& own_hs) const {
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < xs.size(); ++i) {
            double h = hs[i] + v * (std::log(std::abs(xs[i] - a)) - std::log(std::abs(xs[i] - b)));
            m = std::min(m, std::abs(h) / ws[i]);
        }
        for (size_t i = 0; i < own_xs.size(); ++i)
            m = std::min(m, std::abs(own_hs[i]) / own_w);
        return m;
    }

    // Hilbert transform of the partial weight plus the candidate island at
    // the candidate's own sample points.
    std::vector<double> own_values(const std::vector<double>& own_xs, double a, double b,
                                   double v) const {
        std::vector<double> out(own_xs.size(), 0.0);
        for (size_t i = 0; i < own_xs.size(); ++i) {
            double x = own_xs[i];
            double h = v * (std::log(std::abs(x - a)) - std::log(std::abs(x - b)));
            for (size_t p = 0; p < placed.size(); ++p)
                h += placed_value[p] * (std::log(std::abs(x - placed[p].first)) -
                                        std::log(std::abs(x - placed[p].second)));
            out[i] = h;
        }
        return out;
    }
};

std::vector<double> island_sample_xs(const TriadicInterval& island) {
    static const std::array<Rational3, 3> offsets = {
        Rational3(BigInt(8), 3), Rational3(BigInt(40), 4), Rational3(BigInt(19), 3)};
    TriadicInterval mid = island.middle_third();
    Rational3 left = mid.left();
    Rational3 len = mid.length();
    std::vector<double> xs;
    xs.reserve(3);
    for (const auto& q : offsets) xs.push_back((left + len * q).to_double());
    return xs;
}

double final_score(uint32_t k, uint32_t depth, const ConstructionParams& base,
                   OrientationPolicy policy, const std::vector<Side>& sides, int threads,
                   std::vector<Side>* sides_out) {
    ConstructionParams params = base;
    params.policy = policy;
    params.explicit_sides = sides;
    GenerationTree tree = build_generations(params);
    auto built = build_weight(tree, k);
    SamplePlan plan = build_sample_plan(tree, 1);
    double m = std::numeric_limits<double>::infinity();
    std::vector<double> rho(plan.points.size());
    parallel_for(plan.points.size(), threads, [&](size_t i) {
        rho[i] = std::abs(hilbert_step(built.weight, plan.points[i].x_dbl)) / plan.points[i].w;
    });
    for (double v : rho) m = std::min(m, v);
    if (sides_out != nullptr) *sides_out = tree.sides_flat();
    (void)depth;
    return m;
}

} // namespace

OrientationSearchResult orientation_search(uint32_t k, uint32_t depth, int64_t sample_budget,
                                           int64_t piece_budget, int threads) {
    ConstructionParams base;
    base.k = k;
    base.depth = depth;
    base.piece_budget = piece_budget;
    base.validate();
    if (sample_budget < 3) throw ParamError("sample budget must allow at least one island");

    // J-blocks do not depend on the side choices; reuse the all-left tree for
    // the block geometry.
    ConstructionParams probe = base;
    probe.policy = OrientationPolicy::AllLeft;
    GenerationTree blocks = build_generations(probe);

    std::vector<double> alpha(depth + 1, 0.0);
    for (uint32_t l = 1; l <= depth; ++l) alpha[l] = exact_alpha(k, l).convert_to<double>();

    BigInt total_islands = island_count(k, depth);
    size_t stride = 1;
    if (total_islands * 3 > sample_budget) {
        BigInt s = (total_islands * 3 + sample_budget - 1) / sample_budget;
        stride = s.convert_to<size_t>();
    }

    GreedyState state;
    state.stride = stride;
    std::vector<Side> greedy_sides;
    greedy_sides.reserve(blocks.island_total());

    for (uint32_t l = 1; l <= depth; ++l) {
        const auto& gen = blocks.level(l);
        double v = alpha[l];
        for (const auto& J : gen.blocks) {
            TriadicInterval left_isl = J.adjacent_scaled(Side::Left, k);
            TriadicInterval right_isl = J.adjacent_scaled(Side::Right, k);

            auto eval_side = [&](const TriadicInterval& isl) {
                double a = isl.left().to_double();
                double b = isl.right().to_double();
                std::vector<double> own_all = island_sample_xs(isl);
                std::vector<double> own;
                for (size_t i = 0; i < own_all.size(); ++i)
                    if ((state.next_global + i) % state.stride == 0) own.push_back(own_all[i]);
                std::vector<double> own_hs = state.own_values(own, a, b, v);
                return state.trial_min(a, b, v, own, v, own_hs);
            };

            double score_left = eval_side(left_isl);
            double score_right = eval_side(right_isl);
            Side chosen = score_left >= score_right ? Side::Left : Side::Right;
            greedy_sides.push_back(chosen);

            const TriadicInterval& isl = chosen == Side::Left ? left_isl : right_isl;
            double a = isl.left().to_double();
            double b = isl.right().to_double();
            state.add_contribution(a, b, v, threads);
            std::vector<double> own_all = island_sample_xs(isl);
            std::vector<double> own;
            for (size_t i = 0; i < own_all.size(); ++i)
                if ((state.next_global + i) % state.stride == 0) own.push_back(own_all[i]);
            std::vector<double> own_hs = state.own_values(own, a, b, v);
            state.placed.emplace_back(a, b);
            state.placed_value.push_back(v);
            for (size_t i = 0; i < own.size(); ++i) {
                state.xs.push_back(own[i]);
                state.ws.push_back(v);
                state.hs.push_back(own_hs[i]);
            }
            state.next_global += own_all.size();
        }
    }

    // The greedy objective is myopic; keep whichever of the greedy result and
    // the fixed policies scores best on the final weight.
    OrientationSearchResult best;
    best.score = -1.0;
    struct Candidate {
        OrientationPolicy policy;
        const char* name;
    };
    const Candidate fixed[] = {{OrientationPolicy::Explicit, "greedy"},
                               {OrientationPolicy::AllLeft, "all_left"},
                               {OrientationPolicy::AllRight, "all_right"},
                               {OrientationPolicy::AlternateByLevel, "alternate_by_level"}};
    for (const auto& cand : fixed) {
        std::vector<Side> sides_out;
        double score = final_score(k, depth, base, cand.policy,
                                   cand.policy == OrientationPolicy::Explicit ? greedy_sides
                                                                              : std::vector<Side>{},
                                   threads, &sides_out);
        if (score > best.score) {
            best.score = score;
            best.sides = std::move(sides_out);
            best.policy_used = cand.name;
        }
    }
    return best;
}

} // namespace wtlab
