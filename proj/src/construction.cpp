#include "wtlab/construction.hpp"

#include "wtlab/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace wtlab {

OrientationPolicy orientation_from_string(const std::string& s) {
    if (s == "all_left") return OrientationPolicy::AllLeft;
    if (s == "all_right") return OrientationPolicy::AllRight;
    if (s == "alternate_by_level") return OrientationPolicy::AlternateByLevel;
    if (s == "explicit") return OrientationPolicy::Explicit;
    if (s == "greedy_search") return OrientationPolicy::GreedySearch;
    throw ParamError("unknown orientation policy: '" + s + "'");
}

std::string orientation_to_string(OrientationPolicy p) {
    switch (p) {
        case OrientationPolicy::AllLeft: return "all_left";
        case OrientationPolicy::AllRight: return "all_right";
        case OrientationPolicy::AlternateByLevel: return "alternate_by_level";
        case OrientationPolicy::Explicit: return "explicit";
        case OrientationPolicy::GreedySearch: return "greedy_search";
    }
    return "all_left";
}

BigInt island_count(uint32_t k, uint32_t depth) {
    BigInt total = 0;
    for (uint32_t l = 1; l <= depth; ++l) total += pow3((k - 1) * (l - 1));
    return total;
}

void ConstructionParams::validate() const {
    if (k < 2) throw ParamError("construction requires k >= 2");
    if (depth < 1) throw ParamError("construction requires depth >= 1");
    if (piece_budget < 1) throw ParamError("piece budget must be positive");
    BigInt n = island_count(k, depth);
    if (n > piece_budget)
        throw CapacityError("piece budget exceeded for (k=" + std::to_string(k) +
                            ", L=" + std::to_string(depth) + "): " + n.str() + " islands > " +
                            std::to_string(piece_budget));
    if (policy == OrientationPolicy::Explicit &&
        BigInt(static_cast<long long>(explicit_sides.size())) != n)
        throw ParamError("explicit side list has " + std::to_string(explicit_sides.size()) +
                         " entries, construction needs " + n.str());
}

GenerationTree::GenerationTree(uint32_t k, std::vector<Generation> levels)
    : k_(k), levels_(std::move(levels)) {
    if (levels_.empty()) throw ParamError("generation tree needs at least one level");
}

size_t GenerationTree::island_total() const {
    size_t n = 0;
    for (const auto& g : levels_) n += g.islands.size();
    return n;
}

std::vector<Side> GenerationTree::sides_flat() const {
    std::vector<Side> out;
    out.reserve(island_total());
    for (const auto& g : levels_)
        for (const auto& isl : g.islands) out.push_back(isl.side);
    return out;
}

std::string GenerationTree::sides_string() const {
    std::string out;
    out.reserve(island_total());
    for (const auto& g : levels_)
        for (const auto& isl : g.islands) out.push_back(isl.side == Side::Left ? 'L' : 'R');
    return out;
}

namespace {

Side policy_side(OrientationPolicy policy, const std::vector<Side>& explicit_sides,
                 uint32_t level, size_t flat_index) {
    switch (policy) {
        case OrientationPolicy::AllLeft: return Side::Left;
        case OrientationPolicy::AllRight: return Side::Right;
        case OrientationPolicy::AlternateByLevel:
            return level % 2 == 1 ? Side::Left : Side::Right;
        case OrientationPolicy::Explicit: return explicit_sides.at(flat_index);
        case OrientationPolicy::GreedySearch:
            throw InvariantError("greedy policy must be resolved before build_generations");
    }
    return Side::Left;
}

} // namespace

GenerationTree build_generations(const ConstructionParams& params) {
    params.validate();
    std::vector<Side> sides = params.explicit_sides;
    OrientationPolicy policy = params.policy;
    if (policy == OrientationPolicy::GreedySearch) {
        auto found = orientation_search(params.k, params.depth, params.sample_budget,
                                        params.piece_budget, params.threads);
        sides = std::move(found.sides);
        policy = OrientationPolicy::Explicit;
    }

    const uint32_t k = params.k;
    std::vector<Generation> levels;
    levels.reserve(params.depth);
    size_t flat = 0;

    Generation root;
    root.blocks.emplace_back(0u, BigInt(0));
    root.islands.push_back(
        {root.blocks[0].adjacent_scaled(policy_side(policy, sides, 1, flat), k), 0,
         policy_side(policy, sides, 1, flat)});
    ++flat;
    levels.push_back(std::move(root));

    const BigInt fan = pow3(k - 1);
    for (uint32_t l = 2; l <= params.depth; ++l) {
        Generation gen;
        const auto& prev = levels[l - 2];
        for (const auto& J : prev.blocks) {
            // Partition J^delta into 3^(k-1) triadic blocks of equal length.
            TriadicInterval mid = J.middle_third();
            BigInt base = mid.index() * fan;
            for (BigInt m = 0; m < fan; ++m)
                gen.blocks.emplace_back(mid.level() + (k - 1), base + m);
        }
        gen.islands.reserve(gen.blocks.size());
        for (size_t j = 0; j < gen.blocks.size(); ++j) {
            Side s = policy_side(policy, sides, l, flat);
            gen.islands.push_back({gen.blocks[j].adjacent_scaled(s, k), j, s});
            ++flat;
        }
        levels.push_back(std::move(gen));
    }
    return GenerationTree(k, std::move(levels));
}

BigRational exact_alpha(uint32_t k, uint32_t l) {
    BigRational ratio(pow3(k), pow3(k - 1) + 1);
    BigRational a = 1;
    for (uint32_t i = 0; i < l; ++i) a *= ratio;
    return a;
}

BigRational exact_truncation_tail(uint32_t k, uint32_t L) {
    BigRational q(pow3(k - 1), pow3(k - 1) + 1);
    BigRational t = 1;
    for (uint32_t i = 0; i < L; ++i) t *= q;
    return t;
}

BigRational exact_total_mass(uint32_t k, uint32_t L) {
    return BigRational(1) - exact_truncation_tail(k, L);
}

double truncation_tail(uint32_t k, uint32_t L) {
    if (k < 2) throw ParamError("truncation_tail requires k >= 2");
    double p3 = std::pow(3.0, static_cast<double>(k - 1));
    return std::pow(p3 / (p3 + 1.0), static_cast<double>(L));
}

uint32_t depth_for_tail(uint32_t k, double threshold) {
    if (!(threshold > 0.0)) throw ParamError("tail threshold must be positive");
    if (threshold >= 1.0) return 0;
    double p3 = std::pow(3.0, static_cast<double>(k - 1));
    double q = p3 / (p3 + 1.0);
    double L = std::ceil(std::log(threshold) / std::log(q));
    return static_cast<uint32_t>(std::max(0.0, L));
}

WeightResult build_weight(const GenerationTree& tree, uint32_t k) {
    if (k != tree.k())
        throw ParamError("build_weight called with k=" + std::to_string(k) +
                         " on a tree built with k=" + std::to_string(tree.k()));

    std::vector<double> alpha(tree.depth() + 1, 0.0);
    for (uint32_t l = 1; l <= tree.depth(); ++l)
        alpha[l] = exact_alpha(k, l).convert_to<double>();

    struct Piece {
        Rational3 left, right;
        double value;
    };
    std::vector<Piece> islands;
    islands.reserve(tree.island_total());
    for (uint32_t l = 1; l <= tree.depth(); ++l)
        for (const auto& isl : tree.level(l).islands)
            islands.push_back({isl.interval.left(), isl.interval.right(), alpha[l]});
    std::sort(islands.begin(), islands.end(),
              [](const Piece& a, const Piece& b) { return a.left < b.left; });

    std::vector<Rational3> breaks;
    std::vector<double> values;
    breaks.reserve(2 * islands.size() + 2);
    Rational3 cursor(0);
    breaks.push_back(cursor);
    for (const auto& p : islands) {
        if (p.left < cursor)
            throw InvariantError("island intervals overlap near " + p.left.to_string());
        if (cursor < p.left) {
            values.push_back(0.0);
            breaks.push_back(p.left);
        }
        values.push_back(p.value);
        breaks.push_back(p.right);
        cursor = p.right;
    }
    const Rational3 one(1);
    if (cursor < one) {
        values.push_back(0.0);
        breaks.push_back(one);
    }
    return {StepFunction(std::move(breaks), std::move(values)),
            truncation_tail(k, tree.depth())};
}

MassBalanceReport verify_mass_balance(const GenerationTree& tree, const StepFunction& weight) {
    const uint32_t k = tree.k();
    const uint32_t L = tree.depth();
    MassBalanceReport rep;

    std::vector<double> alpha(L + 1);
    alpha[0] = 1.0;
    for (uint32_t l = 1; l <= L; ++l) alpha[l] = exact_alpha(k, l).convert_to<double>();
    const BigRational q_exact(pow3(k - 1), pow3(k - 1) + 1);

    auto kept_fraction = [&](uint32_t generations) {
        BigRational t = 1;
        for (uint32_t i = 0; i < generations; ++i) t *= q_exact;
        return (BigRational(1) - t).convert_to<double>();
    };

    auto track = [&](double measured, double expected, double& slot) {
        double denom = std::max(std::abs(expected), 1e-300);
        double rel = std::abs(measured - expected) / denom;
        slot = std::max(slot, rel);
        rep.max_rel_discrepancy = std::max(rep.max_rel_discrepancy, rel);
        ++rep.checks;
    };

    for (uint32_t l = 1; l < L; ++l) {
        const auto& gen = tree.level(l);
        for (size_t j = 0; j < gen.blocks.size(); ++j) {
            const TriadicInterval& J = gen.blocks[j];
            const TriadicInterval& I = gen.islands[j].interval;
            TriadicInterval Jd = J.middle_third();

            double wJ = weight.integrate(J.left(), J.right());
            double wI = weight.integrate(I.left(), I.right());
            double wJd = weight.integrate(Jd.left(), Jd.right());

            // Recursion w(J) = w(I) + w(J^delta); exact in the prefix sums.
            track(wI + wJd, wJ, rep.max_recursion_residual);

            // Closed form with the truncation tail of the subtree restored.
            double lenJ = J.length().to_double();
            track(wJ, alpha[l - 1] * lenJ * kept_fraction(L - l + 1),
                  rep.max_closed_form_discrepancy);
        }

        // w(I) = w(J') for I one level up from J', after tail correction.
        const auto& next = tree.level(l + 1);
        double kept = kept_fraction(L - l);
        for (size_t j = 0; j < next.blocks.size(); ++j) {
            const TriadicInterval& Jp = next.blocks[j];
            double wJp = weight.integrate(Jp.left(), Jp.right());
            double lenI = Jp.length().to_double(); // |I_l| = |J_{l+1}|
            track(wJp, alpha[l] * lenI * kept, rep.max_transfer_discrepancy);
        }
    }

    // Depth-1 trees still get the root closed-form check.
    if (L >= 1) {
        const auto& root = tree.level(1);
        double w0 = weight.integrate(root.blocks[0].left(), root.blocks[0].right());
        track(w0, kept_fraction(L), rep.max_closed_form_discrepancy);
    }
    return rep;
}

std::string GenerationTree::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "rt-tree-v1";
    j["k"] = k_;
    j["depth"] = depth();
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (uint32_t l = 1; l <= depth(); ++l) {
        const auto& gen = level(l);
        nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
        for (const auto& J : gen.blocks)
            blocks.push_back({{"level", J.level()}, {"index", J.index().str()}});
        nlohmann::ordered_json islands = nlohmann::ordered_json::array();
        for (const auto& isl : gen.islands)
            islands.push_back({{"level", isl.interval.level()},
                               {"index", isl.interval.index().str()},
                               {"side", side_to_string(isl.side)},
                               {"parent", isl.parent}});
        levels.push_back({{"generation", l}, {"J", std::move(blocks)}, {"I", std::move(islands)}});
    }
    j["levels"] = std::move(levels);
    return j.dump(2);
}

GenerationTree GenerationTree::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParamError(std::string("rt-tree-v1 parse error: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "rt-tree-v1")
        throw ParamError("expected format rt-tree-v1");

    ConstructionParams params;
    params.k = j.at("k").get<uint32_t>();
    params.depth = j.at("depth").get<uint32_t>();
    params.policy = OrientationPolicy::Explicit;
    for (const auto& lvl : j.at("levels"))
        for (const auto& isl : lvl.at("I"))
            params.explicit_sides.push_back(side_from_string(isl.at("side").get<std::string>()));
    params.piece_budget = std::numeric_limits<int64_t>::max();
    GenerationTree tree = build_generations(params);

    // The geometry is derived from (k, depth, sides); reject files that disagree.
    size_t li = 0;
    for (const auto& lvl : j.at("levels")) {
        const auto& gen = tree.levels().at(li++);
        size_t bi = 0;
        for (const auto& blk : lvl.at("J")) {
            const auto& J = gen.blocks.at(bi++);
            if (blk.at("level").get<uint32_t>() != J.level() ||
                BigInt(blk.at("index").get<std::string>()) != J.index())
                throw ParamError("rt-tree-v1 blocks disagree with the (k, depth, sides) rebuild");
        }
        size_t ii = 0;
        for (const auto& rec : lvl.at("I")) {
            const auto& I = gen.islands.at(ii++);
            if (rec.at("level").get<uint32_t>() != I.interval.level() ||
                BigInt(rec.at("index").get<std::string>()) != I.interval.index() ||
                rec.at("parent").get<size_t>() != I.parent)
                throw ParamError("rt-tree-v1 islands disagree with the (k, depth, sides) rebuild");
        }
    }
    return tree;
}

} // namespace wtlab
