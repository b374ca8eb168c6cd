#pragma once

#include "wtlab/step_function.hpp"
#include "wtlab/triadic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wtlab {

enum class OrientationPolicy { AllLeft, AllRight, AlternateByLevel, Explicit, GreedySearch };

OrientationPolicy orientation_from_string(const std::string& s);
std::string orientation_to_string(OrientationPolicy p);

struct ConstructionParams {
    uint32_t k = 2;     // scale parameter, >= 2
    uint32_t depth = 1; // generations kept, >= 1
    OrientationPolicy policy = OrientationPolicy::AllLeft;
    std::vector<Side> explicit_sides; // construction order (level-major), for Explicit
    int64_t piece_budget = 2'000'000;
    int64_t sample_budget = 100'000; // greedy search only
    int threads = 1;                 // greedy search only

    void validate() const;
};

// Number of islands Sum_{l<=L} 3^((k-1)(l-1)).
BigInt island_count(uint32_t k, uint32_t depth);

struct Island {
    TriadicInterval interval;
    size_t parent; // position of the parent J within the same generation
    Side side;
};

struct Generation {
    std::vector<TriadicInterval> blocks;  // the J-family of this level
    std::vector<Island> islands;          // one island per block, same order
};

class GenerationTree {
public:
    GenerationTree(uint32_t k, std::vector<Generation> levels);

    uint32_t k() const { return k_; }
    uint32_t depth() const { return static_cast<uint32_t>(levels_.size()); }
    const std::vector<Generation>& levels() const { return levels_; }
    const Generation& level(uint32_t l) const { return levels_.at(l - 1); } // 1-based

    size_t island_total() const;
    std::vector<Side> sides_flat() const;
    std::string sides_string() const; // "LRL..."

    std::string to_json() const; // "rt-tree-v1"
    static GenerationTree from_json(const std::string& text);

private:
    uint32_t k_;
    std::vector<Generation> levels_;
};

GenerationTree build_generations(const ConstructionParams& params);

// alpha_l = (3^k / (3^(k-1)+1))^l and the geometric ratio q = 3^(k-1)/(3^(k-1)+1).
BigRational exact_alpha(uint32_t k, uint32_t l);
BigRational exact_truncation_tail(uint32_t k, uint32_t L);
BigRational exact_total_mass(uint32_t k, uint32_t L);
double truncation_tail(uint32_t k, uint32_t L);
// Smallest L with truncation_tail(k, L) <= threshold.
uint32_t depth_for_tail(uint32_t k, double threshold);

struct WeightResult {
    StepFunction weight;
    double tail_mass;
};

WeightResult build_weight(const GenerationTree& tree, uint32_t k);

struct MassBalanceReport {
    double max_rel_discrepancy = 0.0; // over all checks below
    double max_recursion_residual = 0.0;
    double max_closed_form_discrepancy = 0.0;
    double max_transfer_discrepancy = 0.0; // w(I) vs tail-corrected w(J')
    size_t checks = 0;
};

MassBalanceReport verify_mass_balance(const GenerationTree& tree, const StepFunction& weight);

struct OrientationSearchResult {
    std::vector<Side> sides;
    double score = 0.0;        // min |Hw|/w over the default sample plan
    std::string policy_used;   // which candidate won
};

OrientationSearchResult orientation_search(uint32_t k, uint32_t depth, int64_t sample_budget,
                                           int64_t piece_budget = 2'000'000, int threads = 1);

} // namespace wtlab
