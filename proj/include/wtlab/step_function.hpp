#pragma once

#include "wtlab/rational3.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace wtlab {

// Nonnegative piecewise-constant function on [0,1] with exact breakpoints.
// Pieces are right-open: [b_i, b_{i+1}) has value values[i]; the function is
// zero outside [breakpoints.front(), breakpoints.back()). Immutable after
// construction; prefix integrals per power are cached lazily.
class StepFunction {
public:
    StepFunction(std::vector<Rational3> breakpoints, std::vector<double> values);
    StepFunction(const StepFunction& o);
    StepFunction(StepFunction&& o) noexcept = default;
    StepFunction& operator=(const StepFunction& o);
    StepFunction& operator=(StepFunction&& o) noexcept = default;

    static StepFunction indicator(const Rational3& a, const Rational3& b, double value = 1.0);

    size_t piece_count() const { return values_.size(); }
    size_t nonzero_piece_count() const;
    const std::vector<Rational3>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& breakpoints_dbl() const { return breaks_dbl_; }
    // Exact rational differences rounded once; deep pieces lose relative
    // precision when lengths are recomputed from rounded endpoints.
    const std::vector<double>& piece_lengths() const { return lengths_; }

    double evaluate(const Rational3& x) const;
    double evaluate(double x) const;

    // Integral of f^power over [a,b] via cached prefix integrals.
    double integrate(const Rational3& a, const Rational3& b, double power = 1.0) const;
    double integrate(double a, double b, double power = 1.0) const;
    double mass() const;

    // Prefix integrals of f^power at each breakpoint (size N+1, first = 0).
    std::shared_ptr<const std::vector<double>> prefix(double power) const;
    // Integral of f^power over [support start, x].
    double prefix_upto(double x, double power = 1.0) const;

    // Jump representation: positions t_j with nonzero coefficient
    // c_j = f(t_j+) - f(t_j-), so that Hf(x) = sum_j c_j log|x - t_j|.
    const std::vector<double>& jump_positions() const { return jump_pos_; }
    const std::vector<double>& jump_coeffs() const { return jump_coef_; }

    StepFunction scaled(double c) const;

    bool is_breakpoint(double x) const;

    std::string to_json() const; // "stepfn-v1"
    static StepFunction from_json(const std::string& text);

private:
    double prefix_at(const std::vector<double>& pref, double x, double power) const;
    size_t piece_index(double x) const; // index i with breaks[i] <= x < breaks[i+1]

    std::vector<Rational3> breakpoints_;
    std::vector<double> values_;
    std::vector<double> breaks_dbl_;
    std::vector<double> lengths_;
    std::vector<double> jump_pos_;
    std::vector<double> jump_coef_;

    struct PrefixCache {
        std::mutex mu;
        std::map<uint64_t, std::shared_ptr<const std::vector<double>>> entries;
    };
    mutable std::unique_ptr<PrefixCache> cache_;
};

} // namespace wtlab
