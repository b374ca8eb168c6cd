#pragma once

#include "wtlab/operators.hpp"
#include "wtlab/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace wtlab::testing {

// Random step function supported in [0,1] with triadic-rational breakpoints.
inline StepFunction random_step(std::mt19937& rng, int max_pieces = 20, int max_scale = 6,
                                double zero_prob = 0.25) {
    std::uniform_int_distribution<int> scale_d(1, max_scale);
    std::uniform_int_distribution<int> pieces_d(1, max_pieces);
    std::uniform_real_distribution<double> value_d(0.0, 10.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    int pieces = pieces_d(rng);
    std::set<Rational3> pts;
    while (static_cast<int>(pts.size()) < pieces + 1) {
        int e = scale_d(rng);
        long long den = 1;
        for (int i = 0; i < e; ++i) den *= 3;
        std::uniform_int_distribution<long long> num_d(0, den);
        pts.insert(Rational3(BigInt(num_d(rng)), static_cast<uint32_t>(e)));
    }
    std::vector<Rational3> brk(pts.begin(), pts.end());
    std::vector<double> val;
    bool any = false;
    for (size_t i = 0; i + 1 < brk.size(); ++i) {
        double v = u(rng) < zero_prob ? 0.0 : value_d(rng);
        if (v > 0.0) any = true;
        val.push_back(v);
    }
    if (!any) val.back() = value_d(rng) + 0.5;
    return StepFunction(std::move(brk), std::move(val));
}

// x avoiding breakpoints by at least `gap`.
inline double random_point(std::mt19937& rng, const StepFunction& f, double lo = -0.5,
                           double hi = 1.5, double gap = 1e-7) {
    std::uniform_real_distribution<double> d(lo, hi);
    for (int tries = 0; tries < 1000; ++tries) {
        double x = d(rng);
        bool ok = true;
        for (double t : f.breakpoints_dbl())
            if (std::abs(x - t) < gap) ok = false;
        if (ok) return x;
    }
    return 0.5 * (lo + hi) + 1.2345e-5;
}

// a f + b g as a step function (a, b >= 0).
inline StepFunction combine(const StepFunction& f, const StepFunction& g, double a, double b) {
    std::set<Rational3> pts(f.breakpoints().begin(), f.breakpoints().end());
    pts.insert(g.breakpoints().begin(), g.breakpoints().end());
    std::vector<Rational3> brk(pts.begin(), pts.end());
    std::vector<double> val;
    for (size_t i = 0; i + 1 < brk.size(); ++i)
        val.push_back(a * f.evaluate(brk[i]) + b * g.evaluate(brk[i]));
    return StepFunction(std::move(brk), std::move(val));
}

// ---------------------------------------------------------------------------
// independent oracles

namespace detail {

template <typename F>
double adaptive_simpson(F&& fn, double a, double b, double fa, double fm, double fb, double eps,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = fn(lm), frm = fn(rm);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(fn, a, m, fa, flm, fm, eps * 0.5, depth - 1) +
           adaptive_simpson(fn, m, b, fm, frm, fb, eps * 0.5, depth - 1);
}

template <typename F>
double integrate_adaptive(F&& fn, double a, double b, double eps) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    return adaptive_simpson(fn, a, b, fn(a), fn(m), fn(b), eps, 48);
}

} // namespace detail

// Principal-value quadrature oracle with symmetric excision around x; no logs
// anywhere, so independent of the closed form it checks.
inline double pv_hilbert_oracle(const StepFunction& f, double x, double eps_quad = 1e-11) {
    const auto& T = f.breakpoints_dbl();
    const auto& V = f.values();
    double total = 0.0;
    for (size_t i = 0; i < V.size(); ++i) {
        if (V[i] == 0.0) continue;
        double a = T[i], b = T[i + 1];
        auto kern = [&](double t) { return 1.0 / (x - t); };
        if (x <= a || x >= b) {
            total += V[i] * detail::integrate_adaptive(kern, a, b, eps_quad);
        } else {
            double e = 0.5 * std::min(x - a, b - x);
            total += V[i] * (detail::integrate_adaptive(kern, a, x - e, eps_quad) +
                             detail::integrate_adaptive(kern, x + e, b, eps_quad));
        }
    }
    return total;
}

// Brute force over every candidate interval (endpoints at breakpoints + x).
inline double maximal_oracle_candidates(const StepFunction& f, double x, double r) {
    auto pref = f.prefix(r);
    const auto& T = f.breakpoints_dbl();
    std::vector<double> cand(T.begin(), T.end());
    cand.push_back(x);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    double best = 0.0;
    for (double a : cand) {
        if (a > x) continue;
        for (double b : cand) {
            if (b < x || b <= a) continue;
            double avg = f.integrate(a, b, r) / (b - a);
            best = std::max(best, avg);
        }
    }
    return r == 1.0 ? best : std::pow(best, 1.0 / r);
}

// Dense-grid brute force: uniform endpoint grid plus the breakpoints plus x.
inline double maximal_oracle_grid(const StepFunction& f, double x, double r, int grid_n = 100) {
    const auto& T = f.breakpoints_dbl();
    std::vector<double> cand(T.begin(), T.end());
    cand.push_back(x);
    double lo = std::min(T.front(), x), hi = std::max(T.back(), x);
    for (int i = 0; i <= grid_n; ++i) cand.push_back(lo + (hi - lo) * i / grid_n);
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    double best = 0.0;
    for (double a : cand) {
        if (a > x) continue;
        for (double b : cand) {
            if (b < x || b <= a) continue;
            best = std::max(best, f.integrate(a, b, r) / (b - a));
        }
    }
    return r == 1.0 ? best : std::pow(best, 1.0 / r);
}

} // namespace wtlab::testing
