#include "wtlab/operators.hpp"

#include "wtlab/errors.hpp"
#include "wtlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace wtlab {

const char* const kHilbertConvention = "pv integral f(t)/(x-t) dt, no 1/pi";

double hilbert_step(const StepFunction& f, double x) {
    const auto& pos = f.jump_positions();
    const auto& coef = f.jump_coeffs();
    auto it = std::lower_bound(pos.begin(), pos.end(), x);
    if (it != pos.end() && *it == x)
        throw SingularityError("Hilbert transform evaluated at breakpoint x=" +
                               std::to_string(x));
    double s = 0.0;
    for (size_t j = 0; j < pos.size(); ++j) s += coef[j] * std::log(std::abs(x - pos[j]));
    return s;
}

double hilbert_step_derivative(const StepFunction& f, double x) {
    const auto& pos = f.jump_positions();
    const auto& coef = f.jump_coeffs();
    auto it = std::lower_bound(pos.begin(), pos.end(), x);
    if (it != pos.end() && *it == x)
        throw SingularityError("Hilbert derivative evaluated at breakpoint x=" +
                               std::to_string(x));
    double s = 0.0;
    for (size_t j = 0; j < pos.size(); ++j) s += coef[j] / (x - pos[j]);
    return s;
}

double SampledTransform::at(double x) const {
    uint64_t key;
    std::memcpy(&key, &x, sizeof(key));
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
    }
    double v = hilbert_step(*f_, x);
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(key, v);
    return v;
}

std::vector<double> SampledTransform::batch(const std::vector<double>& xs, int threads) const {
    std::vector<double> out(xs.size());
    parallel_for(xs.size(), threads, [&](size_t i) { out[i] = hilbert_step(*f_, xs[i]); });
    std::lock_guard<std::mutex> lock(mu_);
    for (size_t i = 0; i < xs.size(); ++i) {
        uint64_t key;
        std::memcpy(&key, &xs[i], sizeof(key));
        memo_.emplace(key, out[i]);
    }
    return out;
}

namespace {

struct Pt {
    double t, p;
};

double cross(const Pt& o, const Pt& a, const Pt& b) {
    return (a.t - o.t) * (b.p - o.p) - (a.p - o.p) * (b.t - o.t);
}

double slope_to(const Pt& u, const Pt& v) {
    double dt = v.t - u.t;
    if (dt <= 0.0) return -std::numeric_limits<double>::infinity();
    return (v.p - u.p) / dt;
}

// Max slope from u to a vertex of an upper-convex chain (slope is unimodal
// along the chain; ties shrink conservatively).
double tangent_slope(const Pt& u, const std::vector<Pt>& chain) {
    size_t lo = 0, hi = chain.size() - 1;
    while (hi - lo > 8) {
        size_t m1 = lo + (hi - lo) / 3;
        size_t m2 = hi - (hi - lo) / 3;
        if (slope_to(u, chain[m1]) < slope_to(u, chain[m2]))
            lo = m1 + 1;
        else
            hi = m2;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = lo; i <= hi; ++i) best = std::max(best, slope_to(u, chain[i]));
    return best;
}

// Max over candidate pairs (a <= x <= b) of (P(b)-P(a))/(b-a), with candidate
// endpoints at the breakpoints T plus x itself. Sufficient for maximal
// averages of step functions: within one piece the average is monotone in
// each endpoint.
double max_average(const std::vector<double>& T, const std::vector<double>& P, double x,
                   double px) {
    size_t n = T.size();
    std::vector<Pt> left, right;
    left.reserve(n + 1);
    right.reserve(n + 1);

    auto lower_push = [](std::vector<Pt>& h, Pt q) {
        while (h.size() >= 2 && cross(h[h.size() - 2], h[h.size() - 1], q) <= 0) h.pop_back();
        h.push_back(q);
    };
    auto upper_push = [](std::vector<Pt>& h, Pt q) {
        while (h.size() >= 2 && cross(h[h.size() - 2], h[h.size() - 1], q) >= 0) h.pop_back();
        h.push_back(q);
    };

    for (size_t i = 0; i < n && T[i] < x; ++i) lower_push(left, {T[i], P[i]});
    lower_push(left, {x, px});
    {
        size_t i = std::lower_bound(T.begin(), T.end(), x) - T.begin();
        std::vector<Pt> raw;
        raw.push_back({x, px});
        for (; i < n; ++i)
            if (T[i] > x) raw.push_back({T[i], P[i]});
        for (const Pt& q : raw) upper_push(right, q);
    }

    double best = 0.0;
    for (const Pt& u : left) best = std::max(best, tangent_slope(u, right));
    return std::max(best, 0.0);
}

} // namespace

double maximal(const StepFunction& f, double x, double r) {
    if (!(r >= 1.0)) throw ParamError("maximal requires r >= 1");
    auto pref = f.prefix(r);
    double px = f.prefix_upto(x, r);
    double avg = max_average(f.breakpoints_dbl(), *pref, x, px);
    return r == 1.0 ? avg : std::pow(avg, 1.0 / r);
}

double maximal(const StepFunction& f, const Rational3& x, double r) {
    return maximal(f, x.to_double(), r);
}

double luxemburg_norm(const StepFunction& f, double a, double b, const YoungFunction& phi) {
    if (!(b > a)) throw ParamError("luxemburg_norm requires an interval of positive length");
    const auto& T = f.breakpoints_dbl();
    const auto& V = f.values();
    std::vector<std::pair<double, double>> parts; // (length, value), nonzero pieces only
    double vmax = 0.0;
    for (size_t i = 0; i < V.size(); ++i) {
        if (V[i] <= 0.0) continue;
        double lo = std::max(T[i], a), hi = std::min(T[i + 1], b);
        if (hi <= lo) continue;
        parts.emplace_back(hi - lo, V[i]);
        vmax = std::max(vmax, V[i]);
    }
    if (parts.empty()) return 0.0;

    const double len = b - a;
    auto G = [&](double lam) {
        double s = 0.0;
        for (const auto& [l, v] : parts) s += l * phi.value(v / lam);
        return s / len;
    };

    double hi = vmax / phi.inverse(1.0); // G(hi) <= 1 since the parts fit in [a,b]
    for (int i = 0; i < 64 && G(hi) > 1.0; ++i) hi *= 2.0;
    double lo = hi;
    for (int i = 0; i < 1024 && G(lo) <= 1.0; ++i) lo *= 0.5;
    if (G(lo) <= 1.0) return 0.0; // vanishing part
    while (hi - lo > 1e-13 * hi) {
        double mid = 0.5 * (lo + hi);
        (G(mid) <= 1.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double luxemburg_norm(const StepFunction& f, const Rational3& a, const Rational3& b,
                      const YoungFunction& phi) {
    return luxemburg_norm(f, a.to_double(), b.to_double(), phi);
}

namespace {

// Is there an interval R containing x with Luxemburg average > tau?
// Equivalent to max_R avg_R Phi(f/tau) > 1, a plain max-average query on the
// step function Phi(f/tau).
bool luxemburg_exceeds(const StepFunction& f, const YoungFunction& phi, double x, double tau) {
    const auto& T = f.breakpoints_dbl();
    const auto& V = f.values();
    thread_local std::vector<double> gp;
    gp.assign(T.size(), 0.0);
    for (size_t i = 0; i < V.size(); ++i) {
        double g = V[i] > 0.0 ? phi.value(V[i] / tau) : 0.0;
        gp[i + 1] = gp[i] + g * (T[i + 1] - T[i]);
    }
    double px;
    if (x <= T.front())
        px = 0.0;
    else if (x >= T.back())
        px = gp.back();
    else {
        size_t i = std::upper_bound(T.begin(), T.end(), x) - T.begin();
        double g = V[i - 1] > 0.0 ? phi.value(V[i - 1] / tau) : 0.0;
        px = gp[i - 1] + g * (x - T[i - 1]);
    }
    return max_average(T, gp, x, px) > 1.0;
}

} // namespace

double orlicz_maximal(const StepFunction& f, double x, const YoungFunction& phi,
                      bool force_general) {
    if (!force_general &&
        (phi.kind() == YoungFunction::Kind::Linear || phi.kind() == YoungFunction::Kind::Power)) {
        // Luxemburg average of t^r is exactly the L^r average.
        return maximal(f, x, phi.kind() == YoungFunction::Kind::Linear ? 1.0 : phi.parameter());
    }
    double vmax = 0.0;
    for (double v : f.values()) vmax = std::max(vmax, v);
    if (vmax == 0.0) return 0.0;

    double hi = vmax / phi.inverse(1.0);
    if (luxemburg_exceeds(f, phi, x, hi)) return hi; // can only happen at the boundary
    double lo = 0.0;
    while (hi - lo > 1e-12 * hi) {
        double mid = 0.5 * (lo + hi);
        (luxemburg_exceeds(f, phi, x, mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double orlicz_maximal(const StepFunction& f, const Rational3& x, const YoungFunction& phi,
                      bool force_general) {
    return orlicz_maximal(f, x.to_double(), phi, force_general);
}

namespace {

// Grid scan of g over [x_min, x_max] (linear in x = ln t, i.e. log-spaced in
// t) followed by golden-section refinement around the best node.
SupScanResult sup_scan_log(const std::function<double(double)>& g, double x_min, double x_max) {
    constexpr int kNodes = 10000;
    double best = -std::numeric_limits<double>::infinity();
    int bi = 0;
    std::vector<double> gs(kNodes + 1);
    for (int i = 0; i <= kNodes; ++i) {
        double x = x_min + (x_max - x_min) * i / kNodes;
        gs[i] = g(x);
        if (gs[i] > best) {
            best = gs[i];
            bi = i;
        }
    }
    double step = (x_max - x_min) / kNodes;
    double lo = x_min + step * std::max(0, bi - 1);
    double hi = x_min + step * std::min(kNodes, bi + 1);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - invphi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + invphi * (b - a);
            gd = g(d);
        }
    }
    double xm = 0.5 * (a + b);
    double gm = g(xm);
    if (best > gm) {
        xm = x_min + step * bi;
        gm = best;
    }
    return {std::exp(gm), xm};
}

double scan_upper_bound(const YoungFunction& phi, double r, double x_min) {
    // The maximizer satisfies roughly (shape slope) = r - 1, which puts it
    // below ~(1 + parameter)/(r - 1) in x = ln t for every built-in shape.
    // For r near 1 this reaches far beyond double range in t; everything is
    // evaluated in x = ln t.
    double reach = 3.0 * (1.0 + std::abs(phi.parameter())) / (r - 1.0);
    return std::max(x_min + 60.0, std::min(reach, 1e8));
}

// The ratio must be non-increasing at the far end of the scan range,
// otherwise the supremum does not exist.
template <typename G>
void guard_decay(const G& lg, double x_max, const YoungFunction& phi, double r,
                 const char* what) {
    double g_far = lg(x_max), g_near = lg(x_max - 30.0);
    if (g_far > g_near + 1e-12)
        throw std::domain_error(std::string(what) + " for phi=" + phi.spec() +
                                ", r=" + std::to_string(r));
}

} // namespace

SupScanResult mphi_mr_bound_constant_detail(const YoungFunction& phi, double r) {
    if (!(r > 1.0)) throw ParamError("mphi_mr_bound_constant requires r > 1");
    auto lg = [&](double x) { return phi.log_value(x) - r * x; };
    double x_min = std::log(phi.inverse(0.5));
    double x_max = scan_upper_bound(phi, r, x_min);
    guard_decay(lg, x_max, phi, r, "Phi(t)/t^r is not bounded");
    auto scan = sup_scan_log(lg, x_min, x_max);
    return {std::pow(2.0 * scan.value, 1.0 / r), scan.log_t_star};
}

double mphi_mr_bound_constant(const YoungFunction& phi, double r) {
    return mphi_mr_bound_constant_detail(phi, r).value;
}

SupScanResult growth_factor_detail(const YoungFunction& phi, double r) {
    if (!(r > 1.0)) throw ParamError("growth_factor requires r > 1");
    auto lg = [&](double x) { return phi.log_value(x) / r - x; };
    double x_max = scan_upper_bound(phi, r, 0.0);
    guard_decay(lg, x_max, phi, r, "Phi(t)^(1/r)/t does not decay");
    return sup_scan_log(lg, 0.0, x_max);
}

double growth_factor(const YoungFunction& phi, double r) {
    return growth_factor_detail(phi, r).value;
}

namespace {

double nudge_into(double a, double b, double x) {
    if (x <= a) return std::nextafter(a, b);
    if (x >= b) return std::nextafter(b, a);
    return x;
}

double refine_crossing(const StepFunction& f, double lo, double hi, double lambda) {
    // sign of |Hf| - lambda differs at lo and hi
    bool above_lo = std::abs(hilbert_step(f, lo)) > lambda;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        bool above = std::abs(hilbert_step(f, mid)) > lambda;
        (above == above_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

namespace {

// Root of fn (sign change between lo and hi) by plain bisection.
template <typename Fn>
double bisect_sign_change(Fn&& fn, double lo, double hi, bool positive_at_lo, double width) {
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ((fn(mid) > 0.0) == positive_at_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

SuperlevelScanner::SuperlevelScanner(const StepFunction& f, const StepFunction& w,
                                     int resolution, int threads)
    : f_(&f) {
    if (resolution < 1) throw ParamError("superlevel resolution must be >= 1");
    const auto& T = w.breakpoints_dbl();
    const auto& V = w.values();
    const auto& ft = f.jump_positions();

    for (size_t i = 0; i < V.size(); ++i) {
        if (V[i] <= 0.0) continue;
        PieceNodes pn;
        pn.a = T[i];
        pn.b = T[i + 1];
        pn.value = V[i];
        double len = pn.b - pn.a;
        double delta = len * 1e-12;
        std::vector<double> xs;
        xs.push_back(nudge_into(pn.a, pn.b, pn.a + delta));
        for (int j = 0; j < resolution; ++j)
            xs.push_back(pn.a + len * (j + 0.5) / resolution);
        // f may jump strictly inside this piece; probe both sides of each jump
        auto lo = std::upper_bound(ft.begin(), ft.end(), pn.a);
        for (auto it = lo; it != ft.end() && *it < pn.b; ++it) {
            xs.push_back(nudge_into(pn.a, pn.b, *it - delta));
            xs.push_back(nudge_into(pn.a, pn.b, *it + delta));
        }
        xs.push_back(nudge_into(pn.a, pn.b, pn.b - delta));
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        pn.xs = std::move(xs);
        pieces_.push_back(std::move(pn));
    }

    // Between consecutive f-jump probes Hf is smooth; refine each piece's node
    // set with the extrema (sign changes of Hf') and then the zeros of Hf, so
    // that Hf is monotone and single-signed between adjacent nodes.
    auto jump_inside = [&ft](double lo, double hi) {
        auto it = std::upper_bound(ft.begin(), ft.end(), lo);
        return it != ft.end() && *it < hi;
    };

    parallel_for(pieces_.size(), threads, [&](size_t p) {
        PieceNodes& pn = pieces_[p];
        const double width = (pn.b - pn.a) * 1e-13;
        std::vector<double> xs;
        xs.reserve(2 * pn.xs.size());
        std::vector<double> hp(pn.xs.size());
        for (size_t j = 0; j < pn.xs.size(); ++j) hp[j] = hilbert_step_derivative(f, pn.xs[j]);
        xs.push_back(pn.xs[0]);
        for (size_t j = 1; j < pn.xs.size(); ++j) {
            // a sign flip across an interior jump of f is the singularity
            // itself, already bracketed by its probe nodes
            if ((hp[j - 1] > 0.0) != (hp[j] > 0.0) && !jump_inside(pn.xs[j - 1], pn.xs[j])) {
                double xe = bisect_sign_change(
                    [&](double x) { return hilbert_step_derivative(f, x); }, pn.xs[j - 1],
                    pn.xs[j], hp[j - 1] > 0.0, width);
                if (xe > xs.back() && xe < pn.xs[j]) xs.push_back(xe);
            }
            xs.push_back(pn.xs[j]);
        }

        std::vector<double> h(xs.size());
        for (size_t j = 0; j < xs.size(); ++j) h[j] = hilbert_step(f, xs[j]);
        std::vector<double> final_xs, final_h;
        final_xs.reserve(xs.size() + 8);
        final_h.reserve(xs.size() + 8);
        final_xs.push_back(xs[0]);
        final_h.push_back(h[0]);
        for (size_t j = 1; j < xs.size(); ++j) {
            if ((h[j - 1] > 0.0) != (h[j] > 0.0) && !jump_inside(xs[j - 1], xs[j])) {
                double xz = bisect_sign_change([&](double x) { return hilbert_step(f, x); },
                                               xs[j - 1], xs[j], h[j - 1] > 0.0, width);
                if (xz > final_xs.back() && xz < xs[j]) {
                    final_xs.push_back(xz);
                    final_h.push_back(hilbert_step(f, xz));
                }
            }
            final_xs.push_back(xs[j]);
            final_h.push_back(h[j]);
        }
        pn.xs = std::move(final_xs);
        pn.h = std::move(final_h);
    });

    for (const auto& pn : pieces_)
        for (double h : pn.h) max_sampled_abs_ = std::max(max_sampled_abs_, std::abs(h));
}

double SuperlevelScanner::measure(double lambda) const {
    if (!(lambda > 0.0)) throw ParamError("superlevel lambda must be positive");
    double total = 0.0;
    for (const auto& pn : pieces_) {
        bool above = std::abs(pn.h[0]) > lambda;
        double zone_start = pn.a;
        double acc = 0.0;
        for (size_t j = 1; j < pn.xs.size(); ++j) {
            bool ab = std::abs(pn.h[j]) > lambda;
            if (ab != above) {
                // |Hf| is monotone on [xs[j-1], xs[j]]: exactly one crossing
                double c = refine_crossing(*f_, pn.xs[j - 1], pn.xs[j], lambda);
                if (above)
                    acc += c - zone_start;
                else
                    zone_start = c;
                above = ab;
            }
        }
        if (above) acc += pn.b - zone_start;
        total += pn.value * acc;
    }
    return total;
}

double superlevel_weight(const StepFunction& f, const StepFunction& w, double lambda,
                         int resolution, int threads) {
    return SuperlevelScanner(f, w, resolution, threads).measure(lambda);
}

} // namespace wtlab
