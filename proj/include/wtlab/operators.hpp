#pragma once

#include "wtlab/rational3.hpp"
#include "wtlab/step_function.hpp"
#include "wtlab/young.hpp"

#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace wtlab {

// Convention used everywhere: Hf(x) = p.v. integral of f(t)/(x-t) dt, with
// no 1/pi prefactor. Recorded in every report header.
extern const char* const kHilbertConvention;

// Closed form sum_i v_i * log|(x-a_i)/(x-b_i)|. Throws SingularityError when
// x is exactly a jump of f.
double hilbert_step(const StepFunction& f, double x);

// d/dx Hf(x) = sum_j c_j / (x - t_j) over the jumps of f.
double hilbert_step_derivative(const StepFunction& f, double x);

// Memoizing wrapper for repeated point evaluations of Hf.
class SampledTransform {
public:
    explicit SampledTransform(const StepFunction& f) : f_(&f) {}

    double at(double x) const;
    std::vector<double> batch(const std::vector<double>& xs, int threads = 1) const;
    const StepFunction& source() const { return *f_; }
    const char* convention() const { return kHilbertConvention; }

private:
    const StepFunction* f_;
    mutable std::mutex mu_;
    mutable std::unordered_map<uint64_t, double> memo_;
};

// M_r f(x) = sup over intervals R containing x of (avg_R f^r)^(1/r), exact
// over the candidate set of intervals with endpoints in breakpoints(f) + {x}.
double maximal(const StepFunction& f, double x, double r = 1.0);
double maximal(const StepFunction& f, const Rational3& x, double r = 1.0);

// Luxemburg average over [a,b]: inf{ lam > 0 : avg_R Phi(f/lam) <= 1 }.
double luxemburg_norm(const StepFunction& f, double a, double b, const YoungFunction& phi);
double luxemburg_norm(const StepFunction& f, const Rational3& a, const Rational3& b,
                      const YoungFunction& phi);

// M_Phi f(x): sup of Luxemburg averages over the candidate interval set.
// Linear and power shapes route through `maximal`; pass force_general = true
// to use the Luxemburg bisection route for any shape.
double orlicz_maximal(const StepFunction& f, double x, const YoungFunction& phi,
                      bool force_general = false);
double orlicz_maximal(const StepFunction& f, const Rational3& x, const YoungFunction& phi,
                      bool force_general = false);

struct SupScanResult {
    double value = 0.0;      // the supremum itself
    double log_t_star = 0.0; // ln of the achieving t
};

// (2 * sup_{t >= Phi^-1(1/2)} Phi(t)/t^r)^(1/r); throws std::domain_error
// when the ratio fails the boundedness guard.
double mphi_mr_bound_constant(const YoungFunction& phi, double r);
SupScanResult mphi_mr_bound_constant_detail(const YoungFunction& phi, double r);

// sup_{t >= 1} Phi(t)^(1/r) / t, scanned in log domain (the achieving t can
// be far beyond double range for r close to 1).
double growth_factor(const YoungFunction& phi, double r);
SupScanResult growth_factor_detail(const YoungFunction& phi, double r);

// integral of w over {x in [0,1] : |Hf(x)| > lambda}; per nonzero piece of w
// the set is bracketed from `resolution` interior samples and refined by
// bisection. Pieces where w = 0 are skipped.
double superlevel_weight(const StepFunction& f, const StepFunction& w, double lambda,
                         int resolution, int threads = 1);

// Shares the sampled Hf values across a lambda sweep. Besides the uniform
// samples, every piece gets the interior extrema and zeros of Hf as nodes
// (located from the analytic derivative), so Hf is monotone and single-signed
// between consecutive nodes and no superlevel zone is skipped.
class SuperlevelScanner {
public:
    SuperlevelScanner(const StepFunction& f, const StepFunction& w, int resolution,
                      int threads = 1);

    double measure(double lambda) const;
    double max_sampled_abs() const { return max_sampled_abs_; }

private:
    struct PieceNodes {
        double a, b, value;
        std::vector<double> xs;
        std::vector<double> h; // signed Hf at xs
    };

    const StepFunction* f_;
    std::vector<PieceNodes> pieces_;
    double max_sampled_abs_ = 0.0;
};

} // namespace wtlab
