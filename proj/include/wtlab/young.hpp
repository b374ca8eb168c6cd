#pragma once

#include <string>

namespace wtlab {

// Young function Phi: [0,inf) -> [0,inf), convex increasing, Phi(0) = 0.
// Built-in shapes: t, t^r, t*log^eps(e+t), t*(loglog(e^e+t))^alpha.
// "psi" is the spec-string alias for loglog with alpha = 1.
class YoungFunction {
public:
    enum class Kind { Linear, Power, Log, LogLog };

    static YoungFunction linear();
    static YoungFunction power(double r);
    static YoungFunction log(double eps);
    static YoungFunction loglog(double alpha);

    // Spec strings: "linear", "power:R", "log:EPS", "loglog:ALPHA", "psi".
    static YoungFunction from_spec(const std::string& spec);
    std::string spec() const;

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }

    double value(double t) const;
    // ln Phi(e^x); stable for arguments far beyond double range of t.
    double log_value(double x) const;
    double inverse(double y) const;

private:
    YoungFunction(Kind kind, double param);

    Kind kind_;
    double param_;
};

} // namespace wtlab
