#include "wtlab/young.hpp"

#include "wtlab/errors.hpp"

#include <cmath>

namespace wtlab {

namespace {
const double kEE = std::exp(std::exp(1.0)); // e^e
}

YoungFunction::YoungFunction(Kind kind, double param) : kind_(kind), param_(param) {}

YoungFunction YoungFunction::linear() { return YoungFunction(Kind::Linear, 1.0); }

YoungFunction YoungFunction::power(double r) {
    if (!(r >= 1.0)) throw ParamError("power Young function needs r >= 1");
    if (r == 1.0) return linear();
    return YoungFunction(Kind::Power, r);
}

YoungFunction YoungFunction::log(double eps) {
    if (!(eps > 0.0)) throw ParamError("log Young function needs eps > 0");
    return YoungFunction(Kind::Log, eps);
}

YoungFunction YoungFunction::loglog(double alpha) {
    if (!(alpha > 0.0)) throw ParamError("loglog Young function needs alpha > 0");
    return YoungFunction(Kind::LogLog, alpha);
}

YoungFunction YoungFunction::from_spec(const std::string& spec) {
    if (spec == "linear") return linear();
    if (spec == "psi") return loglog(1.0);
    auto pos = spec.find(':');
    if (pos != std::string::npos) {
        const std::string name = spec.substr(0, pos);
        const std::string arg = spec.substr(pos + 1);
        double x;
        try {
            size_t used = 0;
            x = std::stod(arg, &used);
            if (used != arg.size()) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ParamError("invalid Young function parameter: '" + arg + "' in '" + spec + "'");
        }
        if (name == "power") return power(x);
        if (name == "log") return log(x);
        if (name == "loglog") return loglog(x);
    }
    throw ParamError("unknown Young function spec: '" + spec + "'");
}

std::string YoungFunction::spec() const {
    auto fmt = [](double x) {
        char buf[32];
        snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    switch (kind_) {
        case Kind::Linear: return "linear";
        case Kind::Power: return "power:" + fmt(param_);
        case Kind::Log: return "log:" + fmt(param_);
        case Kind::LogLog: return "loglog:" + fmt(param_);
    }
    return "linear";
}

double YoungFunction::value(double t) const {
    if (!(t >= 0.0)) throw ParamError("Young function argument must be >= 0");
    switch (kind_) {
        case Kind::Linear: return t;
        case Kind::Power: return std::pow(t, param_);
        case Kind::Log: return t * std::pow(std::log(std::exp(1.0) + t), param_);
        case Kind::LogLog: return t * std::pow(std::log(std::log(kEE + t)), param_);
    }
    return t;
}

double YoungFunction::log_value(double x) const {
    switch (kind_) {
        case Kind::Linear: return x;
        case Kind::Power: return param_ * x;
        case Kind::Log: {
            // ln(e+t) = x + ln(1 + e^(1-x)) -> x for large x
            double l1 = x < 600.0 ? std::log(std::exp(1.0) + std::exp(x)) : x;
            return x + param_ * std::log(l1);
        }
        case Kind::LogLog: {
            double l1 = x < 600.0 ? std::log(kEE + std::exp(x)) : x;
            return x + param_ * std::log(std::log(l1));
        }
    }
    return x;
}

double YoungFunction::inverse(double y) const {
    if (!(y >= 0.0)) throw ParamError("Young function inverse argument must be >= 0");
    if (y == 0.0) return 0.0;
    switch (kind_) {
        case Kind::Linear: return y;
        case Kind::Power: return std::pow(y, 1.0 / param_);
        default: break;
    }
    // Phi(t) >= t for the log shapes, so the root lies in [0, y].
    double lo = 0.0, hi = y;
    for (int i = 0; i < 200 && (hi - lo) > 1e-15 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (value(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace wtlab
