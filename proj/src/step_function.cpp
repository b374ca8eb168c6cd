#include "wtlab/step_function.hpp"

#include "wtlab/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace wtlab {

namespace {

uint64_t power_key(double power) {
    uint64_t k;
    static_assert(sizeof(k) == sizeof(power));
    std::memcpy(&k, &power, sizeof(k));
    return k;
}

// Neumaier-compensated running sum; keeps the [0,1]-mass identities tight
// even with ~10^6 pieces.
struct CompensatedSum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

} // namespace

StepFunction::StepFunction(std::vector<Rational3> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.size() != values_.size() + 1 || values_.empty())
        throw ParamError("step function needs n+1 breakpoints for n >= 1 values");
    const Rational3 zero(0), one(1);
    if (breakpoints_.front() < zero || breakpoints_.back() > one)
        throw ParamError("step function support must lie inside [0,1]");
    for (size_t i = 0; i + 1 < breakpoints_.size(); ++i)
        if (!(breakpoints_[i] < breakpoints_[i + 1]))
            throw ParamError("breakpoints must be strictly increasing (piece " +
                             std::to_string(i) + ")");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw ParamError("piece values must be finite and nonnegative");
    breaks_dbl_.reserve(breakpoints_.size());
    for (const auto& b : breakpoints_) breaks_dbl_.push_back(b.to_double());
    lengths_.reserve(values_.size());
    for (size_t i = 0; i < values_.size(); ++i)
        lengths_.push_back((breakpoints_[i + 1] - breakpoints_[i]).to_double());
    for (size_t j = 0; j < breaks_dbl_.size(); ++j) {
        double before = j == 0 ? 0.0 : values_[j - 1];
        double after = j < values_.size() ? values_[j] : 0.0;
        if (after != before) {
            jump_pos_.push_back(breaks_dbl_[j]);
            jump_coef_.push_back(after - before);
        }
    }
    cache_ = std::make_unique<PrefixCache>();
}

StepFunction::StepFunction(const StepFunction& o)
    : breakpoints_(o.breakpoints_),
      values_(o.values_),
      breaks_dbl_(o.breaks_dbl_),
      lengths_(o.lengths_),
      jump_pos_(o.jump_pos_),
      jump_coef_(o.jump_coef_),
      cache_(std::make_unique<PrefixCache>()) {}

StepFunction& StepFunction::operator=(const StepFunction& o) {
    if (this != &o) {
        breakpoints_ = o.breakpoints_;
        values_ = o.values_;
        breaks_dbl_ = o.breaks_dbl_;
        lengths_ = o.lengths_;
        jump_pos_ = o.jump_pos_;
        jump_coef_ = o.jump_coef_;
        cache_ = std::make_unique<PrefixCache>();
    }
    return *this;
}

StepFunction StepFunction::indicator(const Rational3& a, const Rational3& b, double value) {
    return StepFunction({a, b}, {value});
}

size_t StepFunction::nonzero_piece_count() const {
    size_t n = 0;
    for (double v : values_)
        if (v > 0.0) ++n;
    return n;
}

size_t StepFunction::piece_index(double x) const {
    auto it = std::upper_bound(breaks_dbl_.begin(), breaks_dbl_.end(), x);
    return static_cast<size_t>(it - breaks_dbl_.begin()); // 0 = before support
}

double StepFunction::evaluate(double x) const {
    size_t i = piece_index(x);
    if (i == 0 || i >= breaks_dbl_.size()) return 0.0;
    return values_[i - 1];
}

double StepFunction::evaluate(const Rational3& x) const {
    // Exact comparison; the double path can misplace x only when it ties a
    // rounded breakpoint.
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    size_t i = static_cast<size_t>(it - breakpoints_.begin());
    if (i == 0 || i >= breakpoints_.size()) return 0.0;
    return values_[i - 1];
}

std::shared_ptr<const std::vector<double>> StepFunction::prefix(double power) const {
    if (!(power >= 1.0)) throw ParamError("integrate power must be >= 1");
    const uint64_t key = power_key(power);
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->entries.find(key);
    if (it != cache_->entries.end()) return it->second;
    auto pref = std::make_shared<std::vector<double>>();
    pref->reserve(breakpoints_.size());
    CompensatedSum acc;
    pref->push_back(0.0);
    for (size_t i = 0; i < values_.size(); ++i) {
        double vp = power == 1.0 ? values_[i] : std::pow(values_[i], power);
        acc.add(vp * lengths_[i]);
        pref->push_back(acc.value());
    }
    cache_->entries.emplace(key, pref);
    return cache_->entries[key];
}

double StepFunction::prefix_at(const std::vector<double>& pref, double x, double power) const {
    if (x <= breaks_dbl_.front()) return 0.0;
    if (x >= breaks_dbl_.back()) return pref.back();
    size_t i = piece_index(x); // >= 1 here
    double vp = power == 1.0 ? values_[i - 1] : std::pow(values_[i - 1], power);
    return pref[i - 1] + vp * (x - breaks_dbl_[i - 1]);
}

double StepFunction::integrate(double a, double b, double power) const {
    if (a > b) throw ParamError("integrate requires a <= b");
    auto pref = prefix(power);
    return prefix_at(*pref, b, power) - prefix_at(*pref, a, power);
}

double StepFunction::prefix_upto(double x, double power) const {
    return prefix_at(*prefix(power), x, power);
}

double StepFunction::integrate(const Rational3& a, const Rational3& b, double power) const {
    if (b < a) throw ParamError("integrate requires a <= b");
    return integrate(a.to_double(), b.to_double(), power);
}

double StepFunction::mass() const {
    return prefix(1.0)->back();
}

StepFunction StepFunction::scaled(double c) const {
    if (!(c >= 0.0)) throw ParamError("scale factor must be nonnegative");
    std::vector<double> v = values_;
    for (double& x : v) x *= c;
    return StepFunction(breakpoints_, std::move(v));
}

bool StepFunction::is_breakpoint(double x) const {
    auto it = std::lower_bound(breaks_dbl_.begin(), breaks_dbl_.end(), x);
    return it != breaks_dbl_.end() && *it == x;
}

std::string StepFunction::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "stepfn-v1";
    nlohmann::ordered_json pieces = nlohmann::ordered_json::array();
    for (size_t i = 0; i < breakpoints_.size(); ++i) {
        nlohmann::ordered_json rec;
        rec["num"] = breakpoints_[i].num_string();
        rec["scale"] = breakpoints_[i].scale();
        rec["value"] = i < values_.size() ? values_[i] : 0.0; // last record closes support
        pieces.push_back(std::move(rec));
    }
    j["pieces"] = std::move(pieces);
    return j.dump(2);
}

StepFunction StepFunction::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParamError(std::string("stepfn-v1 parse error: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "stepfn-v1")
        throw ParamError("expected format stepfn-v1");
    std::vector<Rational3> brk;
    std::vector<double> val;
    const auto& pieces = j.at("pieces");
    for (const auto& rec : pieces) {
        brk.push_back(Rational3::parse(rec.at("num").get<std::string>(),
                                       rec.at("scale").get<uint32_t>()));
        val.push_back(rec.at("value").get<double>());
    }
    if (val.empty()) throw ParamError("stepfn-v1 has no pieces");
    if (val.back() != 0.0) throw ParamError("stepfn-v1 last record must carry value 0");
    val.pop_back();
    return StepFunction(std::move(brk), std::move(val));
}

} // namespace wtlab
