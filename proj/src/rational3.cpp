#include "wtlab/rational3.hpp"

#include "wtlab/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace wtlab {

BigInt pow3(uint32_t e) {
    static std::map<uint32_t, BigInt> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(e);
    if (it != cache.end()) return it->second;
    BigInt v = 1;
    for (uint32_t i = 0; i < e; ++i) v *= 3;
    cache.emplace(e, v);
    return v;
}

Rational3::Rational3(BigInt num, uint32_t scale) : num_(std::move(num)), scale_(scale) {
    canonicalize();
}

void Rational3::canonicalize() {
    if (num_ == 0) {
        scale_ = 0;
        return;
    }
    while (scale_ > 0 && num_ % 3 == 0) {
        num_ /= 3;
        --scale_;
    }
}

Rational3 Rational3::operator+(const Rational3& o) const {
    uint32_t s = std::max(scale_, o.scale_);
    BigInt n = num_ * pow3(s - scale_) + o.num_ * pow3(s - o.scale_);
    return Rational3(std::move(n), s);
}

Rational3 Rational3::operator-(const Rational3& o) const {
    uint32_t s = std::max(scale_, o.scale_);
    BigInt n = num_ * pow3(s - scale_) - o.num_ * pow3(s - o.scale_);
    return Rational3(std::move(n), s);
}

Rational3 Rational3::operator*(const Rational3& o) const {
    return Rational3(num_ * o.num_, scale_ + o.scale_);
}

Rational3 Rational3::operator-() const {
    Rational3 r;
    r.num_ = -num_;
    r.scale_ = scale_;
    return r;
}

std::strong_ordering Rational3::operator<=>(const Rational3& o) const {
    uint32_t s = std::max(scale_, o.scale_);
    BigInt a = num_ * pow3(s - scale_);
    BigInt b = o.num_ * pow3(s - o.scale_);
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

bool Rational3::operator==(const Rational3& o) const {
    return scale_ == o.scale_ && num_ == o.num_;
}

double Rational3::to_double() const {
    long double n = num_.convert_to<long double>();
    long double d = powl(3.0L, static_cast<long double>(scale_));
    return static_cast<double>(n / d);
}

BigRational Rational3::to_rational() const {
    return BigRational(num_, pow3(scale_));
}

std::string Rational3::to_string() const {
    if (scale_ == 0) return num_.str();
    return num_.str() + "/3^" + std::to_string(scale_);
}

std::string Rational3::num_string() const {
    return num_.str();
}

Rational3 Rational3::parse(const std::string& num_decimal, uint32_t scale) {
    try {
        return Rational3(BigInt(num_decimal), scale);
    } catch (const std::exception&) {
        throw ParamError("invalid rational numerator: '" + num_decimal + "'");
    }
}

Rational3 Rational3::from_string(const std::string& text) {
    auto pos = text.find("/3^");
    if (pos == std::string::npos) return parse(text, 0);
    const std::string num = text.substr(0, pos);
    const std::string exp = text.substr(pos + 3);
    try {
        unsigned long e = std::stoul(exp);
        return parse(num, static_cast<uint32_t>(e));
    } catch (const ParamError&) {
        throw;
    } catch (const std::exception&) {
        throw ParamError("invalid rational literal: '" + text + "'");
    }
}

} // namespace wtlab
