#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace wtlab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

BigInt pow3(uint32_t e);

// Exact rational with a power-of-3 denominator: value = num / 3^scale.
// Canonical form: scale == 0, or num not divisible by 3. Closed under
// addition, subtraction and multiplication; total order.
class Rational3 {
public:
    Rational3() : num_(0), scale_(0) {}
    Rational3(BigInt num, uint32_t scale);
    explicit Rational3(long long n) : num_(n), scale_(0) {}

    static Rational3 from_string(const std::string& text); // "num" or "num/3^e"
    static Rational3 parse(const std::string& num_decimal, uint32_t scale);

    const BigInt& num() const { return num_; }
    uint32_t scale() const { return scale_; }

    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    Rational3 operator+(const Rational3& o) const;
    Rational3 operator-(const Rational3& o) const;
    Rational3 operator*(const Rational3& o) const;
    Rational3 operator-() const;

    std::strong_ordering operator<=>(const Rational3& o) const;
    bool operator==(const Rational3& o) const;

    double to_double() const;
    BigRational to_rational() const;
    std::string to_string() const;    // "num/3^e" (or "num" when scale == 0)
    std::string num_string() const;   // decimal numerator, for serialization

private:
    void canonicalize();

    BigInt num_;
    uint32_t scale_;
};

} // namespace wtlab
