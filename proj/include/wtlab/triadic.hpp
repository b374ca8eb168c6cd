#pragma once

#include "wtlab/rational3.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace wtlab {

enum class Side { Left, Right };

Side side_from_string(const std::string& s);
std::string side_to_string(Side s);

// The triadic interval [n*3^-j, (n+1)*3^-j) inside [0,1).
class TriadicInterval {
public:
    TriadicInterval(uint32_t level, BigInt index);

    uint32_t level() const { return level_; }
    const BigInt& index() const { return index_; }

    Rational3 left() const { return Rational3(index_, level_); }
    Rational3 right() const { return Rational3(index_ + 1, level_); }
    Rational3 length() const { return Rational3(1, level_); }

    std::array<TriadicInterval, 3> children() const;

    // The middle child: same center, one third of the length.
    TriadicInterval middle_third() const;

    // The triadic interval of length 3^-k * |I| sharing one endpoint with
    // middle_third(): its right endpoint when side == Left, its left
    // endpoint when side == Right.
    TriadicInterval adjacent_scaled(Side side, uint32_t k) const;

    bool contains(const Rational3& x) const;       // right-open
    bool contains(const TriadicInterval& o) const; // set inclusion
    bool operator==(const TriadicInterval& o) const {
        return level_ == o.level_ && index_ == o.index_;
    }

    std::string to_string() const;

private:
    uint32_t level_;
    BigInt index_;
};

} // namespace wtlab
