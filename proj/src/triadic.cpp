#include "wtlab/triadic.hpp"

#include "wtlab/errors.hpp"

namespace wtlab {

Side side_from_string(const std::string& s) {
    if (s == "left" || s == "L") return Side::Left;
    if (s == "right" || s == "R") return Side::Right;
    throw ParamError("invalid side: '" + s + "' (expected left|right)");
}

std::string side_to_string(Side s) {
    return s == Side::Left ? "left" : "right";
}

TriadicInterval::TriadicInterval(uint32_t level, BigInt index)
    : level_(level), index_(std::move(index)) {
    if (index_ < 0 || index_ >= pow3(level_))
        throw ParamError("triadic index out of range: level " + std::to_string(level_) +
                         ", index " + index_.str());
}

std::array<TriadicInterval, 3> TriadicInterval::children() const {
    BigInt base = index_ * 3;
    return {TriadicInterval(level_ + 1, base), TriadicInterval(level_ + 1, base + 1),
            TriadicInterval(level_ + 1, base + 2)};
}

TriadicInterval TriadicInterval::middle_third() const {
    return TriadicInterval(level_ + 1, index_ * 3 + 1);
}

TriadicInterval TriadicInterval::adjacent_scaled(Side side, uint32_t k) const {
    if (k < 1) throw ParamError("adjacent_scaled requires k >= 1");
    // Left endpoint of I^delta is (3n+1)/3^(j+1) = (n*3^k + 3^(k-1)) / 3^(j+k);
    // subtract or add one length 3^-(j+k).
    BigInt idx = index_ * pow3(k);
    if (side == Side::Left)
        idx += pow3(k - 1) - 1;
    else
        idx += 2 * pow3(k - 1);
    return TriadicInterval(level_ + k, idx);
}

bool TriadicInterval::contains(const Rational3& x) const {
    return left() <= x && x < right();
}

bool TriadicInterval::contains(const TriadicInterval& o) const {
    if (o.level_ < level_) return false;
    return o.index_ / pow3(o.level_ - level_) == index_;
}

std::string TriadicInterval::to_string() const {
    return "[" + left().to_string() + ", " + right().to_string() + ")";
}

} // namespace wtlab
