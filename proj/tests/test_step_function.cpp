#include <doctest.h>

#include "helpers.hpp"
#include "wtlab/errors.hpp"
#include "wtlab/step_function.hpp"

#include <random>

using namespace wtlab;
using namespace wtlab::testing;

namespace {
StepFunction unit_indicator() {
    return StepFunction::indicator(Rational3(0), Rational3(1));
}
} // namespace

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(StepFunction({Rational3(0)}, {}), ParamError);
    CHECK_THROWS_AS(StepFunction({Rational3(0), Rational3(0)}, {1.0}), ParamError);
    CHECK_THROWS_AS(StepFunction({Rational3(1), Rational3(0)}, {1.0}), ParamError);
    CHECK_THROWS_AS(StepFunction({Rational3(0), Rational3(2)}, {1.0}), ParamError);
    CHECK_THROWS_AS(StepFunction({Rational3(0), Rational3(1)}, {-1.0}), ParamError);
    // out-of-order interior breakpoints are rejected, not merged
    CHECK_THROWS_AS(StepFunction({Rational3(0), Rational3(BigInt(2), 1), Rational3(BigInt(1), 1)},
                                 {1.0, 2.0}),
                    ParamError);
}

TEST_CASE("evaluate right-open convention") {
    StepFunction f = unit_indicator();
    CHECK(f.evaluate(Rational3(0)) == 1.0);
    CHECK(f.evaluate(Rational3(1)) == 0.0);
    CHECK(f.evaluate(0.5) == 1.0);
    CHECK(f.evaluate(-0.1) == 0.0);
    StepFunction g({Rational3(BigInt(1), 1), Rational3(BigInt(2), 1)}, {2.0});
    CHECK(g.evaluate(Rational3(BigInt(1), 1)) == 2.0);
    CHECK(g.evaluate(Rational3(BigInt(2), 1)) == 0.0);
}

TEST_CASE("integrate basics") {
    StepFunction f = unit_indicator();
    CHECK(f.integrate(Rational3(0), Rational3(1)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.integrate(Rational3(BigInt(1), 1), Rational3(BigInt(2), 1), 7.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(f.mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(f.integrate(Rational3(1), Rational3(0)), ParamError);
}

TEST_CASE("integrate matches direct summation") {
    std::mt19937 rng(101);
    for (int t = 0; t < 50; ++t) {
        StepFunction f = random_step(rng);
        double direct = 0.0;
        const auto& T = f.breakpoints_dbl();
        for (size_t i = 0; i < f.values().size(); ++i)
            direct += f.values()[i] * f.values()[i] * (T[i + 1] - T[i]);
        double via = f.integrate(Rational3(0), Rational3(1), 2.0);
        CHECK(via == doctest::Approx(direct).epsilon(1e-14));
    }
}

TEST_CASE("integrate additivity") {
    std::mt19937 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        StepFunction f = random_step(rng);
        double a = u(rng), b = u(rng), c = u(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        double whole = f.integrate(a, c, 1.0);
        double split = f.integrate(a, b, 1.0) + f.integrate(b, c, 1.0);
        CHECK(split == doctest::Approx(whole).epsilon(1e-13));
    }
}

TEST_CASE("stepfn-v1 round-trip is exact") {
    std::mt19937 rng(107);
    for (int t = 0; t < 20; ++t) {
        StepFunction f = random_step(rng);
        StepFunction g = StepFunction::from_json(f.to_json());
        REQUIRE(g.piece_count() == f.piece_count());
        for (size_t i = 0; i < f.breakpoints().size(); ++i)
            CHECK(g.breakpoints()[i] == f.breakpoints()[i]);
        for (size_t i = 0; i < f.values().size(); ++i) CHECK(g.values()[i] == f.values()[i]);
    }
    CHECK_THROWS_AS(StepFunction::from_json("{}"), ParamError);
    CHECK_THROWS_AS(StepFunction::from_json("not json"), ParamError);
}

TEST_CASE("jump representation telescopes") {
    std::mt19937 rng(109);
    for (int t = 0; t < 20; ++t) {
        StepFunction f = random_step(rng);
        const auto& pos = f.jump_positions();
        const auto& coef = f.jump_coeffs();
        REQUIRE(pos.size() == coef.size());
        double total = 0.0;
        for (double c : coef) total += c;
        CHECK(total == doctest::Approx(0.0).epsilon(1e-12)); // starts and ends at zero
        for (double c : coef) CHECK(c != 0.0);
    }
}

TEST_CASE("scaled multiplies values only") {
    StepFunction f = unit_indicator();
    StepFunction g = f.scaled(3.5);
    CHECK(g.evaluate(0.25) == 3.5);
    CHECK(g.breakpoints()[0] == f.breakpoints()[0]);
    CHECK_THROWS_AS(f.scaled(-1.0), ParamError);
}
