#include <catch2/catch_amalgamated.hpp>

#include "msmag/material.hpp"

using namespace msmag;

TEST_CASE("two-factor sine coefficient at the origin") {
    auto a = make_coefficient("sine-product", 1e-4);
    REQUIRE(a.eval({0.0, 0.0}) == Catch::Approx(1.91));
}

TEST_CASE("constant coefficient evaluates to its value") {
    auto a = make_coefficient("constant", 0.5, {{"value", 2.0}});
    REQUIRE(a.eval({0.123, -4.5}) == 2.0);
    REQUIRE(a.average() == 2.0);
    REQUIRE(a.a_min == 2.0);
    REQUIRE(a.a_max == 2.0);
}

TEST_CASE("modulated sine coefficient at the origin") {
    auto a = make_coefficient("modulated-sine", 1e-3);
    REQUIRE(a.eval({0.0, 0.0}) == Catch::Approx(1.1));
}

TEST_CASE("averages: sine-product and laminate") {
    auto a41 = make_coefficient("sine-product", 1e-4);
    REQUIRE(a41.average() == Catch::Approx(1.21).margin(1e-6));

    auto lam = make_coefficient("laminate", 0.1, {{"base", 2.0}, {"amp", 1.0}});
    REQUIRE(lam.average() == Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("average converges under quadrature refinement") {
    auto a = make_coefficient("exp-cosine", 1e-3);
    double v1 = a.average();
    double v2 = a.average();
    REQUIRE(v1 == v2);
    REQUIRE(std::isfinite(v1));
    REQUIRE(v1 > a.a_min);
    REQUIRE(v1 < a.a_max);
}

TEST_CASE("periodicity in the fast variable") {
    auto a = make_coefficient("sine-product", 1e-3);
    double eps = a.epsilon;
    for (int k = 0; k < 25; ++k) {
        Vec2 x{0.013 * k, -0.007 * k};
        double base = a.eval(x);
        REQUIRE(std::abs(a.eval({x.x + eps, x.y}) - base) < 1e-11);
        REQUIRE(std::abs(a.eval({x.x, x.y + eps}) - base) < 1e-11);
    }
}

TEST_CASE("bounds enclose samples and are positive") {
    for (const char* name : {"sine-product", "exp-cosine", "modulated-sine"}) {
        auto a = make_coefficient(name, 1e-3);
        REQUIRE(a.a_min > 0.0);
        REQUIRE(a.a_max > a.a_min);
        for (int k = 0; k < 200; ++k) {
            Vec2 x{0.0137 * k, 0.0071 * k};
            double v = a.eval(x);
            REQUIRE(v >= a.a_min - 1e-6);
            REQUIRE(v <= a.a_max + 1e-6);
        }
    }
}

TEST_CASE("average is rejected for locally periodic coefficients") {
    auto a = make_coefficient("modulated-sine", 1e-3);
    REQUIRE_THROWS_AS(a.average(), ConfigError);
}

TEST_CASE("unknown coefficient name is a config error") {
    REQUIRE_THROWS_AS(make_coefficient("mystery", 0.1), ConfigError);
}

TEST_CASE("non-elliptic laminate is rejected at construction") {
    REQUIRE_THROWS_AS(make_coefficient("laminate", 0.1, {{"base", 1.0}, {"amp", 2.0}}),
                      ConfigError);
}
