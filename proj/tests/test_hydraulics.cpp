#include <catch2/catch_amalgamated.hpp>

#include <reachcast/hydraulics.hpp>
#include <reachcast/rng.hpp>

using namespace reachcast;
using Catch::Approx;

TEST_CASE("zero depth gives zero discharge") {
    CHECK(manning_discharge(0.0, 10.0, 1e-4, 0.03) == 0.0);
}

TEST_CASE("hand-evaluated closed form: w=10 d=2 n=0.03 S=1e-4") {
    // independent evaluation: A = 20, P = 14, R = 10/7,
    // Q = (1/0.03) * 20 * (10/7)^(2/3) * 0.01
    const double expected = (20.0 / 0.03) * std::pow(10.0 / 7.0, 2.0 / 3.0) * 0.01;
    CHECK(expected == Approx(8.4562).margin(5e-4)); // freeze the hand value
    CHECK(manning_discharge(2.0, 10.0, 1e-4, 0.03) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("doubling n halves Q exactly") {
    const double q1 = manning_discharge(1.7, 25.0, 2e-4, 0.02);
    const double q2 = manning_discharge(1.7, 25.0, 2e-4, 0.04);
    CHECK(q1 == Approx(2.0 * q2).epsilon(1e-15));
}

TEST_CASE("domain errors on nonpositive width/slope/n") {
    CHECK_THROWS_AS(manning_discharge(1, 0, 1e-4, 0.03), std::domain_error);
    CHECK_THROWS_AS(manning_discharge(1, 10, 0, 0.03), std::domain_error);
    CHECK_THROWS_AS(manning_discharge(1, 10, 1e-4, 0), std::domain_error);
    CHECK_THROWS_AS(manning_discharge(-1, 10, 1e-4, 0.03), std::domain_error);
}

TEST_CASE("normal depth of zero discharge is zero") {
    CHECK(normal_depth(0.0, 10, 1e-4, 0.03) == 0.0);
}

TEST_CASE("normal depth inverts manning discharge") {
    const double q = manning_discharge(2.0, 10.0, 1e-4, 0.03);
    CHECK(normal_depth(q, 10.0, 1e-4, 0.03) == Approx(2.0).margin(1e-6));
}

TEST_CASE("normal depth is monotone in discharge") {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const double w = rng.uniform(5, 100);
        const double s = rng.uniform(1e-5, 1e-3);
        const double n = rng.uniform(0.02, 0.08);
        const double q1 = rng.uniform(0.1, 400);
        const double q2 = q1 * rng.uniform(1.01, 3.0);
        CHECK(normal_depth(q1, w, s, n) < normal_depth(q2, w, s, n));
    }
}

TEST_CASE("inverse consistency across random sections") {
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const double w = rng.uniform(5, 200);
        const double s = rng.uniform(1e-5, 2e-3);
        const double n = rng.uniform(0.015, 0.1);
        const double q = rng.uniform(0.01, 2000);
        const double d = normal_depth(q, w, s, n);
        CHECK(manning_discharge(d, w, s, n) == Approx(q).epsilon(1e-8));
    }
}

TEST_CASE("bracket failure is reported explicitly") {
    CHECK_THROWS_AS(normal_depth(1e300, 10, 1e-4, 0.03), NumericError);
}
