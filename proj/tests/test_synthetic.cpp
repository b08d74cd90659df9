#include <catch2/catch_amalgamated.hpp>

#include <reachcast/synthetic.hpp>

#include "oracle_helpers.hpp"

using namespace reachcast;
using Catch::Approx;

TEST_CASE("same seed reproduces bit-identical reach and forcings") {
    SyntheticSpec spec;
    spec.seed = 99;
    spec.n_xs = 16;
    spec.duration_hours = 300;

    Reach r1 = gen_synthetic_reach(spec);
    Reach r2 = gen_synthetic_reach(spec);
    REQUIRE(serialize_geometry(r1) == serialize_geometry(r2));

    ForcingSeries f1 = gen_synthetic_forcings(spec, r1);
    ForcingSeries f2 = gen_synthetic_forcings(spec, r2);
    CHECK(f1.q_up == f2.q_up);
    CHECK(f1.h_dn == f2.h_dn);
}

TEST_CASE("different seeds differ") {
    SyntheticSpec a, b;
    a.seed = 1;
    b.seed = 2;
    a.n_xs = b.n_xs = 12;
    a.duration_hours = b.duration_hours = 100;
    CHECK(serialize_geometry(gen_synthetic_reach(a)) !=
          serialize_geometry(gen_synthetic_reach(b)));
}

TEST_CASE("T=2000 with three events gives exactly three peaks above 2x base flow") {
    SyntheticSpec spec;
    spec.seed = 7;
    spec.n_xs = 10;
    spec.duration_hours = 2000;
    spec.event_count = 3;
    Reach reach = gen_synthetic_reach(spec);
    ForcingSeries fs = gen_synthetic_forcings(spec, reach);
    const double threshold = 2.0 * synthetic_base_flow(spec);
    CHECK(testutil::count_peaks_above(fs.q_up, threshold) == 3);
}

TEST_CASE("degenerate manning range pins every section") {
    SyntheticSpec spec;
    spec.seed = 4;
    spec.n_xs = 8;
    spec.manning_lo = spec.manning_hi = 0.03;
    spec.duration_hours = 50;
    Reach reach = gen_synthetic_reach(spec);
    for (const auto& xs : reach.xs) CHECK(xs.manning_n == 0.03);
}

TEST_CASE("generated reach satisfies all geometry invariants") {
    for (std::uint64_t seed : {1ull, 7ull, 42ull}) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.n_xs = 40;
        Reach reach = gen_synthetic_reach(spec);
        CHECK_NOTHROW(reach.validate());
        CHECK(reach.x_coord.front() == 0.0);
        CHECK(reach.x_coord.back() == 1.0);
        CHECK(reach.xs.back().chainage == Approx(spec.length_m));
        for (const auto& xs : reach.xs) CHECK(xs.z_bank > xs.z_bed);
        // geometry file round-trips
        Reach r2 = parse_geometry(serialize_geometry(reach));
        CHECK(serialize_geometry(r2) == serialize_geometry(reach));
    }
}

TEST_CASE("forcings are routable and the boundary stage tracks outflow") {
    SyntheticSpec spec;
    spec.seed = 11;
    spec.n_xs = 14;
    spec.duration_hours = 400;
    Reach reach = gen_synthetic_reach(spec);
    ForcingSeries fs = gen_synthetic_forcings(spec, reach);
    CHECK_NOTHROW(fs.validate());

    StateField sf = route_reach(reach, fs);
    CHECK(sf.all_finite());
    // stage stays inside the generated banks plus margin everywhere
    for (std::size_t t = 0; t < sf.steps(); ++t)
        for (std::size_t i = 0; i < sf.sections(); ++i) {
            CHECK(sf.h.at2(t, i) >= reach.xs[i].z_bed);
            CHECK(sf.h.at2(t, i) <= reach.xs[i].z_bank + 10.0);
        }
}
