#include <catch2/catch_amalgamated.hpp>

#include <reachcast/geometry.hpp>

using namespace reachcast;
using Catch::Approx;

namespace {

const char* kMinimalSi = R"(REACH: demo
UNITS: SI
XS 0
N 0.03
BANKS 0 20
PROFILE
0 5
10 1
20 5
END
XS 100
N 0.03
BANKS 0 20
PROFILE
0 5
10 1
20 5
END
XS 200
N 0.03
BANKS 0 20
PROFILE
0 5
10 1
20 5
END
)";

} // namespace

TEST_CASE("minimal 3-XS SI file parses with normalized coordinates") {
    Reach r = parse_geometry(kMinimalSi);
    REQUIRE(r.size() == 3);
    CHECK(r.id == "demo");
    CHECK(r.x_coord[0] == 0.0);
    CHECK(r.x_coord[1] == Approx(0.5));
    CHECK(r.x_coord[2] == 1.0);
}

TEST_CASE("US units convert feet to metres") {
    const std::string us = R"(REACH: us-file
UNITS: US
XS 0
N 0.03
BANKS 0 20
PROFILE
0 10.0
10 2.0
20 10.0
END
XS 100
N 0.03
BANKS 0 20
PROFILE
0 10.0
10 2.0
20 10.0
END
XS 200
N 0.03
BANKS 0 20
PROFILE
0 10.0
10 2.0
20 10.0
END
)";
    Reach r = parse_geometry(us);
    CHECK(r.xs[0].elevations[0] == Approx(3.048).margin(1e-12)); // 10 ft
    CHECK(r.xs[0].z_bed == Approx(2.0 * 0.3048).margin(1e-12));
    CHECK(r.xs[1].chainage == Approx(100.0 * 0.3048).margin(1e-12));
}

TEST_CASE("z_bed and z_bank derivation") {
    Reach r = parse_geometry(kMinimalSi);
    // profile [(0,5),(10,1),(20,5)], banks at 0 and 20
    CHECK(r.xs[0].z_bed == 1.0);
    CHECK(r.xs[0].z_bank == 5.0);
}

TEST_CASE("z_bank interpolates when banks sit between profile points") {
    const std::string g = R"(REACH: interp
UNITS: SI
XS 0
N 0.03
BANKS 5 15
PROFILE
0 5
10 1
20 5
END
XS 100
N 0.03
BANKS 5 15
PROFILE
0 5
10 1
20 5
END
XS 200
N 0.03
BANKS 5 15
PROFILE
0 5
10 1
20 5
END
)";
    Reach r = parse_geometry(g);
    CHECK(r.xs[0].z_bank == Approx(3.0)); // halfway down the side slope
    CHECK(r.xs[0].z_bank >= r.xs[0].z_bed);
}

TEST_CASE("parse errors carry line numbers") {
    std::string bad = kMinimalSi;
    bad.replace(bad.find("N 0.03"), 6, "N oops");
    try {
        parse_geometry(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
    }
}

TEST_CASE("non-monotone chainage rejected") {
    std::string bad = kMinimalSi;
    bad.replace(bad.find("XS 200"), 6, "XS 50");
    CHECK_THROWS_AS(parse_geometry(bad), ParseError);
}

TEST_CASE("banks outside the profile range rejected") {
    std::string bad = kMinimalSi;
    bad.replace(bad.find("BANKS 0 20"), 10, "BANKS 0 25");
    CHECK_THROWS_AS(parse_geometry(bad), ParseError);
}

TEST_CASE("missing roughness rejected") {
    std::string bad = kMinimalSi;
    const auto pos = bad.find("N 0.03");
    bad.erase(pos, bad.find('\n', pos) - pos + 1);
    CHECK_THROWS_AS(parse_geometry(bad), ParseError);
}

TEST_CASE("manning n outside (0, 0.2] rejected") {
    std::string bad = kMinimalSi;
    bad.replace(bad.find("N 0.03"), 6, "N 0.25");
    CHECK_THROWS_AS(parse_geometry(bad), ParseError);
    std::string bad2 = kMinimalSi;
    bad2.replace(bad2.find("N 0.03"), 6, "N 0.00");
    CHECK_THROWS_AS(parse_geometry(bad2), ParseError);
}

TEST_CASE("serialize/parse round trip preserves every field") {
    Reach r = parse_geometry(kMinimalSi);
    Reach r2 = parse_geometry(serialize_geometry(r));
    REQUIRE(r2.size() == r.size());
    CHECK(r2.id == r.id);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r2.xs[i].chainage == r.xs[i].chainage);
        CHECK(r2.xs[i].manning_n == r.xs[i].manning_n);
        CHECK(r2.xs[i].bank_left == r.xs[i].bank_left);
        CHECK(r2.xs[i].bank_right == r.xs[i].bank_right);
        CHECK(r2.xs[i].stations == r.xs[i].stations);
        CHECK(r2.xs[i].elevations == r.xs[i].elevations);
        CHECK(r2.xs[i].z_bed == r.xs[i].z_bed);
        CHECK(r2.xs[i].z_bank == r.xs[i].z_bank);
        CHECK(r2.x_coord[i] == r.x_coord[i]);
    }
}

TEST_CASE("unit conversion is involutive") {
    for (double x : {0.0, 1.0, 3.048, 1234.56789, 1e-9}) {
        const double back = (x / kMetresPerFoot) * kMetresPerFoot;
        CHECK(back == Approx(x).margin(1e-12));
    }
}

TEST_CASE("x_coord invariant under chainage translation and scaling") {
    Reach r = parse_geometry(kMinimalSi);
    Reach shifted = r;
    for (auto& s : shifted.xs) s.chainage = s.chainage * 3.7 + 1000.0;
    shifted.derive_x_coord();
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(shifted.x_coord[i] == Approx(r.x_coord[i]).margin(1e-12));
}

TEST_CASE("unequal spacing normalizes by total length") {
    std::string g = kMinimalSi;
    g.replace(g.find("XS 100"), 6, "XS 100");
    g.replace(g.find("XS 200"), 6, "XS 400");
    Reach r = parse_geometry(g);
    CHECK(r.x_coord[0] == 0.0);
    CHECK(r.x_coord[1] == Approx(0.25));
    CHECK(r.x_coord[2] == 1.0);
}

TEST_CASE("static feature table is [N x 4] in canonical order") {
    Reach r = parse_geometry(kMinimalSi);
    auto f = static_features(r);
    REQUIRE(f.shape() == std::vector<std::size_t>{3, 4});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(f.at2(i, 0) == r.xs[i].z_bed);
        CHECK(f.at2(i, 1) == r.xs[i].z_bank);
        CHECK(f.at2(i, 2) == 0.03);
        CHECK(f.at2(i, 3) == r.x_coord[i]);
    }
}
