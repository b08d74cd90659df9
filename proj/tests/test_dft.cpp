#include <catch2/catch_amalgamated.hpp>

#include <reachcast/dft.hpp>
#include <reachcast/rng.hpp>

#include "oracle_helpers.hpp"

using namespace reachcast;
using Catch::Approx;

namespace {

std::vector<std::complex<double>> random_signal(std::size_t n, Rng& rng) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return x;
}

double max_abs_diff(const std::vector<std::complex<double>>& a,
                    const std::vector<std::complex<double>>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("dft of impulse is all-ones") {
    std::vector<std::complex<double>> x(8, {0, 0});
    x[0] = {1, 0};
    auto X = dft(x);
    for (auto& v : X) {
        CHECK(v.real() == Approx(1.0).margin(1e-12));
        CHECK(v.imag() == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("dft of constant concentrates at DC") {
    std::vector<std::complex<double>> x(8, {1, 0});
    auto X = dft(x);
    CHECK(X[0].real() == Approx(8.0).margin(1e-12));
    for (std::size_t k = 1; k < 8; ++k) CHECK(std::abs(X[k]) < 1e-12);
}

TEST_CASE("round trip idft(dft(x)) = x for many sizes") {
    Rng rng(42);
    std::vector<std::size_t> sizes;
    for (std::size_t n = 1; n <= 64; ++n) sizes.push_back(n);
    sizes.push_back(100);
    sizes.push_back(127);
    sizes.push_back(128);
    for (std::size_t n : sizes) {
        auto x = random_signal(n, rng);
        auto back = idft(dft(x));
        INFO("n = " << n);
        CHECK(max_abs_diff(back, x) < 1e-10);
    }
}

TEST_CASE("Bluestein path agrees with direct O(N^2) DFT") {
    Rng rng(7);
    for (std::size_t n : {3u, 5u, 12u, 37u, 40u, 97u, 100u, 127u}) {
        auto x = random_signal(n, rng);
        auto fast = dft(x);
        auto slow = testutil::direct_dft(x);
        INFO("n = " << n);
        CHECK(max_abs_diff(fast, slow) < 1e-9);
    }
}

TEST_CASE("Parseval holds on a non-power-of-two size") {
    Rng rng(11);
    const std::size_t n = 37;
    auto x = random_signal(n, rng);
    auto X = dft(x);
    double lhs = 0, rhs = 0;
    for (auto& v : x) lhs += std::norm(v);
    for (auto& v : X) rhs += std::norm(v);
    CHECK(lhs == Approx(rhs / double(n)).epsilon(1e-10));

    auto back = idft(X);
    CHECK(max_abs_diff(back, x) < 1e-10);
}

TEST_CASE("forward ops are pure: same input, bit-identical output") {
    Rng rng(3);
    auto x = random_signal(40, rng);
    auto a = dft(x);
    auto b = dft(x);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].real() == b[i].real());
        CHECK(a[i].imag() == b[i].imag());
    }
}
