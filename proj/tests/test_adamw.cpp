#include <catch2/catch_amalgamated.hpp>

#include <reachcast/adamw.hpp>
#include <reachcast/rng.hpp>

using namespace reachcast;
using Catch::Approx;

TEST_CASE("zero gradient with zero decay leaves parameters unchanged") {
    Tensor<double> p({4});
    Rng rng(1);
    fill_uniform(p, rng, -2, 2);
    Tensor<double> orig = p;
    Tensor<double> g({4});

    auto st = adamw_init<double>({&p});
    AdamWConfig<double> cfg;
    cfg.weight_decay = 0.0;
    for (int i = 0; i < 5; ++i) adamw_step<double>({&p}, {&g}, st, cfg);
    CHECK(max_abs_diff(p, orig) == 0.0);
}

TEST_CASE("bias-corrected first step moves a scalar by lr") {
    Tensor<double> p({1});
    p[0] = 1.0;
    Tensor<double> g({1});
    g[0] = 1.0;
    auto st = adamw_init<double>({&p});
    AdamWConfig<double> cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.0;
    adamw_step<double>({&p}, {&g}, st, cfg);
    // mhat = vhat = 1 after correction, so the step is lr/(1+eps)
    CHECK(p[0] == Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
    CHECK(p[0] == Approx(0.9).margin(1e-8));
}

TEST_CASE("pure decay branch multiplies by (1 - lr*wd) exactly") {
    Tensor<double> p({3});
    p[0] = 2.0;
    p[1] = -3.0;
    p[2] = 0.5;
    Tensor<double> g({3});
    auto st = adamw_init<double>({&p});
    AdamWConfig<double> cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.01;
    Tensor<double> expected = p;
    adamw_step<double>({&p}, {&g}, st, cfg);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(p[0 + i] == expected[i] * (1.0 - 0.1 * 0.01));
}

TEST_CASE("adamw reduces a simple quadratic") {
    // descend f(x) = 0.5 ||x - c||^2
    Tensor<double> p({8}), c({8});
    Rng rng(3);
    fill_uniform(p, rng, -1, 1);
    fill_uniform(c, rng, -1, 1);
    auto st = adamw_init<double>({&p});
    AdamWConfig<double> cfg;
    cfg.lr = 0.05;
    cfg.weight_decay = 0.0;
    auto f = [&]() {
        double s = 0;
        for (std::size_t i = 0; i < 8; ++i) s += 0.5 * (p[i] - c[i]) * (p[i] - c[i]);
        return s;
    };
    const double before = f();
    Tensor<double> g({8});
    for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < 8; ++i) g[i] = p[i] - c[i];
        adamw_step<double>({&p}, {&g}, st, cfg);
    }
    CHECK(f() < 0.01 * before);
}
