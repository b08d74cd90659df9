#include <catch2/catch_amalgamated.hpp>

#include <reachcast/gru.hpp>
#include <reachcast/rng.hpp>

#include "oracle_helpers.hpp"

using namespace reachcast;
using Catch::Approx;

namespace {

GruParams<double> random_gru(std::size_t d, std::size_t h, Rng& rng, double scale = 0.5) {
    GruParams<double> p;
    p.w.resize({d, 3 * h});
    p.u.resize({h, 3 * h});
    p.b.resize({3 * h});
    fill_uniform(p.w, rng, -scale, scale);
    fill_uniform(p.u, rng, -scale, scale);
    fill_uniform(p.b, rng, -scale, scale);
    return p;
}

} // namespace

TEST_CASE("gru cell with all-zero parameters halves the previous state") {
    const std::size_t d = 4, h = 3, m = 2;
    GruParams<double> p;
    p.w.resize({d, 3 * h});
    p.u.resize({h, 3 * h});
    p.b.resize({3 * h});

    Tensor<double> x({m, d}), h_prev({m, h}), h_t;
    Rng rng(4);
    fill_uniform(x, rng, -1, 1);
    fill_uniform(h_prev, rng, -1, 1);
    // z = r = 0.5, hcand = 0 -> h' = 0.5 * h_prev
    gru_cell_forward(p, x, h_prev, h_t);
    for (std::size_t i = 0; i < h_t.size(); ++i)
        CHECK(h_t[i] == Approx(0.5 * h_prev[i]).margin(1e-14));

    // and from h_0 = 0 the whole sequence stays at zero
    Tensor<double> seq({5, m, d});
    fill_uniform(seq, rng, -1, 1);
    auto final_h = gru_forward(p, seq);
    for (std::size_t i = 0; i < final_h.size(); ++i) CHECK(final_h[i] == 0.0);
}

TEST_CASE("gru sequence consumes the time axis") {
    Rng rng(6);
    const std::size_t steps = 12, rows = 3 * 5, h = 96, d = 96;
    auto p = random_gru(d, h, rng, 0.1);
    Tensor<double> x({steps, rows, d});
    fill_uniform(x, rng, -1, 1);
    auto out = gru_forward(p, x);
    REQUIRE(out.shape() == std::vector<std::size_t>{rows, h});
    CHECK(out.all_finite());
}

TEST_CASE("gru sequence equals manual per-step cell application") {
    Rng rng(8);
    const std::size_t steps = 4, rows = 3, d = 5, h = 6;
    auto p = random_gru(d, h, rng);
    Tensor<double> x({steps, rows, d});
    fill_uniform(x, rng, -1, 1);

    Tensor<double> h_prev({rows, h}), h_t, x_t({rows, d});
    for (std::size_t t = 0; t < steps; ++t) {
        std::copy(x.data() + t * rows * d, x.data() + (t + 1) * rows * d, x_t.data());
        gru_cell_forward(p, x_t, h_prev, h_t);
        std::swap(h_prev, h_t);
    }
    auto fast = gru_forward(p, x);
    CHECK(max_abs_diff(fast, h_prev) < 1e-15);
}

TEST_CASE("BPTT gradients match finite differences over L=3") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t steps = 3, rows = 2, d = 4, h = 5;
        auto p = random_gru(d, h, rng);
        Tensor<double> x({steps, rows, d});
        fill_uniform(x, rng, -1, 1);

        auto loss_of = [&](const GruParams<double>& pp, const Tensor<double>& xx) {
            auto out = gru_forward(pp, xx);
            double s = 0;
            for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * out[i];
            return 0.5 * s;
        };

        GruCache<double> cache;
        auto out = gru_forward(p, x, &cache);
        GruParams<double> grads;
        Tensor<double> dx;
        gru_backward(p, cache, out, grads, &dx); // dL/dh_final = out

        auto perturbed_loss = [&](Tensor<double> GruParams<double>::* field,
                                  const Tensor<double>& t) {
            GruParams<double> q = p;
            q.*field = t;
            return loss_of(q, x);
        };
        auto gw = testutil::fd_gradient(
            [&](const Tensor<double>& t) { return perturbed_loss(&GruParams<double>::w, t); }, p.w);
        auto gu = testutil::fd_gradient(
            [&](const Tensor<double>& t) { return perturbed_loss(&GruParams<double>::u, t); }, p.u);
        auto gb = testutil::fd_gradient(
            [&](const Tensor<double>& t) { return perturbed_loss(&GruParams<double>::b, t); }, p.b);
        auto gx = testutil::fd_gradient([&](const Tensor<double>& t) { return loss_of(p, t); }, x);

        INFO("trial " << trial);
        CHECK(testutil::max_rel_err(grads.w, gw) < 1e-4);
        CHECK(testutil::max_rel_err(grads.u, gu) < 1e-4);
        CHECK(testutil::max_rel_err(grads.b, gb) < 1e-4);
        CHECK(testutil::max_rel_err(dx, gx) < 1e-4);
    }
}
