#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mddpg/neural.hpp"

using namespace mddpg;

namespace {

MlpParams random_net(const std::vector<long>& dims, Activation hidden,
                     Activation output, std::uint64_t seed) {
    Rng rng(seed);
    return make_mlp(dims, hidden, output, rng);
}

std::vector<double> random_vector(size_t n, Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

// Second forward implementation with a different loop organization
// (column-major accumulation), used as an independent oracle.
std::vector<double> forward_oracle(const MlpParams& net,
                                   std::vector<double> x) {
    for (const auto& layer : net.layers) {
        std::vector<double> z(layer.b.begin(), layer.b.end());
        for (long k = 0; k < layer.in; ++k)
            for (long o = 0; o < layer.out; ++o)
                z[static_cast<size_t>(o)] +=
                    layer.w[static_cast<size_t>(o * layer.in + k)] *
                    x[static_cast<size_t>(k)];
        for (auto& v : z) {
            switch (layer.act) {
                case Activation::ReLU: v = v > 0.0 ? v : 0.0; break;
                case Activation::Tanh: v = std::tanh(v); break;
                case Activation::Identity: break;
            }
        }
        x = std::move(z);
    }
    return x;
}

double loss_of(const MlpParams& net, const std::vector<double>& input,
               const std::vector<double>& weights) {
    ForwardCache cache;
    auto out = forward(net, input, cache);
    double loss = 0.0;
    for (size_t i = 0; i < out.size(); ++i) loss += weights[i] * out[i];
    return loss;
}

// Relative-error finite-difference check of every parameter gradient.
double max_fd_error(MlpParams net, const std::vector<double>& input,
                    const std::vector<double>& out_weights,
                    double eps = 1e-5) {
    ForwardCache cache;
    forward(net, input, cache);
    auto [grads, input_grad] = backward(net, cache, out_weights);

    double worst = 0.0;
    auto probe = [&](std::vector<double>& param, size_t i, double analytic) {
        double saved = param[i];
        param[i] = saved + eps;
        double up = loss_of(net, input, out_weights);
        param[i] = saved - eps;
        double down = loss_of(net, input, out_weights);
        param[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    };
    for (size_t l = 0; l < net.layers.size(); ++l) {
        for (size_t i = 0; i < net.layers[l].w.size(); ++i)
            probe(net.layers[l].w, i, grads.layers[l].dw[i]);
        for (size_t i = 0; i < net.layers[l].b.size(); ++i)
            probe(net.layers[l].b, i, grads.layers[l].db[i]);
    }
    // Input gradient via the same central difference.
    std::vector<double> x = input;
    for (size_t i = 0; i < x.size(); ++i) {
        double saved = x[i];
        x[i] = saved + eps;
        double up = loss_of(net, x, out_weights);
        x[i] = saved - eps;
        double down = loss_of(net, x, out_weights);
        x[i] = saved;
        double numeric = (up - down) / (2.0 * eps);
        double analytic = input_grad[i];
        double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
    return worst;
}

} // namespace

TEST_CASE("identity layer passes its input through") {
    MlpParams net;
    Layer layer;
    layer.in = 2;
    layer.out = 2;
    layer.act = Activation::Identity;
    layer.w = {1.0, 0.0, 0.0, 1.0};
    layer.b = {0.0, 0.0};
    net.layers.push_back(layer);

    ForwardCache cache;
    auto out = forward(net, {1.0, 2.0}, cache);
    CHECK(out == std::vector<double>{1.0, 2.0});
}

TEST_CASE("zero network maps everything to zero") {
    MlpParams net = random_net({3, 4, 2}, Activation::ReLU, Activation::Tanh, 1);
    for (auto& l : net.layers) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    ForwardCache cache;
    auto out = forward(net, {0.3, -0.7, 2.0}, cache);
    CHECK(out == std::vector<double>{0.0, 0.0});
}

TEST_CASE("forward agrees with an independent implementation to 1e-12") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto net = random_net({5, 16, 8, 3}, Activation::ReLU, Activation::Tanh,
                              1000 + static_cast<std::uint64_t>(trial));
        auto input = random_vector(5, rng, -2.0, 2.0);
        ForwardCache cache;
        auto got = forward(net, input, cache);
        auto want = forward_oracle(net, input);
        REQUIRE(got.size() == want.size());
        for (size_t i = 0; i < got.size(); ++i)
            CHECK(std::abs(got[i] - want[i]) < 1e-12);
    }
}

TEST_CASE("forward is pure: identical inputs give identical outputs") {
    auto net = random_net({4, 8, 2}, Activation::ReLU, Activation::Tanh, 3);
    ForwardCache c1, c2;
    auto a = forward(net, {0.1, 0.2, 0.3, 0.4}, c1);
    auto b = forward(net, {0.1, 0.2, 0.3, 0.4}, c2);
    CHECK(a == b);
}

TEST_CASE("batched forward equals per-sample forward") {
    auto net = random_net({4, 8, 3}, Activation::ReLU, Activation::Identity, 9);
    Rng rng(4);
    std::vector<double> batch = random_vector(4 * 5, rng);
    ForwardCache bc;
    forward_batch(net, batch.data(), 5, bc);
    for (size_t i = 0; i < 5; ++i) {
        std::vector<double> one(batch.begin() + static_cast<long>(i * 4),
                                batch.begin() + static_cast<long>(i * 4 + 4));
        ForwardCache sc;
        auto out = forward(net, one, sc);
        for (size_t o = 0; o < 3; ++o)
            CHECK(out[o] == doctest::Approx(bc.output[i * 3 + o]).epsilon(1e-15));
    }
}

TEST_CASE("linear layer backward gives dW = g x^T") {
    MlpParams net;
    Layer layer;
    layer.in = 3;
    layer.out = 2;
    layer.act = Activation::Identity;
    layer.w = {0.5, -0.2, 0.1, 0.3, 0.7, -0.4};
    layer.b = {0.0, 0.0};
    net.layers.push_back(layer);

    std::vector<double> x{1.0, 2.0, 3.0};
    ForwardCache cache;
    forward(net, x, cache);
    auto [grads, input_grad] = backward(net, cache, {2.0, -1.0});

    std::vector<double> expect_dw{2.0, 4.0, 6.0, -1.0, -2.0, -3.0};
    for (size_t i = 0; i < expect_dw.size(); ++i)
        CHECK(grads.layers[0].dw[i] == doctest::Approx(expect_dw[i]));
    CHECK(grads.layers[0].db[0] == 2.0);
    CHECK(grads.layers[0].db[1] == -1.0);
    // dL/dx = W^T g
    CHECK(input_grad[0] == doctest::Approx(2.0 * 0.5 - 1.0 * 0.3));
    CHECK(input_grad[1] == doctest::Approx(2.0 * -0.2 - 1.0 * 0.7));
    CHECK(input_grad[2] == doctest::Approx(2.0 * 0.1 - 1.0 * -0.4));
}

TEST_CASE("zero output gradient yields all-zero parameter gradients") {
    auto net = random_net({3, 6, 2}, Activation::Tanh, Activation::Identity, 5);
    ForwardCache cache;
    forward(net, {0.5, -0.5, 1.0}, cache);
    auto [grads, input_grad] = backward(net, cache, {0.0, 0.0});
    for (const auto& l : grads.layers) {
        for (double g : l.dw) CHECK(g == 0.0);
        for (double g : l.db) CHECK(g == 0.0);
    }
    for (double g : input_grad) CHECK(g == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(11);
    for (Activation act :
         {Activation::ReLU, Activation::Tanh, Activation::Identity}) {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<long> dims{3, 1 + rng.uniform_int(1, 6),
                                   1 + rng.uniform_int(1, 6), 2};
            auto net = random_net(dims, act, Activation::Identity,
                                  500 + static_cast<std::uint64_t>(trial));
            auto input = random_vector(3, rng);
            auto weights = random_vector(2, rng);
            CHECK(max_fd_error(net, input, weights) < 1e-4);
        }
    }
}

TEST_CASE("adam leaves parameters unchanged on a zero gradient") {
    auto net = random_net({3, 4, 1}, Activation::ReLU, Activation::Identity, 8);
    MlpParams before = net;
    AdamState st = make_adam_state(net);
    adam_step(net, zero_gradients(net), st, 1e-3);
    for (size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].w == before.layers[l].w);
        CHECK(net.layers[l].b == before.layers[l].b);
    }
}

TEST_CASE("first adam step moves each touched coordinate by about lr") {
    auto net = random_net({2, 3, 1}, Activation::Tanh, Activation::Identity, 2);
    MlpParams before = net;
    GradientSet g = zero_gradients(net);
    Rng rng(6);
    for (auto& l : g.layers) {
        for (auto& x : l.dw) x = rng.uniform(0.5, 2.0) * (rng.next_double() < 0.5 ? -1 : 1);
        for (auto& x : l.db) x = rng.uniform(0.5, 2.0) * (rng.next_double() < 0.5 ? -1 : 1);
    }
    AdamState st = make_adam_state(net);
    double lr = 1e-2;
    adam_step(net, g, st, lr);
    for (size_t l = 0; l < net.layers.size(); ++l)
        for (size_t i = 0; i < net.layers[l].w.size(); ++i) {
            double delta = before.layers[l].w[i] - net.layers[l].w[i];
            double grad = g.layers[l].dw[i];
            // Bias-corrected first step is lr * sign(g) up to eps effects.
            CHECK(std::abs(delta) == doctest::Approx(lr).epsilon(1e-4));
            CHECK(delta * grad > 0.0);
        }
}

TEST_CASE("adam matches an independently coded recurrence for several steps") {
    MlpParams net;
    Layer layer;
    layer.in = 1;
    layer.out = 1;
    layer.act = Activation::Identity;
    layer.w = {0.7};
    layer.b = {-0.2};
    net.layers.push_back(layer);
    AdamState st = make_adam_state(net);

    double w = 0.7, b = -0.2;
    double mw = 0, vw = 0, mb = 0, vb = 0;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = 0.05;
    std::vector<std::pair<double, double>> grads{
        {0.3, -0.1}, {-1.2, 0.4}, {0.9, 0.9}, {0.0, -0.5}};
    for (size_t t = 1; t <= grads.size(); ++t) {
        auto [gw, gb] = grads[t - 1];
        GradientSet g = zero_gradients(net);
        g.layers[0].dw[0] = gw;
        g.layers[0].db[0] = gb;
        adam_step(net, g, st, lr);

        mw = beta1 * mw + (1 - beta1) * gw;
        vw = beta2 * vw + (1 - beta2) * gw * gw;
        mb = beta1 * mb + (1 - beta1) * gb;
        vb = beta2 * vb + (1 - beta2) * gb * gb;
        double t_d = static_cast<double>(t);
        w -= lr * (mw / (1 - std::pow(beta1, t_d))) /
             (std::sqrt(vw / (1 - std::pow(beta2, t_d))) + eps);
        b -= lr * (mb / (1 - std::pow(beta1, t_d))) /
             (std::sqrt(vb / (1 - std::pow(beta2, t_d))) + eps);
        CHECK(net.layers[0].w[0] == doctest::Approx(w).epsilon(1e-14));
        CHECK(net.layers[0].b[0] == doctest::Approx(b).epsilon(1e-14));
    }
}

TEST_CASE("adam is deterministic") {
    auto net1 = random_net({3, 5, 2}, Activation::ReLU, Activation::Tanh, 12);
    auto net2 = net1;
    AdamState s1 = make_adam_state(net1), s2 = make_adam_state(net2);
    GradientSet g = zero_gradients(net1);
    Rng rng(3);
    for (auto& l : g.layers)
        for (auto& x : l.dw) x = rng.uniform(-1, 1);
    adam_step(net1, g, s1, 1e-3);
    adam_step(net2, g, s2, 1e-3);
    for (size_t l = 0; l < net1.layers.size(); ++l)
        CHECK(net1.layers[l].w == net2.layers[l].w);
}

TEST_CASE("soft update arithmetic and contraction") {
    MlpParams online;
    Layer layer;
    layer.in = 1;
    layer.out = 1;
    layer.act = Activation::Identity;
    layer.w = {20.0};
    layer.b = {0.0};
    online.layers.push_back(layer);
    MlpParams target = online;
    target.layers[0].w[0] = 10.0;

    SUBCASE("tau 0.01 on the documented example") {
        soft_update(target, online, 0.01);
        CHECK(target.layers[0].w[0] == doctest::Approx(10.1).epsilon(1e-15));
    }
    SUBCASE("tau 1 copies, tau 0 is a no-op") {
        MlpParams t2 = target;
        soft_update(t2, online, 1.0);
        CHECK(t2.layers[0].w[0] == 20.0);
        MlpParams t3 = target;
        soft_update(t3, online, 0.0);
        CHECK(t3.layers[0].w[0] == 10.0);
    }
    SUBCASE("n updates contract the gap by (1-tau)^n") {
        auto net = random_net({4, 8, 2}, Activation::ReLU, Activation::Tanh, 4);
        auto tgt = random_net({4, 8, 2}, Activation::ReLU, Activation::Tanh, 5);
        const double tau = 0.05;
        std::vector<double> gap0;
        for (size_t l = 0; l < net.layers.size(); ++l)
            for (size_t i = 0; i < net.layers[l].w.size(); ++i)
                gap0.push_back(tgt.layers[l].w[i] - net.layers[l].w[i]);
        int n = 25;
        for (int k = 0; k < n; ++k) soft_update(tgt, net, tau);
        double factor = std::pow(1.0 - tau, n);
        size_t idx = 0;
        for (size_t l = 0; l < net.layers.size(); ++l)
            for (size_t i = 0; i < net.layers[l].w.size(); ++i) {
                double gap = tgt.layers[l].w[i] - net.layers[l].w[i];
                CHECK(gap == doctest::Approx(factor * gap0[idx]).epsilon(1e-12));
                ++idx;
            }
    }
    SUBCASE("shape mismatch throws") {
        auto other = random_net({2, 2}, Activation::ReLU, Activation::Tanh, 6);
        CHECK_THROWS_AS(soft_update(other, online, 0.5), std::invalid_argument);
    }
}

TEST_CASE("initialization is bounded by 1/sqrt(fan_in) and seeded") {
    Rng r1(17), r2(17);
    auto a = make_mlp({9, 16, 4}, Activation::ReLU, Activation::Tanh, r1);
    auto b = make_mlp({9, 16, 4}, Activation::ReLU, Activation::Tanh, r2);
    for (size_t l = 0; l < a.layers.size(); ++l) {
        CHECK(a.layers[l].w == b.layers[l].w);
        double bound = 1.0 / std::sqrt(static_cast<double>(a.layers[l].in));
        for (double w : a.layers[l].w) {
            CHECK(w <= bound);
            CHECK(w >= -bound);
        }
    }
    CHECK(all_finite(a));
}

TEST_CASE("every operation preserves finiteness") {
    Rng rng(23);
    auto net = make_mlp({6, 12, 3}, Activation::ReLU, Activation::Tanh, rng);
    AdamState st = make_adam_state(net);
    for (int iter = 0; iter < 50; ++iter) {
        auto input = random_vector(6, rng, -3.0, 3.0);
        ForwardCache cache;
        auto out = forward(net, input, cache);
        auto [grads, ig] = backward(net, cache, random_vector(3, rng));
        adam_step(net, grads, st, 1e-2);
        REQUIRE(all_finite(net));
        for (double v : out) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    auto net = random_net({3, 4, 2}, Activation::ReLU, Activation::Tanh, 2);
    ForwardCache cache;
    CHECK_THROWS_AS(forward(net, {1.0, 2.0}, cache), std::invalid_argument);
    forward(net, {1.0, 2.0, 3.0}, cache);
    CHECK_THROWS_AS(backward(net, cache, {1.0}), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip byte-exactly") {
    namespace fs = std::filesystem;
    auto net = random_net({7, 9, 2}, Activation::ReLU, Activation::Tanh, 31);
    fs::path dir = fs::temp_directory_path() / "mddpg_ckpt_test";
    fs::create_directories(dir);
    std::string p1 = (dir / "a.net").string();
    std::string p2 = (dir / "b.net").string();

    save_network(net, p1);
    MlpParams loaded = load_network(p1);
    REQUIRE(same_shape(net, loaded));
    for (size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].w == loaded.layers[l].w);
        CHECK(net.layers[l].b == loaded.layers[l].b);
        CHECK(net.layers[l].act == loaded.layers[l].act);
    }

    save_network(loaded, p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
    CHECK(b1.substr(0, 8) == "MDDPGNET");

    CHECK_THROWS(load_network((dir / "missing.net").string()));
    fs::remove_all(dir);
}
