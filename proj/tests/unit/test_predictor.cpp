#include <doctest.h>

#include <cmath>

#include "mddpg/predictor.hpp"
#include "mddpg/rng.hpp"
#include "mddpg/scene.hpp"
#include "mddpg/world.hpp"

using namespace mddpg;

namespace {

HistoryBuffer buffer_of(std::initializer_list<Vec2> pts, size_t cap = 8) {
    HistoryBuffer b(cap);
    for (const auto& p : pts) b.record(p);
    return b;
}

// Independent rollout of the double-integrator model on one axis; used as
// the grid-search oracle. Deliberately written against the recurrence, not
// the closed form the implementation uses.
double axis_cost(const std::vector<double>& obs, double u, double rho) {
    double pos = obs[0];
    double vel = obs[1] - obs[0];
    double cost = 0.0;
    for (size_t k = 1; k + 1 < obs.size(); ++k) {
        pos = pos + vel;
        vel = vel + u;
        double predicted_next = pos + vel;
        double diff = predicted_next - obs[k + 1];
        cost += diff * diff;
    }
    return cost + rho * static_cast<double>(obs.size() - 1) * u * u;
}

double grid_min_cost(const std::vector<double>& xs,
                     const std::vector<double>& ys,
                     const PredictorConfig& cfg, double grid_step) {
    double best_x = std::numeric_limits<double>::infinity();
    double best_y = std::numeric_limits<double>::infinity();
    long n = static_cast<long>(std::llround(2.0 * cfg.u_max / grid_step));
    for (long i = 0; i <= n; ++i) {
        double u = -cfg.u_max + static_cast<double>(i) * grid_step;
        best_x = std::min(best_x, axis_cost(xs, u, cfg.control_penalty));
        best_y = std::min(best_y, axis_cost(ys, u, cfg.control_penalty));
    }
    // The rho term is charged per axis above but once per |u|^2 overall;
    // splitting |u|^2 = ux^2 + uy^2 makes the axis sum exact.
    return best_x + best_y;
}

} // namespace

TEST_CASE("record keeps a bounded chronological window") {
    HistoryBuffer b(8);
    b.record({1.0, 2.0});
    CHECK(b.size() == 1);
    for (int i = 0; i < 8; ++i)
        b.record({static_cast<double>(i), 0.0});
    CHECK(b.size() == 8);
    CHECK(b[0] == Vec2{0.0, 0.0}); // the (1,2) entry was evicted

    HistoryBuffer dup(4);
    dup.record({3.0, 3.0});
    dup.record({3.0, 3.0});
    CHECK(dup.size() == 2); // no dedup
}

TEST_CASE("constant-velocity history fits with zero control and zero cost") {
    PredictorConfig cfg;
    auto fit = fit_controls(buffer_of({{0, 0}, {1, 1}, {2, 2}}), cfg);
    CHECK(fit.anchor_velocity.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.anchor_velocity.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.control.x) < 1e-12);
    CHECK(std::abs(fit.control.y) < 1e-12);
    CHECK(fit.cost < 1e-12);
}

TEST_CASE("constant-acceleration track is recovered exactly without penalty") {
    PredictorConfig cfg;
    cfg.control_penalty = 0.0;
    auto fit =
        fit_controls(buffer_of({{0, 0}, {1, 0}, {3, 0}, {6, 0}}), cfg);
    CHECK(fit.control.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fit.control.y) < 1e-12);
    CHECK(fit.cost < 1e-9);
    CHECK(fit.anchor_velocity.x == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("fit needs two points") {
    PredictorConfig cfg;
    CHECK_THROWS_AS(fit_controls(buffer_of({{4, 4}}), cfg),
                    InsufficientHistory);
}

TEST_CASE("fitted cost never beats the grid-search oracle by more than 1e-6") {
    PredictorConfig cfg;
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        size_t n = 4 + static_cast<size_t>(rng.uniform_int(0, 4));
        HistoryBuffer buf(8);
        std::vector<double> xs, ys;
        Vec2 pos{rng.uniform(-50, 50), rng.uniform(-50, 50)};
        Vec2 vel{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        Vec2 acc{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        for (size_t k = 0; k < n; ++k) {
            Vec2 noisy{pos.x + rng.uniform(-0.5, 0.5),
                       pos.y + rng.uniform(-0.5, 0.5)};
            buf.record(noisy);
            xs.push_back(noisy.x);
            ys.push_back(noisy.y);
            pos += vel;
            vel += acc;
        }
        double fitted = fit_controls(buf, cfg).cost;
        double oracle = grid_min_cost(xs, ys, cfg, 1e-3);
        CHECK(fitted <= oracle + 1e-6);
    }
}

TEST_CASE("model-generated histories are reproduced exactly") {
    PredictorConfig cfg;
    cfg.control_penalty = 0.0;
    cfg.horizon = 4;
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        Vec2 pos{rng.uniform(-100, 100), rng.uniform(-100, 100)};
        Vec2 vel{rng.uniform(-8, 8), rng.uniform(-8, 8)};
        Vec2 acc{rng.uniform(-cfg.u_max, cfg.u_max),
                 rng.uniform(-cfg.u_max, cfg.u_max)};
        HistoryBuffer buf(8);
        for (int k = 0; k < 8; ++k) {
            buf.record(pos);
            pos += vel;
            vel += acc;
        }
        auto fit = fit_controls(buf, cfg);
        CHECK(fit.cost < 1e-9);
        auto future = predict(buf, cfg);
        Vec2 p = buf.back(), v = fit.anchor_velocity;
        for (long k = 0; k < cfg.horizon; ++k) {
            // The generator continues from where the history stopped.
            CHECK(distance(future[static_cast<size_t>(k)], pos) < 1e-9);
            pos += vel;
            vel += acc;
            (void)p;
            (void)v;
        }
    }
}

TEST_CASE("prediction extrapolates constant velocity") {
    PredictorConfig cfg;
    cfg.horizon = 3;
    auto out = predict(buffer_of({{0, 0}, {1, 0}, {2, 0}}), cfg);
    REQUIRE(out.size() == 3);
    CHECK(distance(out[0], {3, 0}) < 1e-12);
    CHECK(distance(out[1], {4, 0}) < 1e-12);
    CHECK(distance(out[2], {5, 0}) < 1e-12);
}

TEST_CASE("degenerate buffers fall back to the stationary prediction") {
    PredictorConfig cfg;
    cfg.horizon = 2;
    auto out = predict(buffer_of({{4, 4}}), cfg);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == Vec2{4, 4});
    CHECK(out[1] == Vec2{4, 4});

    cfg.horizon = 5;
    auto flat = predict(buffer_of({{7, 1}, {7, 1}, {7, 1}}), cfg);
    REQUIRE(flat.size() == 5);
    for (const auto& p : flat) CHECK(distance(p, {7, 1}) < 1e-12);

    CHECK_THROWS_AS(predict(HistoryBuffer(8), cfg), EmptyHistory);
}

TEST_CASE("translation equivariance") {
    PredictorConfig cfg;
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        HistoryBuffer a(8), b(8);
        Vec2 shift{rng.uniform(-200, 200), rng.uniform(-200, 200)};
        for (int k = 0; k < 6; ++k) {
            Vec2 p{rng.uniform(-50, 50), rng.uniform(-50, 50)};
            a.record(p);
            b.record(p + shift);
        }
        auto pa = predict(a, cfg);
        auto pb = predict(b, cfg);
        for (size_t k = 0; k < pa.size(); ++k)
            CHECK(distance(pa[k] + shift, pb[k]) < 1e-9);
    }
}

TEST_CASE("prediction outputs are always finite and horizon-long") {
    PredictorConfig cfg;
    cfg.horizon = 7;
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        HistoryBuffer buf(8);
        int n = 1 + static_cast<int>(rng.uniform_int(0, 7));
        for (int k = 0; k < n; ++k)
            buf.record({rng.uniform(-1000, 1000), rng.uniform(-1000, 1000)});
        auto out = predict(buf, cfg);
        REQUIRE(out.size() == 7);
        for (const auto& p : out) CHECK(p.finite());
    }
}

TEST_CASE("prediction_error basics") {
    CHECK(prediction_error({{1, 1}, {2, 2}}, {{1, 1}, {2, 2}}) == 0.0);
    CHECK(prediction_error({{0, 0}, {0, 0}}, {{3, 4}, {3, 4}}) ==
          doctest::Approx(5.0));
    CHECK_THROWS_AS(prediction_error({{0, 0}}, {{0, 0}, {1, 1}}),
                    std::invalid_argument);
}

TEST_CASE("constant-velocity obstacle is predicted with near-zero error") {
    // An obstacle far from its waypoint moves at a fixed speed: the next
    // horizon steps are exactly constant velocity.
    SceneConfig cfg = load_scene(
        "bounds 0 0 1000 400\nagent 60 200\ntarget 940 200\n"
        "dynamic\nstart 100 50\nspecial 900 50\nspecial 100 50\n"
        "speed 6 6\ndwell 2 4\nend\n");
    WorldState w = reset(cfg, 17);
    for (int i = 0; i < 6; ++i) step(cfg, w, {0.0, 0.0});

    PredictorConfig pcfg;
    pcfg.horizon = cfg.horizon;
    auto predicted = predict(w.obstacles[0].history, pcfg);

    std::vector<Vec2> realized;
    for (long k = 0; k < cfg.horizon; ++k) {
        step(cfg, w, {0.0, 0.0});
        realized.push_back(w.obstacles[0].position);
    }
    CHECK(prediction_error(predicted, realized) < 1e-9);
}
