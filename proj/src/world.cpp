#include "mddpg/world.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace mddpg {

WorldState reset(const SceneConfig& cfg, std::uint64_t seed,
                 size_t history_capacity) {
    WorldState w;
    w.rng = Rng(seed);
    w.agent_pos = cfg.agent_start;
    w.path_log.push_back(w.agent_pos);
    w.obstacles.reserve(cfg.dynamics.size());
    for (const auto& spec : cfg.dynamics) {
        ObstacleState s;
        s.position = spec.start;
        s.mode = ObstacleMode::Moving;
        s.target_index = 0;
        s.speed = w.rng.uniform(spec.speed_min, spec.speed_max);
        s.history = HistoryBuffer(history_capacity);
        s.history.record(s.position);
        w.obstacles.push_back(std::move(s));
    }
    return w;
}

void advance_obstacle(ObstacleState& state, const DynamicObstacleSpec& spec,
                      Rng& rng) {
    auto begin_moving = [&](size_t next_index) {
        state.target_index = next_index % spec.special_locations.size();
        state.speed = rng.uniform(spec.speed_min, spec.speed_max);
        state.mode = ObstacleMode::Moving;
        state.remaining_steps = 0;
    };

    if (state.mode == ObstacleMode::Dwelling) {
        if (state.remaining_steps > 0) --state.remaining_steps;
        if (state.remaining_steps == 0) begin_moving(state.target_index + 1);
    } else {
        const Vec2& goal = spec.special_locations[state.target_index];
        Vec2 delta = goal - state.position;
        double dist = delta.norm();
        if (dist <= state.speed) {
            // Arrival: snap to the location, then dwell for a random time.
            state.position = goal;
            long dwell = rng.uniform_int(spec.dwell_min, spec.dwell_max);
            if (dwell == 0) {
                begin_moving(state.target_index + 1);
            } else {
                state.mode = ObstacleMode::Dwelling;
                state.remaining_steps = dwell;
            }
        } else {
            state.position += delta * (state.speed / dist);
        }
    }
    state.history.record(state.position);
}

double nearest_obstacle_distance(const SceneConfig& cfg,
                                 const std::vector<ObstacleState>& obstacles,
                                 const Vec2& from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : cfg.statics)
        best = std::min(best, distance(from, s.center));
    for (const auto& o : obstacles)
        best = std::min(best, distance(from, o.position));
    return best;
}

StepEvents step(const SceneConfig& cfg, WorldState& world,
                std::array<double, 2> action) {
    if (world.status != EpisodeStatus::Running)
        throw std::logic_error("step() called on a terminal world");
    if (!std::isfinite(action[0]) || !std::isfinite(action[1]))
        throw std::invalid_argument("non-finite action");

    StepEvents ev;
    ev.dist_target_prev = distance(world.agent_pos, cfg.target);
    ev.dist_obstacle_prev =
        nearest_obstacle_distance(cfg, world.obstacles, world.agent_pos);

    Vec2 displaced = world.agent_pos +
                     Vec2{action[0] * kActionScale, action[1] * kActionScale};
    world.agent_pos = cfg.bounds.clamp(displaced);

    for (size_t i = 0; i < world.obstacles.size(); ++i)
        advance_obstacle(world.obstacles[i], cfg.dynamics[i], world.rng);

    ++world.step_count;
    world.path_log.push_back(world.agent_pos);

    ev.dist_target_next = distance(world.agent_pos, cfg.target);
    ev.dist_obstacle_next =
        nearest_obstacle_distance(cfg, world.obstacles, world.agent_pos);

    bool collided = false;
    for (const auto& s : cfg.statics)
        collided |= distance(world.agent_pos, s.center) <
                    cfg.agent_radius + s.radius;
    for (size_t i = 0; i < world.obstacles.size(); ++i)
        collided |= distance(world.agent_pos, world.obstacles[i].position) <
                    cfg.agent_radius + cfg.dynamics[i].radius;

    ev.collided = collided;
    ev.reached = !collided && ev.dist_target_next <= cfg.goal_radius;

    if (ev.collided)
        world.status = EpisodeStatus::Collided;
    else if (ev.reached)
        world.status = EpisodeStatus::ReachedGoal;
    else if (world.step_count >= cfg.max_steps)
        world.status = EpisodeStatus::TimedOut;
    return ev;
}

std::vector<double> build_observation(const SceneConfig& cfg,
                                      const WorldState& world,
                                      const std::vector<Vec2>& predictions) {
    if (predictions.size() != world.obstacles.size())
        throw std::invalid_argument(
            "build_observation: prediction count mismatch");

    const double sentinel = cfg.bounds.diagonal();
    std::vector<double> out;
    out.reserve(static_cast<size_t>(cfg.state_dim()));
    Vec2 agent = world.agent_pos;

    out.push_back(cfg.target.x - agent.x);
    out.push_back(cfg.target.y - agent.y);

    // k nearest by Euclidean distance, ties broken by lower index.
    auto append_nearest = [&](const std::vector<Vec2>& points, long k) {
        std::vector<size_t> idx(points.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            double da = distance(points[a], agent);
            double db = distance(points[b], agent);
            return da != db ? da < db : a < b;
        });
        for (long slot = 0; slot < k; ++slot) {
            if (slot < static_cast<long>(idx.size())) {
                const Vec2& p = points[idx[static_cast<size_t>(slot)]];
                out.push_back(p.x - agent.x);
                out.push_back(p.y - agent.y);
            } else {
                out.push_back(sentinel);
                out.push_back(sentinel);
            }
        }
    };

    std::vector<Vec2> static_centers;
    static_centers.reserve(cfg.statics.size());
    for (const auto& s : cfg.statics) static_centers.push_back(s.center);
    append_nearest(static_centers, cfg.k_static);
    append_nearest(predictions, cfg.k_dynamic);
    return out;
}

} // namespace mddpg
