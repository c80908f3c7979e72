#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "mddpg/world.hpp"

namespace mddpg {

struct RewardConfig {
    // Clamp bounds sit just above the largest per-step distance change
    // (40*sqrt(2)), so slow-approach/fast-retreat cycles cannot farm the
    // field: within a step the reward equals the distance delta.
    // Attraction clamp bounds, L > l > 0.
    double attract_upper = 60.0; // L
    double attract_lower = 0.5;  // l
    // Repulsion clamp bounds, H > h > 0.
    double repulse_upper = 60.0; // H
    double repulse_lower = 0.5;  // h
    // Weights on (attraction, repulsion, collision, goal). The repulsion
    // formula is positive when the agent closes on an obstacle, so the
    // default weight is negative to penalize approach.
    double lambda1 = 1.0;
    double lambda2 = -1.0;
    double lambda3 = 1.0;
    double lambda4 = 1.0;
    // Repulsion is inactive beyond this distance to the nearest obstacle.
    double influence_radius = 120.0;

    double collision_reward = -50.0; // r3 when a collision happens
    double goal_reward = 200.0;      // r4 when the target is reached
};

struct StepRewardBreakdown {
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
    double total = 0.0;
};

// Delta = d_prev - d_next; positive deltas clamp into [l, L], negative into
// [-L, -l]. Branch selection is by the sign of delta.
inline double attraction_reward(double d_prev, double d_next,
                                const RewardConfig& cfg) {
    double delta = d_prev - d_next;
    if (delta >= 0.0)
        return std::clamp(delta, cfg.attract_lower, cfg.attract_upper);
    return std::clamp(delta, -cfg.attract_upper, -cfg.attract_lower);
}

// Same shape with the [h, H] bounds; zero outside the influence radius.
// Positive when the agent closes on the nearest obstacle.
inline double repulsion_reward(double d_prev, double d_next,
                               const RewardConfig& cfg) {
    if (d_next > cfg.influence_radius) return 0.0;
    double delta = d_prev - d_next;
    if (delta >= 0.0)
        return std::clamp(delta, cfg.repulse_lower, cfg.repulse_upper);
    return std::clamp(delta, -cfg.repulse_upper, -cfg.repulse_lower);
}

inline std::pair<double, double> terminal_rewards(const StepEvents& events,
                                                  const RewardConfig& cfg) {
    if (events.collided && events.reached)
        throw std::logic_error("collided and reached in the same step");
    double r3 = events.collided ? cfg.collision_reward : 0.0;
    double r4 = events.reached ? cfg.goal_reward : 0.0;
    return {r3, r4};
}

inline StepRewardBreakdown total_reward(double r1, double r2, double r3,
                                        double r4, const RewardConfig& cfg) {
    StepRewardBreakdown b;
    b.r1 = r1;
    b.r2 = r2;
    b.r3 = r3;
    b.r4 = r4;
    b.total = cfg.lambda1 * r1 + cfg.lambda2 * r2 + cfg.lambda3 * r3 +
              cfg.lambda4 * r4;
    return b;
}

inline StepRewardBreakdown shape_reward(const StepEvents& ev,
                                        const RewardConfig& cfg) {
    double r1 = attraction_reward(ev.dist_target_prev, ev.dist_target_next, cfg);
    double r2 = repulsion_reward(ev.dist_obstacle_prev, ev.dist_obstacle_next, cfg);
    auto [r3, r4] = terminal_rewards(ev, cfg);
    return total_reward(r1, r2, r3, r4, cfg);
}

} // namespace mddpg
