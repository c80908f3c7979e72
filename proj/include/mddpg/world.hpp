#pragma once

#include <array>
#include <deque>
#include <vector>

#include "mddpg/rng.hpp"
#include "mddpg/scene.hpp"

namespace mddpg {

// Per-step agent displacement scale: action components in (-1,1) map to
// world displacements of up to 40 units per axis.
inline constexpr double kActionScale = 40.0;

// Bounded FIFO of recent positions, oldest first.
class HistoryBuffer {
public:
    explicit HistoryBuffer(size_t capacity = 8) : capacity_(capacity) {}

    void record(const Vec2& p) {
        points_.push_back(p);
        if (points_.size() > capacity_) points_.pop_front();
    }
    size_t size() const { return points_.size(); }
    size_t capacity() const { return capacity_; }
    bool empty() const { return points_.empty(); }
    const Vec2& operator[](size_t i) const { return points_[i]; }
    const Vec2& back() const { return points_.back(); }
    bool operator==(const HistoryBuffer& o) const {
        return capacity_ == o.capacity_ && points_ == o.points_;
    }

private:
    size_t capacity_;
    std::deque<Vec2> points_;
};

enum class ObstacleMode { Moving, Dwelling };

struct ObstacleState {
    Vec2 position;
    ObstacleMode mode = ObstacleMode::Moving;
    size_t target_index = 0;   // Moving: current special location
    double speed = 0.0;        // Moving: world units per step
    long remaining_steps = 0;  // Dwelling: steps left at the location
    HistoryBuffer history{8};

    bool operator==(const ObstacleState& o) const {
        return position == o.position && mode == o.mode &&
               target_index == o.target_index && speed == o.speed &&
               remaining_steps == o.remaining_steps && history == o.history;
    }
};

enum class EpisodeStatus { Running, ReachedGoal, Collided, TimedOut };

struct WorldState {
    Vec2 agent_pos;
    std::vector<ObstacleState> obstacles;
    long step_count = 0;
    EpisodeStatus status = EpisodeStatus::Running;
    std::vector<Vec2> path_log; // length = step_count + 1
    Rng rng{0};

    bool operator==(const WorldState& o) const {
        return agent_pos == o.agent_pos && obstacles == o.obstacles &&
               step_count == o.step_count && status == o.status &&
               path_log == o.path_log && rng == o.rng;
    }
};

// Inputs the reward shaping needs from one step.
struct StepEvents {
    bool collided = false;
    bool reached = false;
    double dist_target_prev = 0.0;
    double dist_target_next = 0.0;
    double dist_obstacle_prev = 0.0; // nearest obstacle, center distance
    double dist_obstacle_next = 0.0;
};

WorldState reset(const SceneConfig& cfg, std::uint64_t seed,
                 size_t history_capacity = 8);

// Advances the agent by (ax, ay) * 40 clamped to bounds, advances every
// obstacle, and resolves collision -> goal -> timeout in that order.
StepEvents step(const SceneConfig& cfg, WorldState& world,
                std::array<double, 2> action);

void advance_obstacle(ObstacleState& state, const DynamicObstacleSpec& spec,
                      Rng& rng);

// Smallest center distance from `from` to any obstacle (statics pooled with
// dynamics at their current positions); +infinity when the scene has none.
double nearest_obstacle_distance(const SceneConfig& cfg,
                                 const std::vector<ObstacleState>& obstacles,
                                 const Vec2& from);

// Observation layout: [target offset | k_static nearest static offsets |
// k_dynamic nearest predicted dynamic offsets], offsets are (other - agent),
// missing slots padded with the bounds-diagonal sentinel.
std::vector<double> build_observation(const SceneConfig& cfg,
                                      const WorldState& world,
                                      const std::vector<Vec2>& predictions);

} // namespace mddpg
