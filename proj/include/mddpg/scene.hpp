#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mddpg/vec2.hpp"

namespace mddpg {

struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double diagonal() const { return std::hypot(width(), height()); }
    bool contains(const Vec2& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
    Vec2 clamp(const Vec2& p) const {
        return {std::min(std::max(p.x, x_min), x_max),
                std::min(std::max(p.y, y_min), y_max)};
    }
};

struct StaticObstacle {
    Vec2 center;
    double radius = 0.0;
};

struct DynamicObstacleSpec {
    Vec2 start;
    double radius = 0.0;
    std::vector<Vec2> special_locations; // visited in cyclic order
    double speed_min = 0.0, speed_max = 0.0; // world units / step
    long dwell_min = 0, dwell_max = 0;       // steps
};

struct SceneConfig {
    Rect bounds;
    Vec2 agent_start;
    double agent_radius = 10.0;
    Vec2 target;
    double goal_radius = 20.0;
    long max_steps = 200;
    std::vector<StaticObstacle> statics;
    std::vector<DynamicObstacleSpec> dynamics;
    long k_static = 6;
    long k_dynamic = 5;
    long horizon = 5; // MPC prediction steps

    // Observation layout: [target offset | k_static | k_dynamic] pairs.
    long state_dim() const { return 2 * (1 + k_static + k_dynamic); }
};

// Scene-file parse failure; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(long line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

// A structurally valid file that violates a SceneConfig invariant.
class ValidationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

SceneConfig load_scene(const std::string& text);
SceneConfig load_scene_file(const std::string& path);
void validate_scene(const SceneConfig& cfg);

} // namespace mddpg
