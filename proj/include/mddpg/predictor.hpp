#pragma once

#include <stdexcept>
#include <vector>

#include "mddpg/world.hpp"

namespace mddpg {

// Double-integrator fit: position += velocity, velocity += control, with one
// constant control over the observed window.
struct PredictorConfig {
    long horizon = 5;            // rollout steps N
    long fit_window = 8;         // history capacity W
    double control_penalty = 0.01; // rho
    double u_max = 5.0;          // per-component control clamp
};

struct ControlFit {
    Vec2 anchor_position;  // latest observed position (feedback correction)
    Vec2 anchor_velocity;  // fitted velocity at the latest observation
    Vec2 control;          // constant per-step acceleration, clamped
    double cost = 0.0;     // J at the returned control
};

class InsufficientHistory : public std::runtime_error {
    using std::runtime_error::runtime_error;
};
class EmptyHistory : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Minimizes J = sum_k |y_k - p_k|^2 + rho * sum_k |u|^2 over constant
// controls, where y_k rolls the model from the earliest buffered point with
// the first difference as initial velocity.
ControlFit fit_controls(const HistoryBuffer& buffer, const PredictorConfig& cfg);

// Evaluates the same J at an arbitrary control (shared by fit and tests).
double rollout_cost(const HistoryBuffer& buffer, const PredictorConfig& cfg,
                    const Vec2& control);

// N future positions from the latest observation. Buffers with fewer than
// two points fall back to repeating the last known position.
std::vector<Vec2> predict(const HistoryBuffer& buffer,
                          const PredictorConfig& cfg);

// Mean pointwise Euclidean distance between two equal-length tracks.
double prediction_error(const std::vector<Vec2>& predicted,
                        const std::vector<Vec2>& realized);

} // namespace mddpg
