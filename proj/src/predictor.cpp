#include "mddpg/predictor.hpp"

#include <algorithm>
#include <cmath>

namespace mddpg {

namespace {

double clamp(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

} // namespace

double rollout_cost(const HistoryBuffer& buffer, const PredictorConfig& cfg,
                    const Vec2& control) {
    const size_t m = buffer.size();
    Vec2 pos = buffer[0];
    Vec2 vel = buffer[1] - buffer[0];
    double cost = 0.0;
    for (size_t k = 1; k + 1 < m; ++k) {
        pos += vel;
        vel += control;
        Vec2 next_pred = pos + vel; // y_{k+1}
        cost += (next_pred - buffer[k + 1]).norm_sq();
    }
    cost += cfg.control_penalty * static_cast<double>(m - 1) *
            control.norm_sq();
    return cost;
}

ControlFit fit_controls(const HistoryBuffer& buffer,
                        const PredictorConfig& cfg) {
    const size_t m = buffer.size();
    if (m < 2)
        throw InsufficientHistory("fit_controls needs at least 2 positions");

    const Vec2 p0 = buffer[0];
    const Vec2 v0 = buffer[1] - buffer[0];

    // y_k = p0 + k*v0 + c_k*u with c_k = k(k-1)/2; least squares in u per
    // axis: u* = sum(c_k b_k) / (sum c_k^2 + rho (m-1)).
    double num_x = 0.0, num_y = 0.0, den = 0.0;
    for (size_t k = 2; k < m; ++k) {
        double kk = static_cast<double>(k);
        double c = kk * (kk - 1.0) / 2.0;
        num_x += c * (buffer[k].x - p0.x - kk * v0.x);
        num_y += c * (buffer[k].y - p0.y - kk * v0.y);
        den += c * c;
    }
    den += cfg.control_penalty * static_cast<double>(m - 1);

    Vec2 u{0.0, 0.0};
    if (den > 0.0) u = {num_x / den, num_y / den};
    u.x = clamp(u.x, -cfg.u_max, cfg.u_max);
    u.y = clamp(u.y, -cfg.u_max, cfg.u_max);

    ControlFit fit;
    fit.anchor_position = buffer.back();
    fit.anchor_velocity = v0 + u * static_cast<double>(m - 1);
    fit.control = u;
    fit.cost = rollout_cost(buffer, cfg, u);
    return fit;
}

std::vector<Vec2> predict(const HistoryBuffer& buffer,
                          const PredictorConfig& cfg) {
    if (buffer.empty()) throw EmptyHistory("predict called on empty history");

    std::vector<Vec2> out;
    out.reserve(static_cast<size_t>(cfg.horizon));
    if (buffer.size() < 2) {
        // Stationary fallback.
        for (long k = 0; k < cfg.horizon; ++k) out.push_back(buffer.back());
        return out;
    }

    ControlFit fit = fit_controls(buffer, cfg);
    Vec2 pos = fit.anchor_position;
    Vec2 vel = fit.anchor_velocity;
    for (long k = 0; k < cfg.horizon; ++k) {
        pos += vel;
        vel += fit.control;
        out.push_back(pos);
    }
    return out;
}

double prediction_error(const std::vector<Vec2>& predicted,
                        const std::vector<Vec2>& realized) {
    if (predicted.size() != realized.size())
        throw std::invalid_argument("prediction_error: length mismatch");
    if (predicted.empty()) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i)
        total += distance(predicted[i], realized[i]);
    return total / static_cast<double>(predicted.size());
}

} // namespace mddpg
