#include "mddpg/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace mddpg {

double path_length(const std::vector<Vec2>& path) {
    if (path.empty()) throw std::invalid_argument("path_length: empty path");
    double total = 0.0;
    for (size_t i = 1; i < path.size(); ++i)
        total += distance(path[i - 1], path[i]);
    return total;
}

double turning_angle(const std::vector<Vec2>& path) {
    // Collapse zero-length segments first, then sum interior angles.
    std::vector<Vec2> pts;
    for (const auto& p : path)
        if (pts.empty() || !(p == pts.back())) pts.push_back(p);

    double total = 0.0;
    for (size_t i = 2; i < pts.size(); ++i) {
        Vec2 a = pts[i - 1] - pts[i - 2];
        Vec2 b = pts[i] - pts[i - 1];
        double cross = a.x * b.y - a.y * b.x;
        double dot = a.x * b.x + a.y * b.y;
        total += std::abs(std::atan2(cross, dot));
    }
    return total * 180.0 / 3.14159265358979323846;
}

std::vector<double> accuracy_rate(const std::vector<EpisodeLog>& logs,
                                  long window) {
    if (window < 1) throw std::invalid_argument("accuracy_rate: window < 1");
    std::vector<double> series;
    series.reserve(logs.size());
    long in_window = 0;
    for (size_t i = 0; i < logs.size(); ++i) {
        if (logs[i].outcome == EpisodeStatus::ReachedGoal) ++in_window;
        if (i >= static_cast<size_t>(window) &&
            logs[i - window].outcome == EpisodeStatus::ReachedGoal)
            --in_window;
        long denom = std::min<long>(static_cast<long>(i) + 1, window);
        series.push_back(static_cast<double>(in_window) /
                         static_cast<double>(denom));
    }
    return series;
}

double trailing_accuracy(const std::vector<EpisodeLog>& logs, long window) {
    if (logs.empty()) return 0.0;
    auto series = accuracy_rate(logs, window);
    size_t start = (series.size() * 3) / 4;
    if (start >= series.size()) start = series.size() - 1;
    double sum = 0.0;
    for (size_t i = start; i < series.size(); ++i) sum += series[i];
    return sum / static_cast<double>(series.size() - start);
}

MetricsSummary summarize(const std::vector<EpisodeLog>& logs) {
    MetricsSummary s;
    s.episodes_counted = static_cast<long>(logs.size());
    if (logs.empty()) return s;
    double len_sum = 0.0, angle_sum = 0.0, reward_sum = 0.0;
    for (const auto& log : logs) {
        reward_sum += log.cumulative_reward;
        if (log.outcome == EpisodeStatus::ReachedGoal) {
            ++s.successes;
            len_sum += path_length(log.path);
            angle_sum += turning_angle(log.path);
        }
    }
    s.accuracy_rate =
        static_cast<double>(s.successes) / static_cast<double>(logs.size());
    s.mean_reward = reward_sum / static_cast<double>(logs.size());
    if (s.successes > 0) {
        s.mean_path_length = len_sum / static_cast<double>(s.successes);
        s.mean_turning_angle = angle_sum / static_cast<double>(s.successes);
    }
    return s;
}

} // namespace mddpg
