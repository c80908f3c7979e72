#pragma once

#include <vector>

#include "mddpg/world.hpp"

namespace mddpg {

struct EpisodeLog {
    long episode = 0;
    EpisodeStatus outcome = EpisodeStatus::Running;
    double cumulative_reward = 0.0;
    long steps = 0;
    std::vector<Vec2> path; // agent positions, length steps + 1
};

struct MetricsSummary {
    double accuracy_rate = 0.0;      // fraction of ReachedGoal episodes
    double mean_path_length = 0.0;   // over successful episodes
    double mean_turning_angle = 0.0; // degrees, over successful episodes
    double mean_reward = 0.0;        // over all episodes
    long episodes_counted = 0;
    long successes = 0;
};

// Sum of consecutive segment lengths. Throws on an empty path.
double path_length(const std::vector<Vec2>& path);

// Sum of absolute heading changes between consecutive nonzero segments,
// in degrees. Zero-length segments are skipped.
double turning_angle(const std::vector<Vec2>& path);

// Trailing-window fraction of ReachedGoal outcomes per episode; leading
// windows are truncated to the episodes seen so far.
std::vector<double> accuracy_rate(const std::vector<EpisodeLog>& logs,
                                  long window = 100);

// Mean of the accuracy series over the last quarter of training.
double trailing_accuracy(const std::vector<EpisodeLog>& logs,
                         long window = 100);

MetricsSummary summarize(const std::vector<EpisodeLog>& logs);

} // namespace mddpg
