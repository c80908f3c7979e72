#pragma once

#include <string>
#include <vector>

#include "mddpg/ddpg.hpp"
#include "mddpg/metrics.hpp"

namespace mddpg {

// Hyperparameter file: same line-oriented key-value format as scene files.
AgentConfig load_agent_config(const std::string& text);
AgentConfig load_agent_config_file(const std::string& path);

struct TrainRunOptions {
    std::string scene_path;
    Algo algo = Algo::Mddpg;
    long episodes = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool log_rewards = false;
    bool log_predictions = false;
    AgentConfig agent;
};

// Trains, then writes metrics.csv, per-network checkpoints and manifest.txt
// (plus rewards.csv / predictions.csv when requested) into out_dir.
TrainResult run_training(const TrainRunOptions& opt);

// Reconstructs a trained policy from a manifest directory.
TrainResult load_model(const std::string& dir);

void save_model(const TrainResult& trained, const std::string& scene_path,
                std::uint64_t seed, long episodes, const std::string& dir);

struct EvalRunOptions {
    std::string scene_path;
    std::string model_dir; // empty: evaluate a freshly initialized policy
    Algo algo = Algo::Mddpg; // used only when model_dir is empty
    long episodes = 100;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool export_trajectories = false; // trajectories.csv (replay-export)
    bool log_predictions = false;
    AgentConfig agent;
};

std::vector<EpisodeLog> run_eval(const EvalRunOptions& opt);

struct CompareCell {
    std::string scene_name;
    std::string scene_path;
    Algo algo = Algo::Mddpg;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double trailing_train_accuracy = 0.0; // 100-episode window, last quarter
    MetricsSummary eval_summary;          // greedy evaluation
};

struct CompareOptions {
    std::vector<std::string> scene_paths;
    std::vector<Algo> algos;
    std::vector<std::uint64_t> seeds;
    long episodes = 0;
    long eval_episodes = 100;
    std::string out_dir; // compare.csv + compare.txt when non-empty
    AgentConfig agent;
    bool verbose = false; // progress lines on stderr
};

std::vector<CompareCell> run_compare(const CompareOptions& opt);

void write_metrics_csv(const std::vector<EpisodeLog>& logs,
                       const std::string& path);

// Agent path per episode from a trajectories.csv export.
std::vector<std::vector<Vec2>> read_agent_paths_csv(const std::string& path);

void write_compare_csv(const std::vector<CompareCell>& cells,
                       const std::string& path);
std::string render_compare_table(const std::vector<CompareCell>& cells);

// "scene1" from ".../scene1.txt".
std::string scene_stem(const std::string& path);

} // namespace mddpg
