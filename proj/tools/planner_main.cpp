#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mddpg/harness.hpp"
#include "mddpg/metrics.hpp"
#include "mddpg/scene.hpp"

namespace fs = std::filesystem;
using namespace mddpg;

namespace {

// Accepts a path as given, or a bundled scene name (scenes/<name>.txt).
std::string resolve_scene(const std::string& name) {
    if (fs::exists(name)) return name;
    std::string bundled = "scenes/" + name + ".txt";
    if (fs::exists(bundled)) return bundled;
    throw std::runtime_error("scene not found: '" + name + "' (also tried " +
                             bundled + ")");
}

AgentConfig config_from(const std::string& path) {
    if (path.empty()) return AgentConfig{};
    return load_agent_config_file(path);
}

void print_summary(const std::vector<EpisodeLog>& logs) {
    MetricsSummary s = summarize(logs);
    std::cout << "episodes " << s.episodes_counted << ", accuracy "
              << s.accuracy_rate << ", mean reward " << s.mean_reward;
    if (s.successes > 0)
        std::cout << ", mean path length " << s.mean_path_length
                  << ", mean turning angle " << s.mean_turning_angle << " deg";
    std::cout << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous 2D path-planning lab: MPC-augmented DDPG, plain "
                 "DDPG and DQN baselines"};
    app.require_subcommand(1);

    std::string scene, algo = "mddpg", out, config, model;
    long episodes = 1000;
    long eval_episodes = 100;
    std::uint64_t seed = 0;
    bool log_rewards = false, log_predictions = false;

    auto add_common = [&](CLI::App* cmd, bool scene_required) {
        auto* s = cmd->add_option("--scene", scene,
                                  "scene file path or bundled scene name");
        if (scene_required) s->required();
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--config", config, "hyperparameter file");
        cmd->add_option("--out", out, "output directory");
    };

    auto* train_cmd = app.add_subcommand("train", "train a policy");
    add_common(train_cmd, true);
    train_cmd->add_option("--algo", algo, "mddpg | ddpg | dqn")
        ->check(CLI::IsMember({"mddpg", "ddpg", "dqn"}));
    train_cmd->add_option("--episodes", episodes, "training episodes");
    train_cmd->add_flag("--log-rewards", log_rewards,
                        "write per-step reward breakdown CSV");
    train_cmd->add_flag("--log-predictions", log_predictions,
                        "write per-step obstacle prediction CSV");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained policy "
                                                "greedily");
    add_common(eval_cmd, true);
    eval_cmd->add_option("--model", model, "model directory (from train)")
        ->required();
    eval_cmd->add_option("--episodes", episodes, "evaluation episodes");

    auto* replay_cmd = app.add_subcommand(
        "replay-export", "run episodes and export trajectories CSV");
    add_common(replay_cmd, true);
    replay_cmd->add_option("--model", model,
                           "model directory; omit for an untrained policy");
    replay_cmd->add_option("--algo", algo, "algo when no model is given")
        ->check(CLI::IsMember({"mddpg", "ddpg", "dqn"}));
    replay_cmd->add_option("--episodes", episodes, "episodes to export");
    replay_cmd->add_flag("--log-predictions", log_predictions,
                         "also export obstacle predictions");

    auto* compare_cmd = app.add_subcommand(
        "compare", "train and evaluate a scene x algo x seed grid");
    std::vector<std::string> scenes;
    std::vector<std::string> algos;
    std::vector<std::uint64_t> seeds;
    compare_cmd->add_option("--scene", scenes, "scene (repeatable)")
        ->required();
    compare_cmd->add_option("--algo", algos, "algorithm (repeatable)")
        ->check(CLI::IsMember({"mddpg", "ddpg", "dqn"}));
    compare_cmd->add_option("--seed", seeds, "seed (repeatable)");
    compare_cmd->add_option("--episodes", episodes, "training episodes per cell");
    compare_cmd->add_option("--eval-episodes", eval_episodes,
                            "greedy evaluation episodes per cell");
    compare_cmd->add_option("--config", config, "hyperparameter file");
    compare_cmd->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*train_cmd) {
            TrainRunOptions opt;
            opt.scene_path = resolve_scene(scene);
            opt.algo = parse_algo(algo);
            opt.episodes = episodes;
            opt.seed = seed;
            opt.out_dir = out;
            opt.log_rewards = log_rewards;
            opt.log_predictions = log_predictions;
            opt.agent = config_from(config);
            TrainResult result = run_training(opt);
            print_summary(result.logs);
        } else if (*eval_cmd) {
            EvalRunOptions opt;
            opt.scene_path = resolve_scene(scene);
            opt.model_dir = model;
            opt.episodes = episodes;
            opt.seed = seed;
            opt.out_dir = out.empty() ? model + "/eval" : out;
            opt.agent = config_from(config);
            auto logs = run_eval(opt);
            print_summary(logs);
        } else if (*replay_cmd) {
            EvalRunOptions opt;
            opt.scene_path = resolve_scene(scene);
            opt.model_dir = model;
            opt.algo = parse_algo(algo);
            opt.episodes = episodes;
            opt.seed = seed;
            if (out.empty())
                throw std::runtime_error("replay-export needs --out");
            opt.out_dir = out;
            opt.export_trajectories = true;
            opt.log_predictions = log_predictions;
            opt.agent = config_from(config);
            auto logs = run_eval(opt);
            print_summary(logs);
        } else if (*compare_cmd) {
            CompareOptions opt;
            for (const auto& s : scenes)
                opt.scene_paths.push_back(resolve_scene(s));
            if (algos.empty()) algos = {"mddpg", "ddpg"};
            for (const auto& a : algos) opt.algos.push_back(parse_algo(a));
            opt.seeds = seeds.empty() ? std::vector<std::uint64_t>{0} : seeds;
            opt.episodes = episodes;
            opt.eval_episodes = eval_episodes;
            opt.out_dir = out;
            opt.agent = config_from(config);
            opt.verbose = true;
            auto cells = run_compare(opt);
            std::cout << render_compare_table(cells);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
