#include "mddpg/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mddpg/csv.hpp"
#include "mddpg/scene.hpp"

namespace fs = std::filesystem;

namespace mddpg {

namespace {

const char* outcome_name(EpisodeStatus s) {
    switch (s) {
        case EpisodeStatus::ReachedGoal: return "reached";
        case EpisodeStatus::Collided: return "collided";
        case EpisodeStatus::TimedOut: return "timed_out";
        case EpisodeStatus::Running: return "running";
    }
    return "?";
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write: " + path);
    return f;
}

} // namespace

AgentConfig load_agent_config(const std::string& text) {
    AgentConfig cfg;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> t;
        std::string tok;
        while (ls >> tok) {
            if (tok[0] == '#') break;
            t.push_back(tok);
        }
        if (t.empty()) continue;

        auto want = [&](size_t n) {
            if (t.size() != n + 1)
                throw ParseError(line_no, "'" + t[0] + "' takes " +
                                              std::to_string(n) + " value(s)");
        };
        auto val = [&](size_t i) {
            try {
                return parse_double(t[i]);
            } catch (const std::exception&) {
                throw ParseError(line_no, "expected a number, got '" + t[i] + "'");
            }
        };

        const std::string& key = t[0];
        if (key == "gamma") { want(1); cfg.gamma = val(1); }
        else if (key == "tau") { want(1); cfg.tau = val(1); }
        else if (key == "batch_size") { want(1); cfg.batch_size = static_cast<long>(val(1)); }
        else if (key == "buffer_capacity") { want(1); cfg.buffer_capacity = static_cast<long>(val(1)); }
        else if (key == "noise.sigma_start") { want(1); cfg.sigma_start = val(1); }
        else if (key == "noise.sigma_end") { want(1); cfg.sigma_end = val(1); }
        else if (key == "warmup_steps") { want(1); cfg.warmup_steps = static_cast<long>(val(1)); }
        else if (key == "updates_per_step") { want(1); cfg.updates_per_step = static_cast<long>(val(1)); }
        else if (key == "actor_lr") { want(1); cfg.actor_lr = val(1); }
        else if (key == "critic_lr") { want(1); cfg.critic_lr = val(1); }
        else if (key == "hidden") {
            if (t.size() < 2) throw ParseError(line_no, "'hidden' needs at least one width");
            cfg.hidden.clear();
            for (size_t i = 1; i < t.size(); ++i)
                cfg.hidden.push_back(static_cast<long>(val(i)));
        }
        else if (key == "dqn.eps_start") { want(1); cfg.eps_start = val(1); }
        else if (key == "dqn.eps_end") { want(1); cfg.eps_end = val(1); }
        else if (key == "dqn.target_sync") { want(1); cfg.dqn_target_sync = static_cast<long>(val(1)); }
        else if (key == "predictor.fit_window") { want(1); cfg.predictor.fit_window = static_cast<long>(val(1)); }
        else if (key == "predictor.control_penalty") { want(1); cfg.predictor.control_penalty = val(1); }
        else if (key == "predictor.u_max") { want(1); cfg.predictor.u_max = val(1); }
        else if (key == "reward.L") { want(1); cfg.reward.attract_upper = val(1); }
        else if (key == "reward.l") { want(1); cfg.reward.attract_lower = val(1); }
        else if (key == "reward.H") { want(1); cfg.reward.repulse_upper = val(1); }
        else if (key == "reward.h") { want(1); cfg.reward.repulse_lower = val(1); }
        else if (key == "reward.lambda1") { want(1); cfg.reward.lambda1 = val(1); }
        else if (key == "reward.lambda2") { want(1); cfg.reward.lambda2 = val(1); }
        else if (key == "reward.lambda3") { want(1); cfg.reward.lambda3 = val(1); }
        else if (key == "reward.lambda4") { want(1); cfg.reward.lambda4 = val(1); }
        else if (key == "reward.influence_radius") { want(1); cfg.reward.influence_radius = val(1); }
        else if (key == "reward.collision") { want(1); cfg.reward.collision_reward = val(1); }
        else if (key == "reward.goal") { want(1); cfg.reward.goal_reward = val(1); }
        else throw ParseError(line_no, "unknown key: '" + key + "'");
    }
    return cfg;
}

AgentConfig load_agent_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return load_agent_config(ss.str());
}

void write_metrics_csv(const std::vector<EpisodeLog>& logs,
                       const std::string& path) {
    auto f = open_out(path);
    f << "episode,outcome,reward,steps,path_length,turning_angle_deg\n";
    for (const auto& log : logs) {
        f << log.episode << ',' << outcome_name(log.outcome) << ','
          << format_double(log.cumulative_reward) << ',' << log.steps << ','
          << format_double(path_length(log.path)) << ','
          << format_double(turning_angle(log.path)) << '\n';
    }
}

std::vector<std::vector<Vec2>> read_agent_paths_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open trajectory csv: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "episode,step,entity,x,y")
        throw std::runtime_error("unexpected trajectory csv header");
    std::map<long, std::vector<std::pair<long, Vec2>>> by_episode;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_fields(line, ',');
        if (fields.size() != 5)
            throw std::runtime_error("malformed trajectory row: " + line);
        if (fields[2] != "agent") continue;
        long ep = std::stol(fields[0]);
        long step = std::stol(fields[1]);
        by_episode[ep].push_back(
            {step, Vec2{parse_double(fields[3]), parse_double(fields[4])}});
    }
    std::vector<std::vector<Vec2>> out;
    for (auto& [ep, rows] : by_episode) {
        std::sort(rows.begin(), rows.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<Vec2> p;
        p.reserve(rows.size());
        for (const auto& r : rows) p.push_back(r.second);
        out.push_back(std::move(p));
    }
    return out;
}

namespace {

struct FileLoggers {
    std::ofstream rewards;
    std::ofstream predictions;
    TrainObserver train_observer;
    bool any = false;

    void open(const TrainRunOptions& opt) {
        if (opt.log_rewards) {
            rewards = open_out(opt.out_dir + "/rewards.csv");
            rewards << "episode,step,r1,r2,r3,r4,R\n";
            train_observer.on_reward = [this](long ep, long step,
                                              const StepRewardBreakdown& b) {
                rewards << ep << ',' << step << ',' << format_double(b.r1) << ','
                        << format_double(b.r2) << ',' << format_double(b.r3)
                        << ',' << format_double(b.r4) << ','
                        << format_double(b.total) << '\n';
            };
            any = true;
        }
        if (opt.log_predictions) {
            predictions = open_out(opt.out_dir + "/predictions.csv");
            predictions << "episode,step,obstacle,k,pred_x,pred_y\n";
            train_observer.on_prediction = [this](long ep, long step,
                                                  size_t obstacle,
                                                  const std::vector<Vec2>& track) {
                for (size_t k = 0; k < track.size(); ++k)
                    predictions << ep << ',' << step << ',' << obstacle << ','
                                << k + 1 << ',' << format_double(track[k].x)
                                << ',' << format_double(track[k].y) << '\n';
            };
            any = true;
        }
    }
};

} // namespace

TrainResult run_training(const TrainRunOptions& opt) {
    SceneConfig scene = load_scene_file(opt.scene_path);
    if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

    FileLoggers loggers;
    if (!opt.out_dir.empty()) loggers.open(opt);

    TrainResult result =
        train(scene, opt.agent, opt.episodes, opt.seed, opt.algo,
              loggers.any ? &loggers.train_observer : nullptr);

    if (!opt.out_dir.empty()) {
        write_metrics_csv(result.logs, opt.out_dir + "/metrics.csv");
        save_model(result, opt.scene_path, opt.seed, opt.episodes, opt.out_dir);
    }
    return result;
}

void save_model(const TrainResult& trained, const std::string& scene_path,
                std::uint64_t seed, long episodes, const std::string& dir) {
    fs::create_directories(dir);
    auto manifest = open_out(dir + "/manifest.txt");
    manifest << "algo " << algo_name(trained.algo) << '\n';
    manifest << "scene " << scene_path << '\n';
    manifest << "seed " << seed << '\n';
    manifest << "episodes " << episodes << '\n';
    if (trained.algo == Algo::Dqn) {
        manifest << "obs_scale " << format_double(trained.dqn.obs_scale) << '\n';
        manifest << "network q q.net\n";
        manifest << "network target_q target_q.net\n";
        save_network(trained.dqn.q, dir + "/q.net");
        save_network(trained.dqn.target_q, dir + "/target_q.net");
    } else {
        manifest << "obs_scale " << format_double(trained.agent.obs_scale)
                 << '\n';
        manifest << "network actor actor.net\n";
        manifest << "network critic critic.net\n";
        manifest << "network target_actor target_actor.net\n";
        manifest << "network target_critic target_critic.net\n";
        save_network(trained.agent.actor, dir + "/actor.net");
        save_network(trained.agent.critic, dir + "/critic.net");
        save_network(trained.agent.target_actor, dir + "/target_actor.net");
        save_network(trained.agent.target_critic, dir + "/target_critic.net");
    }
}

TrainResult load_model(const std::string& dir) {
    std::ifstream f(dir + "/manifest.txt");
    if (!f) throw std::runtime_error("cannot open manifest: " + dir +
                                     "/manifest.txt");
    TrainResult result;
    double obs_scale = 1.0;
    std::map<std::string, std::string> networks;
    std::string line;
    while (std::getline(f, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "algo") {
            std::string name;
            ls >> name;
            result.algo = parse_algo(name);
        } else if (key == "obs_scale") {
            std::string v;
            ls >> v;
            obs_scale = parse_double(v);
        } else if (key == "network") {
            std::string role, file;
            ls >> role >> file;
            networks[role] = file;
        }
    }
    auto path_of = [&](const std::string& role) {
        auto it = networks.find(role);
        if (it == networks.end())
            throw std::runtime_error("manifest missing network: " + role);
        return dir + "/" + it->second;
    };
    if (result.algo == Algo::Dqn) {
        result.dqn.q = load_network(path_of("q"));
        result.dqn.target_q = load_network(path_of("target_q"));
        result.dqn.opt = make_adam_state(result.dqn.q);
        result.dqn.obs_scale = obs_scale;
    } else {
        result.agent.actor = load_network(path_of("actor"));
        result.agent.critic = load_network(path_of("critic"));
        result.agent.target_actor = load_network(path_of("target_actor"));
        result.agent.target_critic = load_network(path_of("target_critic"));
        result.agent.actor_opt = make_adam_state(result.agent.actor);
        result.agent.critic_opt = make_adam_state(result.agent.critic);
        result.agent.obs_scale = obs_scale;
    }
    return result;
}

std::vector<EpisodeLog> run_eval(const EvalRunOptions& opt) {
    SceneConfig scene = load_scene_file(opt.scene_path);

    TrainResult policy;
    if (opt.model_dir.empty()) {
        policy = train(scene, opt.agent, 0, opt.seed, opt.algo);
    } else {
        policy = load_model(opt.model_dir);
    }

    if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

    std::ofstream traj, preds;
    EvalObserver observer;
    bool any_observer = false;
    if (opt.export_trajectories && !opt.out_dir.empty()) {
        traj = open_out(opt.out_dir + "/trajectories.csv");
        traj << "episode,step,entity,x,y\n";
        auto emit = [&traj](long ep, long step, const WorldState& w) {
            traj << ep << ',' << step << ",agent,"
                 << format_double(w.agent_pos.x) << ','
                 << format_double(w.agent_pos.y) << '\n';
            for (size_t i = 0; i < w.obstacles.size(); ++i)
                traj << ep << ',' << step << ",dyn" << i << ','
                     << format_double(w.obstacles[i].position.x) << ','
                     << format_double(w.obstacles[i].position.y) << '\n';
        };
        observer.on_reset = [emit](long ep, const WorldState& w) {
            emit(ep, 0, w);
        };
        observer.on_step = emit;
        any_observer = true;
    }
    if (opt.log_predictions && !opt.out_dir.empty()) {
        preds = open_out(opt.out_dir + "/predictions.csv");
        preds << "episode,step,obstacle,k,pred_x,pred_y\n";
        observer.on_prediction = [&preds](long ep, long step, size_t obstacle,
                                          const std::vector<Vec2>& track) {
            for (size_t k = 0; k < track.size(); ++k)
                preds << ep << ',' << step << ',' << obstacle << ',' << k + 1
                      << ',' << format_double(track[k].x) << ','
                      << format_double(track[k].y) << '\n';
        };
        any_observer = true;
    }

    auto logs = evaluate(scene, opt.agent, policy, opt.episodes, opt.seed,
                         any_observer ? &observer : nullptr);
    if (!opt.out_dir.empty())
        write_metrics_csv(logs, opt.out_dir + "/metrics.csv");
    return logs;
}

std::vector<CompareCell> run_compare(const CompareOptions& opt) {
    std::vector<CompareCell> cells;
    for (const auto& scene_path : opt.scene_paths) {
        for (Algo algo : opt.algos) {
            for (std::uint64_t seed : opt.seeds) {
                CompareCell cell;
                cell.scene_path = scene_path;
                cell.scene_name = scene_stem(scene_path);
                cell.algo = algo;
                cell.seed = seed;
                auto t0 = std::chrono::steady_clock::now();
                try {
                    SceneConfig scene = load_scene_file(scene_path);
                    TrainResult trained =
                        train(scene, opt.agent, opt.episodes, seed, algo);
                    cell.trailing_train_accuracy =
                        trailing_accuracy(trained.logs);
                    auto eval_logs = evaluate(scene, opt.agent, trained,
                                              opt.eval_episodes, seed);
                    cell.eval_summary = summarize(eval_logs);
                    cell.ok = true;
                } catch (const std::exception& e) {
                    cell.ok = false;
                    cell.error = e.what();
                    std::cerr << "[compare] cell " << cell.scene_name << "/"
                              << algo_name(algo) << "/seed " << seed
                              << " failed: " << e.what() << "\n";
                }
                if (opt.verbose && cell.ok) {
                    auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                    std::cerr << "[compare] " << cell.scene_name << "/"
                              << algo_name(algo) << "/seed " << seed << ": "
                              << secs << "s, trailing acc "
                              << cell.trailing_train_accuracy << ", eval acc "
                              << cell.eval_summary.accuracy_rate << "\n";
                }
                cells.push_back(std::move(cell));
            }
        }
    }
    if (!opt.out_dir.empty()) {
        fs::create_directories(opt.out_dir);
        write_compare_csv(cells, opt.out_dir + "/compare.csv");
        auto f = open_out(opt.out_dir + "/compare.txt");
        f << render_compare_table(cells);
    }
    return cells;
}

void write_compare_csv(const std::vector<CompareCell>& cells,
                       const std::string& path) {
    auto f = open_out(path);
    f << "scene,algo,seed,accuracy,mean_path_length,mean_turning_angle\n";
    for (const auto& c : cells) {
        if (!c.ok) continue;
        f << c.scene_name << ',' << algo_name(c.algo) << ',' << c.seed << ','
          << format_double(c.eval_summary.accuracy_rate) << ','
          << format_double(c.eval_summary.mean_path_length) << ','
          << format_double(c.eval_summary.mean_turning_angle) << '\n';
    }
}

std::string render_compare_table(const std::vector<CompareCell>& cells) {
    struct Agg {
        std::vector<double> acc, len, angle, trail;
    };
    std::vector<std::pair<std::pair<std::string, Algo>, Agg>> groups;
    auto group_of = [&](const std::string& scene,
                        Algo algo) -> Agg& {
        for (auto& g : groups)
            if (g.first.first == scene && g.first.second == algo)
                return g.second;
        groups.push_back({{scene, algo}, {}});
        return groups.back().second;
    };
    long failed = 0;
    for (const auto& c : cells) {
        if (!c.ok) {
            ++failed;
            continue;
        }
        Agg& g = group_of(c.scene_name, c.algo);
        g.acc.push_back(c.eval_summary.accuracy_rate);
        g.len.push_back(c.eval_summary.mean_path_length);
        g.angle.push_back(c.eval_summary.mean_turning_angle);
        g.trail.push_back(c.trailing_train_accuracy);
    }

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto stdev = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = mean(v);
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::sqrt(s / static_cast<double>(v.size() - 1));
    };

    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %-7s %5s  %-15s %-19s %-19s %s\n",
                  "scene", "algo", "seeds", "eval_accuracy", "path_length",
                  "turning_angle_deg", "trailing_train_acc");
    out << buf;
    for (const auto& [key, g] : groups) {
        std::snprintf(buf, sizeof(buf),
                      "%-10s %-7s %5zu  %6.3f +- %-6.3f %8.2f +- %-8.2f "
                      "%8.2f +- %-8.2f %6.3f\n",
                      key.first.c_str(), algo_name(key.second), g.acc.size(),
                      mean(g.acc), stdev(g.acc), mean(g.len), stdev(g.len),
                      mean(g.angle), stdev(g.angle), mean(g.trail));
        out << buf;
    }
    if (failed > 0) out << failed << " cell(s) failed; see stderr.\n";
    return out.str();
}

std::string scene_stem(const std::string& path) {
    return fs::path(path).stem().string();
}

} // namespace mddpg
