#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mddpg/ddpg.hpp"
#include "mddpg/harness.hpp"
#include "mddpg/metrics.hpp"
#include "mddpg/predictor.hpp"
#include "mddpg/scene.hpp"
#include "mddpg/shaping.hpp"
#include "mddpg/world.hpp"

namespace py = pybind11;
using namespace mddpg;

PYBIND11_MODULE(_core, m) {
    m.doc() = "2D path-planning lab: MPC-augmented DDPG with DDPG/DQN "
              "baselines";

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<>())
        .def(py::init<double, double>())
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("norm", &Vec2::norm)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) +
                   ")";
        });

    py::class_<Rect>(m, "Rect")
        .def_readonly("x_min", &Rect::x_min)
        .def_readonly("y_min", &Rect::y_min)
        .def_readonly("x_max", &Rect::x_max)
        .def_readonly("y_max", &Rect::y_max)
        .def("diagonal", &Rect::diagonal);

    py::class_<StaticObstacle>(m, "StaticObstacle")
        .def_readonly("center", &StaticObstacle::center)
        .def_readonly("radius", &StaticObstacle::radius);

    py::class_<DynamicObstacleSpec>(m, "DynamicObstacleSpec")
        .def_readonly("start", &DynamicObstacleSpec::start)
        .def_readonly("radius", &DynamicObstacleSpec::radius)
        .def_readonly("special_locations",
                      &DynamicObstacleSpec::special_locations)
        .def_readonly("speed_min", &DynamicObstacleSpec::speed_min)
        .def_readonly("speed_max", &DynamicObstacleSpec::speed_max)
        .def_readonly("dwell_min", &DynamicObstacleSpec::dwell_min)
        .def_readonly("dwell_max", &DynamicObstacleSpec::dwell_max);

    py::class_<SceneConfig>(m, "SceneConfig")
        .def_readonly("bounds", &SceneConfig::bounds)
        .def_readonly("agent_start", &SceneConfig::agent_start)
        .def_readonly("agent_radius", &SceneConfig::agent_radius)
        .def_readonly("target", &SceneConfig::target)
        .def_readonly("goal_radius", &SceneConfig::goal_radius)
        .def_readonly("max_steps", &SceneConfig::max_steps)
        .def_readonly("statics", &SceneConfig::statics)
        .def_readonly("dynamics", &SceneConfig::dynamics)
        .def_readonly("k_static", &SceneConfig::k_static)
        .def_readonly("k_dynamic", &SceneConfig::k_dynamic)
        .def_readonly("horizon", &SceneConfig::horizon)
        .def("state_dim", &SceneConfig::state_dim);

    m.def("load_scene", &load_scene, py::arg("text"));
    m.def("load_scene_file", &load_scene_file, py::arg("path"));

    py::enum_<EpisodeStatus>(m, "EpisodeStatus")
        .value("Running", EpisodeStatus::Running)
        .value("ReachedGoal", EpisodeStatus::ReachedGoal)
        .value("Collided", EpisodeStatus::Collided)
        .value("TimedOut", EpisodeStatus::TimedOut);

    py::class_<ObstacleState>(m, "ObstacleState")
        .def_readonly("position", &ObstacleState::position)
        .def_readonly("speed", &ObstacleState::speed);

    py::class_<WorldState>(m, "WorldState")
        .def_readonly("agent_pos", &WorldState::agent_pos)
        .def_readonly("obstacles", &WorldState::obstacles)
        .def_readonly("step_count", &WorldState::step_count)
        .def_readonly("status", &WorldState::status)
        .def_readonly("path_log", &WorldState::path_log);

    py::class_<StepEvents>(m, "StepEvents")
        .def_readonly("collided", &StepEvents::collided)
        .def_readonly("reached", &StepEvents::reached)
        .def_readonly("dist_target_prev", &StepEvents::dist_target_prev)
        .def_readonly("dist_target_next", &StepEvents::dist_target_next)
        .def_readonly("dist_obstacle_prev", &StepEvents::dist_obstacle_prev)
        .def_readonly("dist_obstacle_next", &StepEvents::dist_obstacle_next);

    m.def("reset", &reset, py::arg("config"), py::arg("seed"),
          py::arg("history_capacity") = 8);
    m.def(
        "step",
        [](const SceneConfig& cfg, WorldState& world, double ax, double ay) {
            return step(cfg, world, {ax, ay});
        },
        py::arg("config"), py::arg("world"), py::arg("ax"), py::arg("ay"));
    m.def("build_observation", &build_observation, py::arg("config"),
          py::arg("world"), py::arg("predictions"));
    m.def("nearest_obstacle_distance", &nearest_obstacle_distance);

    py::class_<HistoryBuffer>(m, "HistoryBuffer")
        .def(py::init<size_t>(), py::arg("capacity") = 8)
        .def("record",
             [](HistoryBuffer& b, double x, double y) { b.record({x, y}); })
        .def("record", [](HistoryBuffer& b, const Vec2& p) { b.record(p); })
        .def("__len__", &HistoryBuffer::size);

    py::class_<PredictorConfig>(m, "PredictorConfig")
        .def(py::init<>())
        .def_readwrite("horizon", &PredictorConfig::horizon)
        .def_readwrite("fit_window", &PredictorConfig::fit_window)
        .def_readwrite("control_penalty", &PredictorConfig::control_penalty)
        .def_readwrite("u_max", &PredictorConfig::u_max);

    py::class_<ControlFit>(m, "ControlFit")
        .def_readonly("anchor_position", &ControlFit::anchor_position)
        .def_readonly("anchor_velocity", &ControlFit::anchor_velocity)
        .def_readonly("control", &ControlFit::control)
        .def_readonly("cost", &ControlFit::cost);

    m.def("fit_controls", &fit_controls, py::arg("buffer"), py::arg("config"));
    m.def("predict", &predict, py::arg("buffer"), py::arg("config"));
    m.def("prediction_error", &prediction_error, py::arg("predicted"),
          py::arg("realized"));

    py::class_<RewardConfig>(m, "RewardConfig")
        .def(py::init<>())
        .def_readwrite("attract_upper", &RewardConfig::attract_upper)
        .def_readwrite("attract_lower", &RewardConfig::attract_lower)
        .def_readwrite("repulse_upper", &RewardConfig::repulse_upper)
        .def_readwrite("repulse_lower", &RewardConfig::repulse_lower)
        .def_readwrite("lambda1", &RewardConfig::lambda1)
        .def_readwrite("lambda2", &RewardConfig::lambda2)
        .def_readwrite("lambda3", &RewardConfig::lambda3)
        .def_readwrite("lambda4", &RewardConfig::lambda4)
        .def_readwrite("influence_radius", &RewardConfig::influence_radius)
        .def_readwrite("collision_reward", &RewardConfig::collision_reward)
        .def_readwrite("goal_reward", &RewardConfig::goal_reward);

    py::class_<StepRewardBreakdown>(m, "StepRewardBreakdown")
        .def_readonly("r1", &StepRewardBreakdown::r1)
        .def_readonly("r2", &StepRewardBreakdown::r2)
        .def_readonly("r3", &StepRewardBreakdown::r3)
        .def_readonly("r4", &StepRewardBreakdown::r4)
        .def_readonly("total", &StepRewardBreakdown::total);

    m.def("attraction_reward", &attraction_reward, py::arg("d_prev"),
          py::arg("d_next"), py::arg("config"));
    m.def("repulsion_reward", &repulsion_reward, py::arg("d_prev"),
          py::arg("d_next"), py::arg("config"));
    m.def("terminal_rewards", &terminal_rewards, py::arg("events"),
          py::arg("config"));
    m.def("total_reward", &total_reward, py::arg("r1"), py::arg("r2"),
          py::arg("r3"), py::arg("r4"), py::arg("config"));
    m.def("shape_reward", &shape_reward, py::arg("events"), py::arg("config"));

    py::enum_<Algo>(m, "Algo")
        .value("Mddpg", Algo::Mddpg)
        .value("Ddpg", Algo::Ddpg)
        .value("Dqn", Algo::Dqn);
    m.def("parse_algo", &parse_algo);

    py::class_<AgentConfig>(m, "AgentConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &AgentConfig::gamma)
        .def_readwrite("tau", &AgentConfig::tau)
        .def_readwrite("batch_size", &AgentConfig::batch_size)
        .def_readwrite("buffer_capacity", &AgentConfig::buffer_capacity)
        .def_readwrite("sigma_start", &AgentConfig::sigma_start)
        .def_readwrite("sigma_end", &AgentConfig::sigma_end)
        .def_readwrite("warmup_steps", &AgentConfig::warmup_steps)
        .def_readwrite("updates_per_step", &AgentConfig::updates_per_step)
        .def_readwrite("actor_lr", &AgentConfig::actor_lr)
        .def_readwrite("critic_lr", &AgentConfig::critic_lr)
        .def_readwrite("hidden", &AgentConfig::hidden)
        .def_readwrite("predictor", &AgentConfig::predictor)
        .def_readwrite("reward", &AgentConfig::reward);

    py::class_<EpisodeLog>(m, "EpisodeLog")
        .def_readonly("episode", &EpisodeLog::episode)
        .def_readonly("outcome", &EpisodeLog::outcome)
        .def_readonly("cumulative_reward", &EpisodeLog::cumulative_reward)
        .def_readonly("steps", &EpisodeLog::steps)
        .def_readonly("path", &EpisodeLog::path);

    py::class_<MetricsSummary>(m, "MetricsSummary")
        .def_readonly("accuracy_rate", &MetricsSummary::accuracy_rate)
        .def_readonly("mean_path_length", &MetricsSummary::mean_path_length)
        .def_readonly("mean_turning_angle",
                      &MetricsSummary::mean_turning_angle)
        .def_readonly("mean_reward", &MetricsSummary::mean_reward)
        .def_readonly("episodes_counted", &MetricsSummary::episodes_counted)
        .def_readonly("successes", &MetricsSummary::successes);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("algo", &TrainResult::algo)
        .def_readonly("logs", &TrainResult::logs);

    m.def(
        "train",
        [](const SceneConfig& scene, const AgentConfig& cfg, long episodes,
           std::uint64_t seed, Algo algo) {
            return train(scene, cfg, episodes, seed, algo);
        },
        py::arg("scene"), py::arg("config"), py::arg("episodes"),
        py::arg("seed"), py::arg("algo"),
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "evaluate",
        [](const SceneConfig& scene, const AgentConfig& cfg,
           const TrainResult& trained, long episodes, std::uint64_t seed) {
            return evaluate(scene, cfg, trained, episodes, seed);
        },
        py::arg("scene"), py::arg("config"), py::arg("trained"),
        py::arg("episodes"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
    m.def("observe", &observe, py::arg("scene"), py::arg("world"),
          py::arg("algo"), py::arg("config"));

    m.def("path_length", &path_length);
    m.def("turning_angle", &turning_angle);
    m.def("accuracy_rate", &accuracy_rate, py::arg("logs"),
          py::arg("window") = 100);
    m.def("trailing_accuracy", &trailing_accuracy, py::arg("logs"),
          py::arg("window") = 100);
    m.def("summarize", &summarize);

    m.def("save_model", &save_model, py::arg("trained"), py::arg("scene_path"),
          py::arg("seed"), py::arg("episodes"), py::arg("dir"));
    m.def("load_model", &load_model, py::arg("dir"));
    m.def("load_agent_config", &load_agent_config, py::arg("text"));
}
