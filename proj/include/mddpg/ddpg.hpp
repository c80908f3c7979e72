#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mddpg/metrics.hpp"
#include "mddpg/neural.hpp"
#include "mddpg/predictor.hpp"
#include "mddpg/shaping.hpp"
#include "mddpg/world.hpp"

namespace mddpg {

enum class Algo { Mddpg, Ddpg, Dqn };

const char* algo_name(Algo a);
Algo parse_algo(const std::string& name);

struct Transition {
    std::vector<double> state;
    std::array<double, 2> action{0.0, 0.0};
    double reward = 0.0;
    std::vector<double> next_state;
    bool done = false;
};

class InsufficientSamples : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fixed-capacity ring buffer with uniform with-replacement sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
        data_.reserve(std::min<size_t>(capacity, 1 << 16));
    }

    void store(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& operator[](size_t i) const { return data_[i]; }

    std::vector<const Transition*> sample(size_t n, Rng& rng) const {
        if (data_.size() < n)
            throw InsufficientSamples("replay buffer holds fewer than n");
        std::vector<const Transition*> out(n);
        for (size_t i = 0; i < n; ++i)
            out[i] = &data_[static_cast<size_t>(
                rng.uniform_int(0, static_cast<long>(data_.size()) - 1))];
        return out;
    }

private:
    size_t capacity_;
    size_t cursor_ = 0;
    std::vector<Transition> data_;
};

struct AgentConfig {
    double gamma = 0.99;
    double tau = 0.005;
    long batch_size = 64;
    long buffer_capacity = 100000;
    // Gaussian exploration noise, decayed linearly from sigma_start to
    // sigma_end over the first half of training.
    double sigma_start = 0.3;
    double sigma_end = 0.05;
    long warmup_steps = 1000;
    long updates_per_step = 1;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    std::vector<long> hidden = {64, 64};
    // DQN baseline: epsilon-greedy on the same schedule, hard target copy
    // every target_sync updates.
    double eps_start = 0.3;
    double eps_end = 0.05;
    long dqn_target_sync = 200;
    PredictorConfig predictor; // horizon is taken from the scene
    RewardConfig reward;
};

// Online + target actor/critic with their optimizer states. obs_scale
// normalizes raw world-unit observations at the network boundary.
struct AgentBundle {
    MlpParams actor, critic;
    MlpParams target_actor, target_critic;
    AdamState actor_opt, critic_opt;
    double obs_scale = 1.0;
};

AgentBundle make_agent(long state_dim, const AgentConfig& cfg,
                       double obs_scale, Rng& init_rng);

std::array<double, 2> select_action(const AgentBundle& bundle,
                                    const std::vector<double>& state,
                                    bool explore, double sigma, Rng& noise_rng);

// Eq-style targets: y = r for done transitions, else r + gamma * Q'(s', mu'(s')).
std::vector<double> critic_target(const std::vector<const Transition*>& batch,
                                  const MlpParams& target_actor,
                                  const MlpParams& target_critic, double gamma,
                                  double obs_scale);

// One Adam step on the online critic along the MSE gradient; returns the loss.
double critic_update(AgentBundle& bundle,
                     const std::vector<const Transition*>& batch,
                     const std::vector<double>& y, double lr);

// One Adam ascent step on mean_s Q(s, mu(s)); returns the pre-update mean Q.
double actor_update(AgentBundle& bundle,
                    const std::vector<const Transition*>& batch, double lr);

// Discrete baseline action set: 8 compass directions at full step.
inline constexpr std::array<std::array<double, 2>, 8> kCompassActions{{
    {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {-1.0, 1.0},
    {-1.0, 0.0}, {-1.0, -1.0}, {0.0, -1.0}, {1.0, -1.0},
}};

int compass_index(const std::array<double, 2>& action);

struct DqnBundle {
    MlpParams q, target_q;
    AdamState opt;
    double obs_scale = 1.0;
    long updates_since_sync = 0;
};

DqnBundle make_dqn(long state_dim, const AgentConfig& cfg, double obs_scale,
                   Rng& init_rng);

int dqn_select(const DqnBundle& bundle, const std::vector<double>& state,
               bool explore, double epsilon, Rng& noise_rng);

// Standard Q-learning target with MSE loss and periodic hard target copy.
double dqn_baseline_update(DqnBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           double gamma, double lr, long sync_interval);

// Per-obstacle receding-horizon predictions from the recorded histories.
std::vector<std::vector<Vec2>> predict_obstacles(const SceneConfig& scene,
                                                 const WorldState& world,
                                                 const PredictorConfig& cfg);

// Observation for the given algorithm: mddpg uses predicted horizon
// endpoints for the dynamic slots, ddpg/dqn the current positions.
std::vector<double> observe(const SceneConfig& scene, const WorldState& world,
                            Algo algo, const PredictorConfig& cfg);

struct TrainObserver {
    std::function<void(long episode, long step, const StepRewardBreakdown&)>
        on_reward;
    std::function<void(long episode, long step, size_t obstacle,
                       const std::vector<Vec2>&)>
        on_prediction;
};

struct TrainResult {
    Algo algo = Algo::Mddpg;
    AgentBundle agent; // mddpg / ddpg
    DqnBundle dqn;     // dqn
    std::vector<EpisodeLog> logs;
};

TrainResult train(const SceneConfig& scene, const AgentConfig& cfg,
                  long episodes, std::uint64_t seed, Algo algo,
                  const TrainObserver* observer = nullptr);

struct EvalObserver {
    std::function<void(long episode, const WorldState&)> on_reset;
    std::function<void(long episode, long step, const WorldState&)> on_step;
    std::function<void(long episode, long step, size_t obstacle,
                       const std::vector<Vec2>&)>
        on_prediction;
};

// Greedy (no exploration) rollouts of a trained policy.
std::vector<EpisodeLog> evaluate(const SceneConfig& scene,
                                 const AgentConfig& cfg,
                                 const TrainResult& trained, long episodes,
                                 std::uint64_t seed,
                                 const EvalObserver* observer = nullptr);

} // namespace mddpg
