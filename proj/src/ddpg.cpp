#include "mddpg/ddpg.hpp"

#include <algorithm>
#include <cmath>

namespace mddpg {

const char* algo_name(Algo a) {
    switch (a) {
        case Algo::Mddpg: return "mddpg";
        case Algo::Ddpg: return "ddpg";
        case Algo::Dqn: return "dqn";
    }
    return "?";
}

Algo parse_algo(const std::string& name) {
    if (name == "mddpg") return Algo::Mddpg;
    if (name == "ddpg") return Algo::Ddpg;
    if (name == "dqn") return Algo::Dqn;
    throw std::invalid_argument("unknown algorithm: '" + name +
                                "' (expected mddpg, ddpg or dqn)");
}

namespace {

std::vector<double> scaled_states(const std::vector<const Transition*>& batch,
                                  bool next, double obs_scale) {
    const size_t dim = next ? batch[0]->next_state.size() : batch[0]->state.size();
    std::vector<double> out(batch.size() * dim);
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto& s = next ? batch[i]->next_state : batch[i]->state;
        for (size_t k = 0; k < dim; ++k) out[i * dim + k] = s[k] * obs_scale;
    }
    return out;
}

// [scaled state | action] rows for the critic.
std::vector<double> critic_input(const std::vector<const Transition*>& batch,
                                 const std::vector<double>& states, size_t dim,
                                 const double* actions, size_t action_stride) {
    std::vector<double> out(batch.size() * (dim + 2));
    for (size_t i = 0; i < batch.size(); ++i) {
        double* row = out.data() + i * (dim + 2);
        std::copy_n(states.data() + i * dim, dim, row);
        row[dim] = actions[i * action_stride];
        row[dim + 1] = actions[i * action_stride + 1];
    }
    return out;
}

} // namespace

AgentBundle make_agent(long state_dim, const AgentConfig& cfg,
                       double obs_scale, Rng& init_rng) {
    AgentBundle b;
    std::vector<long> actor_dims{state_dim};
    actor_dims.insert(actor_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_dims.push_back(2);
    std::vector<long> critic_dims{state_dim + 2};
    critic_dims.insert(critic_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_dims.push_back(1);

    b.actor = make_mlp(actor_dims, Activation::ReLU, Activation::Tanh, init_rng);
    b.critic =
        make_mlp(critic_dims, Activation::ReLU, Activation::Identity, init_rng);
    b.target_actor = b.actor;
    b.target_critic = b.critic;
    b.actor_opt = make_adam_state(b.actor);
    b.critic_opt = make_adam_state(b.critic);
    b.obs_scale = obs_scale;
    return b;
}

std::array<double, 2> select_action(const AgentBundle& bundle,
                                    const std::vector<double>& state,
                                    bool explore, double sigma,
                                    Rng& noise_rng) {
    std::vector<double> scaled(state.size());
    for (size_t i = 0; i < state.size(); ++i)
        scaled[i] = state[i] * bundle.obs_scale;
    ForwardCache cache;
    std::vector<double> out = forward(bundle.actor, scaled, cache);
    std::array<double, 2> a{out[0], out[1]};
    if (explore) {
        a[0] += sigma * noise_rng.gaussian();
        a[1] += sigma * noise_rng.gaussian();
    }
    a[0] = std::clamp(a[0], -1.0, 1.0);
    a[1] = std::clamp(a[1], -1.0, 1.0);
    return a;
}

std::vector<double> critic_target(const std::vector<const Transition*>& batch,
                                  const MlpParams& target_actor,
                                  const MlpParams& target_critic, double gamma,
                                  double obs_scale) {
    if (batch.empty()) throw std::invalid_argument("critic_target: empty batch");
    const size_t B = batch.size();
    const size_t dim = batch[0]->next_state.size();

    std::vector<double> next = scaled_states(batch, true, obs_scale);
    ForwardCache actor_cache, critic_cache;
    forward_batch(target_actor, next.data(), B, actor_cache);
    std::vector<double> xc =
        critic_input(batch, next, dim, actor_cache.output.data(), 2);
    forward_batch(target_critic, xc.data(), B, critic_cache);

    std::vector<double> y(B);
    for (size_t i = 0; i < B; ++i)
        y[i] = batch[i]->reward +
               (batch[i]->done ? 0.0 : gamma * critic_cache.output[i]);
    return y;
}

double critic_update(AgentBundle& bundle,
                     const std::vector<const Transition*>& batch,
                     const std::vector<double>& y, double lr) {
    if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
    if (y.size() != batch.size())
        throw std::invalid_argument("critic_update: y size mismatch");
    const size_t B = batch.size();
    const size_t dim = batch[0]->state.size();

    std::vector<double> states = scaled_states(batch, false, bundle.obs_scale);
    std::vector<double> actions(B * 2);
    for (size_t i = 0; i < B; ++i) {
        actions[i * 2] = batch[i]->action[0];
        actions[i * 2 + 1] = batch[i]->action[1];
    }
    std::vector<double> xc = critic_input(batch, states, dim, actions.data(), 2);

    ForwardCache cache;
    forward_batch(bundle.critic, xc.data(), B, cache);

    double loss = 0.0;
    std::vector<double> gout(B);
    for (size_t i = 0; i < B; ++i) {
        double diff = y[i] - cache.output[i];
        loss += diff * diff;
        gout[i] = 2.0 * (cache.output[i] - y[i]) / static_cast<double>(B);
    }
    loss /= static_cast<double>(B);

    GradientSet grads = zero_gradients(bundle.critic);
    backward_batch(bundle.critic, cache, gout, grads);
    adam_step(bundle.critic, grads, bundle.critic_opt, lr);
    return loss;
}

double actor_update(AgentBundle& bundle,
                    const std::vector<const Transition*>& batch, double lr) {
    if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
    const size_t B = batch.size();
    const size_t dim = batch[0]->state.size();

    std::vector<double> states = scaled_states(batch, false, bundle.obs_scale);
    ForwardCache actor_cache;
    forward_batch(bundle.actor, states.data(), B, actor_cache);

    std::vector<double> xc =
        critic_input(batch, states, dim, actor_cache.output.data(), 2);
    ForwardCache critic_cache;
    forward_batch(bundle.critic, xc.data(), B, critic_cache);

    double mean_q = 0.0;
    for (size_t i = 0; i < B; ++i) mean_q += critic_cache.output[i];
    mean_q /= static_cast<double>(B);

    // d(mean Q)/d(critic input); the critic itself is not updated here.
    std::vector<double> ones(B, 1.0 / static_cast<double>(B));
    GradientSet critic_scratch = zero_gradients(bundle.critic);
    std::vector<double> input_grad;
    backward_batch(bundle.critic, critic_cache, ones, critic_scratch,
                   &input_grad);

    // Chain the action part through the actor and ascend.
    std::vector<double> daction(B * 2);
    for (size_t i = 0; i < B; ++i) {
        daction[i * 2] = input_grad[i * (dim + 2) + dim];
        daction[i * 2 + 1] = input_grad[i * (dim + 2) + dim + 1];
    }
    GradientSet actor_grads = zero_gradients(bundle.actor);
    backward_batch(bundle.actor, actor_cache, daction, actor_grads);
    scale_gradients(actor_grads, -1.0);
    adam_step(bundle.actor, actor_grads, bundle.actor_opt, lr);
    return mean_q;
}

int compass_index(const std::array<double, 2>& action) {
    for (size_t i = 0; i < kCompassActions.size(); ++i)
        if (kCompassActions[i][0] == action[0] &&
            kCompassActions[i][1] == action[1])
            return static_cast<int>(i);
    throw std::invalid_argument("action is not one of the 8 compass moves");
}

DqnBundle make_dqn(long state_dim, const AgentConfig& cfg, double obs_scale,
                   Rng& init_rng) {
    DqnBundle b;
    std::vector<long> dims{state_dim};
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(static_cast<long>(kCompassActions.size()));
    b.q = make_mlp(dims, Activation::ReLU, Activation::Identity, init_rng);
    b.target_q = b.q;
    b.opt = make_adam_state(b.q);
    b.obs_scale = obs_scale;
    return b;
}

int dqn_select(const DqnBundle& bundle, const std::vector<double>& state,
               bool explore, double epsilon, Rng& noise_rng) {
    if (explore && noise_rng.next_double() < epsilon)
        return static_cast<int>(noise_rng.uniform_int(
            0, static_cast<long>(kCompassActions.size()) - 1));
    std::vector<double> scaled(state.size());
    for (size_t i = 0; i < state.size(); ++i)
        scaled[i] = state[i] * bundle.obs_scale;
    ForwardCache cache;
    std::vector<double> q = forward(bundle.q, scaled, cache);
    int best = 0;
    for (size_t i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = static_cast<int>(i);
    return best;
}

double dqn_baseline_update(DqnBundle& bundle,
                           const std::vector<const Transition*>& batch,
                           double gamma, double lr, long sync_interval) {
    if (batch.empty())
        throw std::invalid_argument("dqn_baseline_update: empty batch");
    const size_t B = batch.size();
    const size_t n_actions = kCompassActions.size();

    std::vector<double> next = scaled_states(batch, true, bundle.obs_scale);
    ForwardCache target_cache;
    forward_batch(bundle.target_q, next.data(), B, target_cache);

    std::vector<double> states = scaled_states(batch, false, bundle.obs_scale);
    ForwardCache cache;
    forward_batch(bundle.q, states.data(), B, cache);

    double loss = 0.0;
    std::vector<double> gout(B * n_actions, 0.0);
    for (size_t i = 0; i < B; ++i) {
        double best_next = target_cache.output[i * n_actions];
        for (size_t a = 1; a < n_actions; ++a)
            best_next = std::max(best_next,
                                 target_cache.output[i * n_actions + a]);
        double y = batch[i]->reward +
                   (batch[i]->done ? 0.0 : gamma * best_next);
        size_t ai = static_cast<size_t>(compass_index(batch[i]->action));
        double q = cache.output[i * n_actions + ai];
        loss += (y - q) * (y - q);
        gout[i * n_actions + ai] = 2.0 * (q - y) / static_cast<double>(B);
    }
    loss /= static_cast<double>(B);

    GradientSet grads = zero_gradients(bundle.q);
    backward_batch(bundle.q, cache, gout, grads);
    adam_step(bundle.q, grads, bundle.opt, lr);

    if (++bundle.updates_since_sync >= sync_interval) {
        bundle.target_q = bundle.q;
        bundle.updates_since_sync = 0;
    }
    return loss;
}

std::vector<std::vector<Vec2>> predict_obstacles(const SceneConfig& scene,
                                                 const WorldState& world,
                                                 const PredictorConfig& cfg) {
    PredictorConfig pc = cfg;
    pc.horizon = scene.horizon;
    std::vector<std::vector<Vec2>> out;
    out.reserve(world.obstacles.size());
    for (const auto& obstacle : world.obstacles)
        out.push_back(predict(obstacle.history, pc));
    return out;
}

namespace {

std::vector<double> observe_impl(const SceneConfig& scene,
                                 const WorldState& world, Algo algo,
                                 const PredictorConfig& cfg, long episode,
                                 long step_no,
                                 const TrainObserver* train_obs,
                                 const EvalObserver* eval_obs) {
    std::vector<Vec2> points;
    points.reserve(world.obstacles.size());
    if (algo == Algo::Mddpg) {
        auto tracks = predict_obstacles(scene, world, cfg);
        for (size_t i = 0; i < tracks.size(); ++i) {
            if (train_obs && train_obs->on_prediction)
                train_obs->on_prediction(episode, step_no, i, tracks[i]);
            if (eval_obs && eval_obs->on_prediction)
                eval_obs->on_prediction(episode, step_no, i, tracks[i]);
            points.push_back(tracks[i].back());
        }
    } else {
        for (const auto& obstacle : world.obstacles)
            points.push_back(obstacle.position);
    }
    return build_observation(scene, world, points);
}

} // namespace

std::vector<double> observe(const SceneConfig& scene, const WorldState& world,
                            Algo algo, const PredictorConfig& cfg) {
    return observe_impl(scene, world, algo, cfg, 0, 0, nullptr, nullptr);
}

TrainResult train(const SceneConfig& scene, const AgentConfig& cfg,
                  long episodes, std::uint64_t seed, Algo algo,
                  const TrainObserver* observer) {
    TrainResult res;
    res.algo = algo;

    const double obs_scale = 1.0 / scene.bounds.diagonal();
    Rng init_rng(derive_seed(seed, Stream::Init));
    if (algo == Algo::Dqn)
        res.dqn = make_dqn(scene.state_dim(), cfg, obs_scale, init_rng);
    else
        res.agent = make_agent(scene.state_dim(), cfg, obs_scale, init_rng);

    ReplayBuffer buffer(static_cast<size_t>(cfg.buffer_capacity));
    Rng replay_rng(derive_seed(seed, Stream::Replay));
    PredictorConfig pcfg = cfg.predictor;
    pcfg.horizon = scene.horizon;

    const double half = std::max(1.0, static_cast<double>(episodes) * 0.5);
    long total_steps = 0;

    for (long ep = 0; ep < episodes; ++ep) {
        double frac = std::min(1.0, static_cast<double>(ep) / half);
        double sigma = cfg.sigma_start + (cfg.sigma_end - cfg.sigma_start) * frac;
        double eps = cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac;

        WorldState world = reset(scene, derive_seed(seed, Stream::World,
                                                    static_cast<std::uint64_t>(ep)),
                                 static_cast<size_t>(pcfg.fit_window));
        Rng noise_rng(derive_seed(seed, Stream::Noise,
                                  static_cast<std::uint64_t>(ep)));
        std::vector<double> obs =
            observe_impl(scene, world, algo, pcfg, ep, 0, observer, nullptr);

        EpisodeLog log;
        log.episode = ep;

        while (world.status == EpisodeStatus::Running) {
            std::array<double, 2> action;
            if (total_steps < cfg.warmup_steps) {
                // Warmup: uniform random actions fill the replay buffer with
                // diverse coverage before any update runs.
                if (algo == Algo::Dqn)
                    action = kCompassActions[static_cast<size_t>(
                        noise_rng.uniform_int(0, 7))];
                else
                    action = {noise_rng.uniform(-1.0, 1.0),
                              noise_rng.uniform(-1.0, 1.0)};
            } else if (algo == Algo::Dqn) {
                action = kCompassActions[static_cast<size_t>(
                    dqn_select(res.dqn, obs, true, eps, noise_rng))];
            } else {
                action = select_action(res.agent, obs, true, sigma, noise_rng);
            }

            StepEvents ev = step(scene, world, action);
            StepRewardBreakdown rb = shape_reward(ev, cfg.reward);
            if (observer && observer->on_reward)
                observer->on_reward(ep, world.step_count, rb);

            std::vector<double> next_obs = observe_impl(
                scene, world, algo, pcfg, ep, world.step_count, observer,
                nullptr);
            bool done = world.status != EpisodeStatus::Running;
            buffer.store({obs, action, rb.total, next_obs, done});
            log.cumulative_reward += rb.total;
            ++total_steps;

            if (total_steps >= cfg.warmup_steps &&
                buffer.size() >= static_cast<size_t>(cfg.batch_size)) {
                for (long u = 0; u < cfg.updates_per_step; ++u) {
                    auto batch = buffer.sample(
                        static_cast<size_t>(cfg.batch_size), replay_rng);
                    if (algo == Algo::Dqn) {
                        dqn_baseline_update(res.dqn, batch, cfg.gamma,
                                            cfg.critic_lr, cfg.dqn_target_sync);
                    } else {
                        auto y = critic_target(batch, res.agent.target_actor,
                                               res.agent.target_critic,
                                               cfg.gamma, obs_scale);
                        critic_update(res.agent, batch, y, cfg.critic_lr);
                        actor_update(res.agent, batch, cfg.actor_lr);
                        soft_update(res.agent.target_actor, res.agent.actor,
                                    cfg.tau);
                        soft_update(res.agent.target_critic, res.agent.critic,
                                    cfg.tau);
                    }
                }
            }
            obs = std::move(next_obs);
        }

        log.outcome = world.status;
        log.steps = world.step_count;
        log.path = world.path_log;
        res.logs.push_back(std::move(log));
    }
    return res;
}

std::vector<EpisodeLog> evaluate(const SceneConfig& scene,
                                 const AgentConfig& cfg,
                                 const TrainResult& trained, long episodes,
                                 std::uint64_t seed,
                                 const EvalObserver* observer) {
    PredictorConfig pcfg = cfg.predictor;
    pcfg.horizon = scene.horizon;
    Rng noise_rng(derive_seed(seed, Stream::Noise)); // unused when greedy
    std::vector<EpisodeLog> logs;

    for (long ep = 0; ep < episodes; ++ep) {
        WorldState world = reset(scene, derive_seed(seed, Stream::Eval,
                                                    static_cast<std::uint64_t>(ep)),
                                 static_cast<size_t>(pcfg.fit_window));
        if (observer && observer->on_reset) observer->on_reset(ep, world);
        std::vector<double> obs = observe_impl(scene, world, trained.algo, pcfg,
                                               ep, 0, nullptr, observer);
        EpisodeLog log;
        log.episode = ep;

        while (world.status == EpisodeStatus::Running) {
            std::array<double, 2> action;
            if (trained.algo == Algo::Dqn)
                action = kCompassActions[static_cast<size_t>(
                    dqn_select(trained.dqn, obs, false, 0.0, noise_rng))];
            else
                action =
                    select_action(trained.agent, obs, false, 0.0, noise_rng);

            StepEvents ev = step(scene, world, action);
            StepRewardBreakdown rb = shape_reward(ev, cfg.reward);
            log.cumulative_reward += rb.total;
            if (observer && observer->on_step)
                observer->on_step(ep, world.step_count, world);
            obs = observe_impl(scene, world, trained.algo, pcfg, ep,
                               world.step_count, nullptr, observer);
        }
        log.outcome = world.status;
        log.steps = world.step_count;
        log.path = world.path_log;
        logs.push_back(std::move(log));
    }
    return logs;
}

} // namespace mddpg
