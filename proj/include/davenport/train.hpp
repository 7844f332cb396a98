#pragma once

// Training loop: alternate cycles of exploratory rollouts and gradient
// updates, evaluating after every cycle on a fixed held-out goal set with the
// deterministic actor. Single-threaded and fully reproducible from the seed.

#include <cstdint>
#include <ostream>
#include <vector>

#include "davenport/ddpg.hpp"
#include "davenport/env.hpp"
#include "davenport/replay.hpp"
#include "davenport/text_io.hpp"

namespace davenport::rl {

struct CurvePoint {
    int cycle = 0;
    std::uint64_t env_steps = 0;
    double success_rate = 0.0;
};

struct TrainResult {
    PolicyParams params;  // best-evaluated snapshot (early-stopping selection)
    std::vector<CurvePoint> curve;
    std::uint64_t env_steps_used = 0;
    TrainConfig config;
    env::EnvConfig env_config;
    env::TaskKind task = env::TaskKind::RotateZ;
    int best_cycle = -1;
    double best_success = 0.0;
};

inline void write_learning_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "cycle,env_steps,success_rate\n";
    for (const auto& p : curve) {
        out << p.cycle << ',' << p.env_steps << ',' << io::fmt(p.success_rate) << '\n';
    }
}

/// Success rate of the deterministic actor over `episodes` held-out episodes.
/// Goals come from `goals` (cycled); initial states follow the task's reset
/// distribution; success is judged at the final step.
inline double evaluate_policy(const PolicyParams& params, env::TaskKind task,
                              const env::EnvConfig& env_cfg,
                              const std::vector<env::GoalSpec>& goals, std::uint64_t seed_base) {
    env::CubeRotationEnv e(task, env_cfg);
    int successes = 0;
    const int episodes = static_cast<int>(goals.size());
    for (int i = 0; i < episodes; ++i) {
        auto obs = e.reset(derive_seed(seed_base, i));
        e.set_goal(goals[i]);
        env::StepResult r;
        for (int t = 0; t < env_cfg.episode_length; ++t) {
            r = e.step(act(params, obs, e.goal().desired));
            obs = r.observation;
        }
        if (r.info.is_success) ++successes;
    }
    return static_cast<double>(successes) / episodes;
}

/// Convenience overload sampling `episodes` goals from the task distribution.
inline double evaluate_policy(const PolicyParams& params, env::TaskKind task,
                              const env::EnvConfig& env_cfg, int episodes,
                              std::uint64_t seed_base) {
    Rng grng(derive_seed(seed_base, 0xe7a1));
    std::vector<env::GoalSpec> goals;
    goals.reserve(episodes);
    for (int i = 0; i < episodes; ++i) goals.push_back(env::sample_goal(task, grng));
    return evaluate_policy(params, task, env_cfg, goals, seed_base);
}

/// Full training run for one task. Environment steps are consumed only by
/// training rollouts (held-out evaluation runs on a separate instance) and
/// never exceed cfg.total_timesteps.
inline TrainResult train(env::TaskKind task, const env::EnvConfig& env_cfg,
                         const TrainConfig& cfg, std::ostream* log = nullptr) {
    env_cfg.validate();
    cfg.validate(env_cfg.episode_length);

    Trainer trainer(cfg, env_cfg.episode_length, env_cfg.tolerance);
    ReplayBuffer buffer(cfg.buffer_capacity, env_cfg.episode_length, env_cfg.tolerance);
    env::CubeRotationEnv e(task, env_cfg);

    Rng explore_rng(derive_seed(cfg.seed, 1));
    Rng batch_rng(derive_seed(cfg.seed, 2));
    Rng eval_goal_rng(derive_seed(cfg.seed, 3));
    const Exploration ex{cfg.explore_sigma, cfg.random_action_prob};

    // Held-out goals, fixed once per run.
    std::vector<env::GoalSpec> eval_goals;
    eval_goals.reserve(cfg.eval_episodes);
    for (int i = 0; i < cfg.eval_episodes; ++i) {
        eval_goals.push_back(env::sample_goal(task, eval_goal_rng));
    }
    const std::uint64_t eval_seed_base = derive_seed(cfg.seed, 4);

    TrainResult result{trainer.params(), {}, 0, cfg, env_cfg, task};
    const std::uint64_t cycle_steps = static_cast<std::uint64_t>(cfg.cycle_episodes) *
                                      static_cast<std::uint64_t>(env_cfg.episode_length);
    std::uint64_t episode_counter = 0;
    int cycle = 0;
    std::vector<double> norm_input(PolicyParams::kInputSize);

    while (result.env_steps_used + cycle_steps <= cfg.total_timesteps) {
        for (int epi = 0; epi < cfg.cycle_episodes; ++epi) {
            auto obs = e.reset(derive_seed(cfg.seed, 0x100000 + episode_counter));
            Episode episode;
            episode.reserve(env_cfg.episode_length);
            for (int t = 0; t < env_cfg.episode_length; ++t) {
                const Vec3 action =
                    act(trainer.params(), obs, e.goal().desired, ex, explore_rng);
                const auto r = e.step(action);
                Transition tr;
                tr.observation = obs.flatten();
                tr.action = action;
                tr.reward = r.reward;
                tr.next_observation = r.observation.flatten();
                tr.achieved_goal = obs.orientation;
                tr.next_achieved_goal = r.observation.orientation;
                tr.desired_goal = e.goal().desired;
                tr.episode_id = episode_counter;
                tr.step_index = t;
                episode.push_back(tr);
                obs = r.observation;
            }
            // Normalizer sees raw rollout inputs only (original goals).
            for (const auto& tr : episode) {
                std::array<double, PolicyParams::kInputSize> raw;
                PolicyParams::build_raw_input(tr.observation, tr.desired_goal, raw);
                trainer.params().normalizer.update(raw);
            }
            buffer.store_episode(episode);
            ++episode_counter;
            result.env_steps_used += env_cfg.episode_length;
        }

        const auto diag = trainer.train_cycle(buffer, batch_rng);
        const double success =
            evaluate_policy(trainer.params(), task, env_cfg, eval_goals, eval_seed_base);
        result.curve.push_back({cycle, result.env_steps_used, success});
        if (success > result.best_success || result.best_cycle < 0) {
            result.best_success = success;
            result.best_cycle = cycle;
            result.params = trainer.params();
        }
        if (log) {
            (*log) << "cycle " << cycle << " steps " << result.env_steps_used << " success "
                   << success << " critic_loss " << diag.mean_critic_loss << " |Q| "
                   << diag.mean_abs_q << "\n";
            log->flush();
        }
        ++cycle;
    }
    return result;
}

}  // namespace davenport::rl
