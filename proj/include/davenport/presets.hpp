#pragma once

// Named configuration presets for the benchmark pipeline.
//
//   paper  — the budgets of the original study (2M / 4M / 4M single-axis,
//            10M end-to-end) with the reference network and update cadence;
//            sized for cluster runs, not for the desk.
//   desk   — CPU-scale budgets (200k / 400k / 400k single-axis, 1M = summed
//            primitive budget for the end-to-end tasks) with a leaner
//            network and a denser update cadence so the same qualitative
//            results appear in minutes.
//   desk-smoke — tiny budgets for pipeline and determinism checks.
//
// Seeds 1, 2 and 3 are the documented benchmark seeds; seed 1 is the default
// used by the acceptance suite.

#include <cstdint>
#include <string>

#include "davenport/ddpg.hpp"
#include "davenport/env.hpp"

namespace davenport::bench {

inline constexpr std::uint64_t kDocumentedSeeds[3] = {1, 2, 3};

inline env::EnvConfig default_env_config() { return {}; }

inline std::uint64_t task_budget(env::TaskKind task, std::uint64_t z, std::uint64_t xy,
                                 std::uint64_t end_to_end) {
    switch (task) {
        case env::TaskKind::RotateZ: return z;
        case env::TaskKind::RotateX:
        case env::TaskKind::RotateY: return xy;
        default: return end_to_end;
    }
}

inline rl::TrainConfig paper_preset(env::TaskKind task) {
    rl::TrainConfig cfg;
    cfg.total_timesteps = task_budget(task, 2000000, 4000000, 10000000);
    cfg.hidden_sizes = {256, 256, 256};
    cfg.updates_per_cycle = 40;
    return cfg;
}

inline rl::TrainConfig desk_preset(env::TaskKind task) {
    rl::TrainConfig cfg;
    cfg.total_timesteps = task_budget(task, 200000, 400000, 1000000);
    cfg.hidden_sizes = {96, 96};
    cfg.updates_per_cycle = 500;
    cfg.actor_lr = 3e-4;  // a slower actor keeps the climb from collapsing
    return cfg;
}

inline rl::TrainConfig desk_smoke_preset(env::TaskKind task) {
    rl::TrainConfig cfg;
    cfg.total_timesteps = task_budget(task, 10000, 10000, 15000);
    cfg.hidden_sizes = {16, 16};
    cfg.updates_per_cycle = 10;
    cfg.batch_size = 64;
    cfg.eval_episodes = 10;
    return cfg;
}

inline rl::TrainConfig preset_by_name(const std::string& name, env::TaskKind task) {
    if (name == "paper") return paper_preset(task);
    if (name == "desk") return desk_preset(task);
    if (name == "desk-smoke") return desk_smoke_preset(task);
    throw std::invalid_argument("unknown preset: " + name +
                                " (expected paper, desk or desk-smoke)");
}

}  // namespace davenport::bench
