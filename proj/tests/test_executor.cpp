#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "davenport/control.hpp"
#include "davenport/executor.hpp"

using namespace davenport;
using namespace davenport::exec;

namespace {

env::EnvConfig quiet_env(int episode_length = 300) {
    env::EnvConfig cfg;
    cfg.episode_length = episode_length;
    cfg.control_noise = 0.0;
    cfg.tilt_drift = 0.0;
    return cfg;
}

ControllerSet pd_controllers() {
    ControllerSet set;
    const auto ctl = control::make_pd_controller(4.0, 2.0);
    set.set(Axis::X, ctl);
    set.set(Axis::Y, ctl);
    set.set(Axis::Z, ctl);
    return set;
}

}  // namespace

TEST_CASE("goal equal to initial succeeds with trivial effort") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    const auto set = pd_controllers();
    Rng rng(1);
    const auto initial = uniform_rotation(rng);
    ExecConfig cfg;
    cfg.chain = ChainMode::ZXZ;
    const auto trace = execute(e, set, initial, initial, cfg, 7);
    CHECK(trace.success);
    CHECK(trace.total_env_steps == 0);
    CHECK(trace.final_distance < 1e-9);
    REQUIRE(trace.steps.size() == 3);
    for (const auto& s : trace.steps) CHECK(s.step_success);
}

TEST_CASE("budget never exceeds three rotations worth of steps") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    const auto set = pd_controllers();
    Rng rng(2);
    ExecConfig cfg;
    cfg.chain = ChainMode::ZXZ;
    for (int i = 0; i < 40; ++i) {
        const auto initial = uniform_rotation(rng);
        const auto goal = uniform_rotation(rng);
        for (bool split : {false, true}) {
            cfg.split_large = split;
            const auto trace = execute(e, set, initial, goal, cfg, 100 + i);
            CHECK(trace.total_env_steps <= 3 * cfg.per_step_budget);
            int sum = 0;
            for (const auto& s : trace.steps) sum += s.steps_used;
            CHECK(sum == trace.total_env_steps);
            // Each split pair shares its parent budget.
            if (split) {
                for (int parent = 0; parent < 3; ++parent) {
                    int parent_steps = 0, parts = 0;
                    for (std::size_t k = 0; k < trace.plan.steps.size(); ++k) {
                        if (trace.plan.steps[k].parent_index == parent) {
                            parent_steps += trace.steps[k].steps_used;
                            ++parts;
                        }
                    }
                    CHECK(parent_steps <= cfg.per_step_budget);
                    CHECK(parts <= 2);
                }
            }
        }
    }
}

TEST_CASE("a capable controller solves arbitrary goals through the chain") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    const auto set = pd_controllers();
    Rng rng(3);
    ExecConfig cfg;  // best-of default
    int ok = 0;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
        const auto initial = uniform_rotation(rng);
        const auto goal = uniform_rotation(rng);
        const auto trace = execute_best_of(e, set, initial, goal, cfg, 200 + i);
        if (trace.success) ++ok;
    }
    CHECK(ok == n);
}

TEST_CASE("executing a single-axis goal matches the raw policy success") {
    // Reduction oracle: a >=95% accurate z controller must keep its rate
    // through the executor on pure z goals (within 3 binomial SEs).
    env::EnvConfig cfg = quiet_env(100);
    cfg.control_noise = 0.05;  // leave some noise so the rate is not exactly 1
    const auto ctl = control::make_pd_controller(1.2, 0.6);

    // Raw single-goal success over 200 trials.
    env::CubeRotationEnv raw(env::TaskKind::RotateZ, cfg);
    int raw_ok = 0;
    const int n = 200;
    Rng rng(4);
    std::vector<UnitQuaternion> initials, goals;
    for (int i = 0; i < n; ++i) {
        auto obs = raw.reset(300 + i);
        initials.push_back(obs.orientation);
        goals.push_back(raw.goal().desired);
        env::StepResult r;
        for (int t = 0; t < cfg.episode_length; ++t) {
            r = raw.step(ctl(obs, raw.goal().desired));
            obs = r.observation;
        }
        if (r.info.is_success) ++raw_ok;
    }
    const double raw_rate = raw_ok / double(n);
    REQUIRE(raw_rate >= 0.9);

    ControllerSet set;
    set.set(Axis::Z, ctl);
    set.set(Axis::X, ctl);
    set.set(Axis::Y, ctl);
    env::CubeRotationEnv chained_env(env::TaskKind::RotateZ, quiet_env(300));
    ExecConfig xcfg;
    xcfg.chain = ChainMode::ZXZ;
    int chained_ok = 0;
    for (int i = 0; i < n; ++i) {
        const auto trace = execute(chained_env, set, initials[i], goals[i], xcfg, 300 + i);
        if (trace.success) ++chained_ok;
    }
    const double chained_rate = chained_ok / double(n);
    const double se = std::sqrt(raw_rate * (1 - raw_rate) / n);
    CHECK(chained_rate >= raw_rate - 3 * se);
}

TEST_CASE("best-of-both selection rules") {
    // An environment that can barely rotate about x: zxz chains stall on
    // their middle step while zyz chains remain fully executable.
    env::EnvConfig no_x = quiet_env();
    no_x.gain.x = 1e-9;
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, no_x);
    const auto set = pd_controllers();

    Rng rng(5);
    const auto initial = uniform_rotation(rng);
    const auto goal = UnitQuaternion::from_axis_angle(Axis::X, 1.3) *
                      UnitQuaternion::from_axis_angle(Axis::Z, 0.8) * initial;
    ExecConfig cfg;
    const auto zxz = execute(e, set, initial, goal, cfg, 11, Chain::zxz());
    const auto zyz = execute(e, set, initial, goal, cfg, 11, Chain::zyz());
    CHECK_FALSE(zxz.success);
    CHECK(zyz.success);
    const auto best = execute_best_of(e, set, initial, goal, cfg, 11);
    CHECK(best.success);
    CHECK(best.chain_used == Chain::zyz());

    // Both chains failing: the smaller final distance wins.
    env::EnvConfig z_only = no_x;
    z_only.gain.y = 1e-9;
    env::CubeRotationEnv ez(env::TaskKind::RotateXYZ, z_only);
    const auto a = execute(ez, set, initial, goal, cfg, 12, Chain::zxz());
    const auto b = execute(ez, set, initial, goal, cfg, 12, Chain::zyz());
    CHECK_FALSE(a.success);
    CHECK_FALSE(b.success);
    const auto stuck = execute_best_of(ez, set, initial, goal, cfg, 12);
    CHECK_FALSE(stuck.success);
    CHECK(stuck.final_distance == std::min(a.final_distance, b.final_distance));

    // Dominance over a goal set: best-of is at least as good as each chain.
    int best_ok = 0, zxz_ok = 0, zyz_ok = 0;
    for (int i = 0; i < 50; ++i) {
        const auto g2 = uniform_rotation(rng);
        const auto init2 = uniform_rotation(rng);
        best_ok += execute_best_of(e, set, init2, g2, cfg, 400 + i).success;
        zxz_ok += execute(e, set, init2, g2, cfg, 400 + i, Chain::zxz()).success;
        zyz_ok += execute(e, set, init2, g2, cfg, 400 + i, Chain::zyz()).success;
    }
    CHECK(best_ok >= std::max(zxz_ok, zyz_ok));
}

TEST_CASE("missing policy raises a configuration error") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    ControllerSet zl_only;
    zl_only.set(Axis::Z, control::make_pd_controller());
    Rng rng(6);
    const auto initial = uniform_rotation(rng);
    const auto goal = UnitQuaternion::from_axis_angle(Axis::X, 1.0) * initial;
    ExecConfig cfg;
    cfg.chain = ChainMode::ZXZ;
    CHECK_THROWS_AS(execute(e, zl_only, initial, goal, cfg, 1), std::runtime_error);

    PolicySet ps;
    CHECK_THROWS_AS(ps.validate(), std::runtime_error);
}

TEST_CASE("split and unsplit plans agree on parent endpoints during execution") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    const auto set = pd_controllers();
    Rng rng(7);
    const auto initial = uniform_rotation(rng);
    const auto goal = UnitQuaternion::from_axis_angle(Axis::X, 2.8) *
                      UnitQuaternion::from_axis_angle(Axis::Z, -2.5) * initial;
    ExecConfig split_cfg, unsplit_cfg;
    split_cfg.chain = unsplit_cfg.chain = ChainMode::ZXZ;
    split_cfg.split_large = true;
    unsplit_cfg.split_large = false;
    const auto a = execute(e, set, initial, goal, split_cfg, 21);
    const auto b = execute(e, set, initial, goal, unsplit_cfg, 21);
    CHECK(a.plan.steps.size() > b.plan.steps.size());
    for (const auto& s : a.plan.steps) CHECK(std::abs(s.angle) <= kPi / 2 + 1e-9);
    // Final subgoals coincide.
    CHECK(quat_distance(a.plan.steps.back().subgoal, b.plan.steps.back().subgoal) < 1e-9);
}

TEST_CASE("trace serialization is line shaped") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    const auto set = pd_controllers();
    Rng rng(8);
    const auto initial = uniform_rotation(rng);
    const auto goal = uniform_rotation(rng);
    ExecConfig cfg;
    cfg.chain = ChainMode::ZXZ;
    const auto trace = execute(e, set, initial, goal, cfg, 31);
    const auto line = trace_line(trace);
    CHECK(line.find("z-x-z ") == 0);
    CHECK(line.find('|') != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);
}

TEST_CASE("replan mode rebases subgoals on achieved poses") {
    env::CubeRotationEnv e(env::TaskKind::RotateXYZ, quiet_env());
    Rng rng(9);
    ExecConfig open_cfg, replan_cfg;
    open_cfg.chain = replan_cfg.chain = ChainMode::ZXZ;
    open_cfg.split_large = replan_cfg.split_large = false;
    replan_cfg.replan_from_achieved = true;

    const auto set = pd_controllers();
    for (int i = 0; i < 10; ++i) {
        const auto initial = uniform_rotation(rng);
        const auto goal = uniform_rotation(rng);
        const auto open_trace = execute(e, set, initial, goal, open_cfg, 500 + i);
        const auto replan_trace = execute(e, set, initial, goal, replan_cfg, 500 + i);
        REQUIRE(replan_trace.steps.size() == 3);
        // Open-loop subgoals are the precomputed plan; replanned subgoals are
        // rebased on the previously achieved orientation.
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(quat_distance(open_trace.steps[k].subgoal, open_trace.plan.steps[k].subgoal) <
                  1e-12);
            const UnitQuaternion base =
                k == 0 ? initial : replan_trace.steps[k - 1].achieved;
            const auto expected =
                UnitQuaternion::from_axis_angle(replan_trace.plan.steps[k].axis,
                                                replan_trace.plan.steps[k].angle) *
                base;
            CHECK(quat_distance(replan_trace.steps[k].subgoal, expected) < 1e-12);
        }
        // Both are judged against the original goal, never the last subgoal.
        CHECK(replan_trace.success == (replan_trace.final_distance < replan_cfg.tolerance));
        CHECK(open_trace.success == (open_trace.final_distance < open_cfg.tolerance));
    }
}
