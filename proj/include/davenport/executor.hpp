#pragma once

// Hierarchical execution of a 3D rotation goal: decompose onto a chain, run
// the matching single-axis policy for each precomputed subgoal under a
// per-step budget, and judge final success against the original goal.
//
// Subgoals are fixed at planning time (open-loop chaining): a step that ends
// off its subgoal leaves the error for later steps, which were not trained to
// correct it. A diagnostic re-planning mode that rebases each step's subgoal
// on the achieved pose exists but is off by default.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "davenport/davenport.hpp"
#include "davenport/ddpg.hpp"
#include "davenport/env.hpp"
#include "davenport/quaternion.hpp"
#include "davenport/text_io.hpp"

namespace davenport::exec {

enum class ChainMode { ZXZ, ZYZ, BestOfBoth };

inline std::string chain_mode_name(ChainMode m) {
    switch (m) {
        case ChainMode::ZXZ: return "zxz";
        case ChainMode::ZYZ: return "zyz";
        default: return "best-of-both";
    }
}

inline ChainMode chain_mode_from_name(const std::string& s) {
    if (s == "zxz") return ChainMode::ZXZ;
    if (s == "zyz") return ChainMode::ZYZ;
    if (s == "best-of-both" || s == "best") return ChainMode::BestOfBoth;
    throw std::invalid_argument("unknown chain mode: " + s);
}

struct ExecConfig {
    ChainMode chain = ChainMode::BestOfBoth;
    bool split_large = true;
    int per_step_budget = 100;   // env steps per chain rotation
    double tolerance = 0.1;      // radians
    bool replan_from_achieved = false;  // diagnostic closed-loop mode

    void validate() const {
        if (per_step_budget < 1) throw std::invalid_argument("per_step_budget must be >= 1");
        if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
    }
};

struct StepTrace {
    Axis axis = Axis::Z;
    double angle = 0.0;
    UnitQuaternion subgoal;
    int steps_used = 0;
    UnitQuaternion achieved;
    bool step_success = false;
};

struct ExecTrace {
    DavenportPlan plan;
    std::vector<StepTrace> steps;
    double final_distance = 0.0;
    bool success = false;
    Chain chain_used = Chain::zxz();
    int total_env_steps = 0;
};

using Controller = std::function<Vec3(const env::Observation&, const UnitQuaternion&)>;

/// Per-axis controllers driving the plan steps.
class ControllerSet {
  public:
    void set(Axis a, Controller c) { controllers_[static_cast<int>(a)] = std::move(c); }

    bool has(Axis a) const { return static_cast<bool>(controllers_[static_cast<int>(a)]); }

    const Controller& for_axis(Axis a) const {
        const auto& c = controllers_[static_cast<int>(a)];
        if (!c) {
            throw std::runtime_error(std::string("no policy configured for axis ") +
                                     axis_name(a));
        }
        return c;
    }

  private:
    std::array<Controller, 3> controllers_;
};

/// Trained per-axis policy bundle: Z plus at least one of X/Y.
struct PolicySet {
    std::map<Axis, rl::PolicyParams> policies;

    void validate() const {
        if (!policies.count(Axis::Z) ||
            (!policies.count(Axis::X) && !policies.count(Axis::Y))) {
            throw std::runtime_error("policy set needs Z plus at least one of X/Y");
        }
    }

    ControllerSet controllers() const {
        validate();
        ControllerSet set;
        for (const auto& [axis, params] : policies) {
            const rl::PolicyParams* p = &params;
            set.set(axis, [p](const env::Observation& obs, const UnitQuaternion& goal) {
                return rl::act(*p, obs, goal);
            });
        }
        return set;
    }
};

/// Runs one chained execution. The env is reset to `initial` with `seed`;
/// each of the three chain rotations owns `per_step_budget` env steps, shared
/// equally between its two halves when splitting applies. A step ends early
/// once its subgoal is reached within tolerance; unused steps are not banked.
inline ExecTrace execute(env::CubeRotationEnv& e, const ControllerSet& controllers,
                         const UnitQuaternion& initial, const UnitQuaternion& goal,
                         const ExecConfig& cfg, std::uint64_t seed, const Chain& chain) {
    cfg.validate();
    ExecTrace trace;
    trace.chain_used = chain;
    trace.plan = plan(initial, goal, chain, cfg.split_large);
    for (const auto& s : trace.plan.steps) {
        controllers.for_axis(s.axis);  // fail fast on a missing policy
    }

    auto obs = e.reset_to(initial, env::GoalSpec{goal}, seed);

    // Group plan steps by owning chain rotation to share its budget.
    for (int parent = 0; parent < 3; ++parent) {
        std::vector<const PlanStep*> parts;
        for (const auto& s : trace.plan.steps) {
            if (s.parent_index == parent) parts.push_back(&s);
        }
        const int n_parts = static_cast<int>(parts.size());
        for (int pi = 0; pi < n_parts; ++pi) {
            const PlanStep& step = *parts[pi];
            const int budget = n_parts == 1 ? cfg.per_step_budget
                                            : (pi == 0 ? cfg.per_step_budget / 2
                                                       : cfg.per_step_budget -
                                                             cfg.per_step_budget / 2);
            UnitQuaternion subgoal = step.subgoal;
            if (cfg.replan_from_achieved) {
                subgoal = UnitQuaternion::from_axis_angle(step.axis, step.angle) *
                          obs.orientation;
            }
            const Controller& ctl = controllers.for_axis(step.axis);
            StepTrace st;
            st.axis = step.axis;
            st.angle = step.angle;
            st.subgoal = subgoal;
            while (st.steps_used < budget &&
                   !is_success(obs.orientation, subgoal, cfg.tolerance)) {
                obs = e.step(ctl(obs, subgoal)).observation;
                ++st.steps_used;
                ++trace.total_env_steps;
            }
            st.achieved = obs.orientation;
            st.step_success = is_success(st.achieved, subgoal, cfg.tolerance);
            trace.steps.push_back(st);
        }
    }

    trace.final_distance = quat_distance(obs.orientation, goal);
    trace.success = trace.final_distance < cfg.tolerance;
    return trace;
}

inline ExecTrace execute(env::CubeRotationEnv& e, const ControllerSet& controllers,
                         const UnitQuaternion& initial, const UnitQuaternion& goal,
                         const ExecConfig& cfg, std::uint64_t seed) {
    switch (cfg.chain) {
        case ChainMode::ZXZ:
            return execute(e, controllers, initial, goal, cfg, seed, Chain::zxz());
        case ChainMode::ZYZ:
            return execute(e, controllers, initial, goal, cfg, seed, Chain::zyz());
        default:
            throw std::invalid_argument("BestOfBoth requires execute_best_of");
    }
}

/// Runs both evaluated chains from identical env resets and keeps the
/// successful trace; if both fail, the one with the smaller final distance.
/// Ties (including both succeeding) go to z-x-z.
inline ExecTrace execute_best_of(env::CubeRotationEnv& e, const ControllerSet& controllers,
                                 const UnitQuaternion& initial, const UnitQuaternion& goal,
                                 const ExecConfig& cfg, std::uint64_t seed) {
    ExecTrace a = execute(e, controllers, initial, goal, cfg, seed, Chain::zxz());
    ExecTrace b = execute(e, controllers, initial, goal, cfg, seed, Chain::zyz());
    if (a.success) return a;
    if (b.success) return b;
    return b.final_distance < a.final_distance ? b : a;
}

/// One line per execution:
/// chain success final_distance total_steps | axis:angle:steps_used:success ...
inline std::string trace_line(const ExecTrace& t) {
    std::ostringstream out;
    out << t.chain_used.name() << ' ' << (t.success ? 1 : 0) << ' ' << io::fmt(t.final_distance)
        << ' ' << t.total_env_steps << " |";
    for (const auto& s : t.steps) {
        out << ' ' << axis_name(s.axis) << ':' << io::fmt(s.angle) << ':' << s.steps_used << ':'
            << (s.step_success ? 1 : 0);
    }
    return out.str();
}

}  // namespace davenport::exec
