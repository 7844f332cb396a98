#pragma once

// Surrogate cube-rotation environment: a damped rigid body driven by
// per-axis angular-acceleration commands, with sparse {0, -1} reward on the
// quaternion goal metric. Stands in for dexterous-hand physics while keeping
// the two properties the hierarchical method depends on: z rotations are
// easier than x/y (per-axis gains), and tilted poses are less stable
// (tilt-conditioned drift noise).

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "davenport/davenport.hpp"
#include "davenport/quaternion.hpp"
#include "davenport/rng.hpp"
#include "davenport/text_io.hpp"

namespace davenport::env {

enum class TaskKind { RotateZ, RotateX, RotateY, RotateParallel, RotateXYZ };

inline std::string task_name(TaskKind t) {
    switch (t) {
        case TaskKind::RotateZ: return "rotate-z";
        case TaskKind::RotateX: return "rotate-x";
        case TaskKind::RotateY: return "rotate-y";
        case TaskKind::RotateParallel: return "rotate-parallel";
        default: return "rotate-xyz";
    }
}

inline TaskKind task_from_name(const std::string& s) {
    if (s == "rotate-z") return TaskKind::RotateZ;
    if (s == "rotate-x") return TaskKind::RotateX;
    if (s == "rotate-y") return TaskKind::RotateY;
    if (s == "rotate-parallel") return TaskKind::RotateParallel;
    if (s == "rotate-xyz") return TaskKind::RotateXYZ;
    throw std::invalid_argument("unknown task: " + s);
}

struct EnvConfig {
    int episode_length = 100;    // steps per episode
    double dt = 0.05;            // s
    Vec3 gain{1.75, 1.75, 2.0};  // rad/s^2 per unit action, per axis
    double damping = 0.5;        // 1/s
    double control_noise = 0.05; // rad/s^2, on the commanded acceleration
    double tilt_drift = 0.1;     // rad/s, applied only to tilted poses
    double omega_max = 2.0;      // rad/s, componentwise speed limit
    double tolerance = 0.1;      // radians, success threshold
    std::uint64_t seed = 0;

    void validate() const {
        if (episode_length < 1) throw std::invalid_argument("episode_length must be >= 1");
        if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
        if (!(gain.x > 0) || !(gain.y > 0) || !(gain.z > 0)) {
            throw std::invalid_argument("gains must be positive");
        }
        if (damping < 0) throw std::invalid_argument("damping must be non-negative");
        if (damping * dt > 1.0) throw std::invalid_argument("damping * dt must not exceed 1");
        if (control_noise < 0) throw std::invalid_argument("control_noise must be non-negative");
        if (tilt_drift < 0) throw std::invalid_argument("tilt_drift must be non-negative");
        if (!(omega_max > 0)) throw std::invalid_argument("omega_max must be positive");
        if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
    }
};

inline void save_env_config(std::ostream& out, const EnvConfig& c) {
    out << "episode_length = " << c.episode_length << "\n"
        << "dt = " << io::fmt(c.dt) << "\n"
        << "g_x = " << io::fmt(c.gain.x) << "\n"
        << "g_y = " << io::fmt(c.gain.y) << "\n"
        << "g_z = " << io::fmt(c.gain.z) << "\n"
        << "damping = " << io::fmt(c.damping) << "\n"
        << "control_noise = " << io::fmt(c.control_noise) << "\n"
        << "tilt_drift = " << io::fmt(c.tilt_drift) << "\n"
        << "omega_max = " << io::fmt(c.omega_max) << "\n"
        << "tolerance = " << io::fmt(c.tolerance) << "\n"
        << "seed = " << c.seed << "\n";
}

inline EnvConfig load_env_config(std::istream& in) {
    EnvConfig c;
    for (const auto& [key, value] : io::parse_key_values(in)) {
        if (key == "episode_length") c.episode_length = std::stoi(value);
        else if (key == "dt") c.dt = io::parse_double(value);
        else if (key == "g_x") c.gain.x = io::parse_double(value);
        else if (key == "g_y") c.gain.y = io::parse_double(value);
        else if (key == "g_z") c.gain.z = io::parse_double(value);
        else if (key == "damping") c.damping = io::parse_double(value);
        else if (key == "control_noise") c.control_noise = io::parse_double(value);
        else if (key == "tilt_drift") c.tilt_drift = io::parse_double(value);
        else if (key == "omega_max") c.omega_max = io::parse_double(value);
        else if (key == "tolerance") c.tolerance = io::parse_double(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else throw std::invalid_argument("unknown environment config key: " + key);
    }
    c.validate();
    return c;
}

/// Orientation goal; position is deliberately absent from goal space.
struct GoalSpec {
    UnitQuaternion desired;
};

struct Observation {
    UnitQuaternion orientation;
    Vec3 angular_velocity;
    Vec3 previous_action;  // zero at episode start

    static constexpr int kSize = 10;

    std::array<double, kSize> flatten() const {
        return {orientation.w(), orientation.x(), orientation.y(), orientation.z(),
                angular_velocity.x, angular_velocity.y, angular_velocity.z,
                previous_action.x, previous_action.y, previous_action.z};
    }
};

struct EnvState {
    UnitQuaternion orientation;
    Vec3 angular_velocity;
    int step_count = 0;
};

struct StepInfo {
    bool is_success = false;
    double distance = 0.0;
};

struct StepResult {
    Observation observation;
    double reward = -1.0;
    StepInfo info;
};

/// Sparse reward: 0 on success, -1 otherwise. Kept as a pure function so
/// hindsight relabeling can recompute rewards for substituted goals.
inline double compute_reward(const UnitQuaternion& achieved, const UnitQuaternion& desired,
                             double tolerance) {
    return is_success(achieved, desired, tolerance) ? 0.0 : -1.0;
}

/// True when some cube face normal lies within `tol` radians of world +-z.
inline bool cube_is_flat(const UnitQuaternion& orientation, double tol = 0.2) {
    const auto R = orientation.to_matrix();
    const double c = std::cos(tol);
    for (int i = 0; i < 3; ++i) {
        if (std::abs(R[2][i]) >= c) return true;
    }
    return false;
}

/// Samples a task goal as an absolute target orientation.
inline GoalSpec sample_goal(TaskKind task, Rng& rng) {
    switch (task) {
        case TaskKind::RotateZ:
            return {UnitQuaternion::from_axis_angle(Axis::Z, rng.uniform_angle())};
        case TaskKind::RotateX:
            return {UnitQuaternion::from_axis_angle(Axis::X, rng.uniform_angle())};
        case TaskKind::RotateY:
            return {UnitQuaternion::from_axis_angle(Axis::Y, rng.uniform_angle())};
        case TaskKind::RotateParallel: {
            static constexpr double kQuantized[5] = {-kPi, -kPi / 2, 0.0, kPi / 2, kPi};
            const double zspin = rng.uniform_angle();
            const double ax = kQuantized[rng.integer(5)];
            const double ay = kQuantized[rng.integer(5)];
            return {UnitQuaternion::from_axis_angle(Axis::Z, zspin) *
                    UnitQuaternion::from_axis_angle(Axis::X, ax) *
                    UnitQuaternion::from_axis_angle(Axis::Y, ay)};
        }
        default:
            return {uniform_rotation(rng)};
    }
}

class CubeRotationEnv {
  public:
    CubeRotationEnv(TaskKind task, EnvConfig config)
        : task_(task), cfg_(config), rng_(config.seed) {
        cfg_.validate();
    }

    /// Starts a fresh episode. RotateZ begins from the flat rest pose with a
    /// random z spin (the pose family the cube settles into). RotateX/Y
    /// begin mostly from single-spin poses about their own axis (the family
    /// their goals live on) with a 5% share of z-spun rest poses, covering
    /// the states the chained executor launches single-axis rotations from.
    /// The 3D-goal tasks begin from a uniform random orientation. Zero
    /// velocity; freshly sampled goal. Fully determined by `seed`.
    Observation reset(std::uint64_t seed) {
        rng_ = Rng(seed);
        if (task_ == TaskKind::RotateZ) {
            state_.orientation = UnitQuaternion::from_axis_angle(Axis::Z, rng_.uniform_angle());
        } else if (task_ == TaskKind::RotateX || task_ == TaskKind::RotateY) {
            const Axis own = task_ == TaskKind::RotateX ? Axis::X : Axis::Y;
            const double u = rng_.uniform();
            const double spin = rng_.uniform_angle();
            state_.orientation = UnitQuaternion::from_axis_angle(u < 0.05 ? Axis::Z : own, spin);
        } else {
            state_.orientation = uniform_rotation(rng_);
        }
        state_.angular_velocity = {};
        state_.step_count = 0;
        prev_action_ = {};
        goal_ = sample_goal(task_, rng_);
        return observation();
    }

    /// Starts an episode from a prescribed orientation and goal (used by the
    /// executor and the benchmark harness).
    Observation reset_to(const UnitQuaternion& orientation, const GoalSpec& goal,
                         std::uint64_t seed) {
        rng_ = Rng(seed);
        state_.orientation = orientation;
        state_.angular_velocity = {};
        state_.step_count = 0;
        prev_action_ = {};
        goal_ = goal;
        return observation();
    }

    StepResult step(const Vec3& action) {
        if (state_.step_count >= cfg_.episode_length) {
            throw std::runtime_error("episode exhausted: step called past episode_length");
        }
        const Vec3 a = action.clipped(-1.0, 1.0);

        // Noise draws are unconditional so the stream advances identically
        // regardless of pose; only the application is tilt-gated. Drift is a
        // velocity diffusion, hence the sqrt(dt) step scaling.
        const Vec3 accel_noise = cfg_.control_noise * rng_.gaussian3();
        const Vec3 drift = (cfg_.tilt_drift * std::sqrt(cfg_.dt)) * rng_.gaussian3();
        const bool tilted = !cube_is_flat(state_.orientation);

        Vec3 omega = (1.0 - cfg_.damping * cfg_.dt) * state_.angular_velocity;
        omega = omega + cfg_.dt * Vec3{cfg_.gain.x * a.x + accel_noise.x,
                                       cfg_.gain.y * a.y + accel_noise.y,
                                       cfg_.gain.z * a.z + accel_noise.z};
        if (tilted) omega = omega + drift;
        omega = omega.clipped(-cfg_.omega_max, cfg_.omega_max);

        state_.orientation =
            UnitQuaternion::from_rotation_vector(cfg_.dt * omega) * state_.orientation;
        state_.angular_velocity = omega;
        prev_action_ = a;
        ++state_.step_count;

        StepResult r;
        r.observation = observation();
        r.info.distance = quat_distance(state_.orientation, goal_.desired);
        r.info.is_success = r.info.distance < cfg_.tolerance;
        r.reward = r.info.is_success ? 0.0 : -1.0;
        return r;
    }

    /// Replaces the current goal (reward/info only; dynamics are unaffected).
    void set_goal(const GoalSpec& g) { goal_ = g; }

    const GoalSpec& goal() const { return goal_; }
    const EnvState& state() const { return state_; }
    const EnvConfig& config() const { return cfg_; }
    TaskKind task() const { return task_; }

    Observation observation() const {
        return {state_.orientation, state_.angular_velocity, prev_action_};
    }

  private:
    TaskKind task_;
    EnvConfig cfg_;
    EnvState state_;
    GoalSpec goal_;
    Vec3 prev_action_;
    Rng rng_;
};

/// One line per step, for debugging dumps:
/// step w x y z ax ay az reward
struct TrajectoryRecord {
    int step = 0;
    UnitQuaternion orientation;
    Vec3 action;
    double reward = -1.0;
};

inline void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
    for (const auto& r : records) {
        out << r.step << ' ' << io::fmt(r.orientation.w()) << ' ' << io::fmt(r.orientation.x())
            << ' ' << io::fmt(r.orientation.y()) << ' ' << io::fmt(r.orientation.z()) << ' '
            << io::fmt(r.action.x) << ' ' << io::fmt(r.action.y) << ' ' << io::fmt(r.action.z)
            << ' ' << io::fmt(r.reward) << '\n';
    }
}

}  // namespace davenport::env
