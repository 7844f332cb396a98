#pragma once

// Scripted controllers over the cube environment. The PD rotation controller
// doubles as a learning-free reference policy in tests and benchmark
// self checks.

#include <functional>

#include "davenport/env.hpp"
#include "davenport/quaternion.hpp"

namespace davenport::control {

using Controller = std::function<Vec3(const env::Observation&, const UnitQuaternion& goal)>;

/// Proportional-derivative control on the rotation error: commands
/// clip(kp * log(goal * q^-1) - kd * omega) componentwise in [-1, 1].
inline Vec3 pd_rotation_action(const env::Observation& obs, const UnitQuaternion& goal,
                               double kp, double kd) {
    const UnitQuaternion err = goal * obs.orientation.inverse();
    const Vec3 rotvec = err.to_rotation_vector();
    const Vec3 raw = kp * rotvec - kd * obs.angular_velocity;
    return raw.clipped(-1.0, 1.0);
}

inline Controller make_pd_controller(double kp = 4.0, double kd = 2.0) {
    return [kp, kd](const env::Observation& obs, const UnitQuaternion& goal) {
        return pd_rotation_action(obs, goal, kp, kd);
    };
}

/// Uniform random actions; the Monte-Carlo floor for benchmark checks.
inline Controller make_random_controller(Rng& rng) {
    return [&rng](const env::Observation&, const UnitQuaternion&) {
        return Vec3{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    };
}

}  // namespace davenport::control
