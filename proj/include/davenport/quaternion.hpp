#pragma once

// Rotation primitives: world-frame (extrinsic) rotations represented as
// canonical unit quaternions, plus the angular metric used everywhere else.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace davenport {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr Vec3 operator*(double s, const Vec3& v) {
        return {s * v.x, s * v.y, s * v.z};
    }
    friend constexpr Vec3 operator*(const Vec3& v, double s) { return s * v; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(dot(*this)); }

    Vec3 clipped(double lo, double hi) const {
        auto c = [&](double v) { return v < lo ? lo : (v > hi ? hi : v); };
        return {c(x), c(y), c(z)};
    }
};

/// One of the three fixed world-frame axes.
enum class Axis : int { X = 0, Y = 1, Z = 2 };

inline Vec3 axis_unit(Axis a) {
    switch (a) {
        case Axis::X: return {1.0, 0.0, 0.0};
        case Axis::Y: return {0.0, 1.0, 0.0};
        default: return {0.0, 0.0, 1.0};
    }
}

inline char axis_name(Axis a) {
    switch (a) {
        case Axis::X: return 'x';
        case Axis::Y: return 'y';
        default: return 'z';
    }
}

inline Axis axis_from_name(char c) {
    switch (c) {
        case 'x': case 'X': return Axis::X;
        case 'y': case 'Y': return Axis::Y;
        case 'z': case 'Z': return Axis::Z;
        default: throw std::invalid_argument(std::string("unknown axis: ") + c);
    }
}

/// Unit quaternion in canonical sign form.
///
/// Canonical form keeps w >= 0; when w is zero (within 1e-12) the first
/// nonzero of (x, y, z) is made non-negative instead. Every factory and
/// operation renormalizes and re-canonicalizes, so q and -q collapse to a
/// single representative of the underlying rotation.
class UnitQuaternion {
  public:
    UnitQuaternion() = default;  // identity

    static UnitQuaternion identity() { return {}; }

    /// Builds from raw components, normalizing and canonicalizing.
    static UnitQuaternion from_components(double w, double x, double y, double z) {
        if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw std::invalid_argument("quaternion components must be finite");
        }
        const double n2 = w * w + x * x + y * y + z * z;
        if (n2 < 1e-24) {
            throw std::invalid_argument("cannot normalize near-zero quaternion");
        }
        UnitQuaternion q;
        q.w_ = w;
        q.x_ = x;
        q.y_ = y;
        q.z_ = z;
        // Skipping the rescale when already unit keeps renormalization
        // idempotent at the bit level (sign flips round-trip exactly).
        if (std::abs(n2 - 1.0) > 1e-14) {
            const double inv = 1.0 / std::sqrt(n2);
            q.w_ *= inv;
            q.x_ *= inv;
            q.y_ *= inv;
            q.z_ *= inv;
        }
        q.canonicalize();
        return q;
    }

    /// Rotation by `angle` radians about a fixed world axis.
    static UnitQuaternion from_axis_angle(Axis axis, double angle) {
        if (!std::isfinite(angle)) {
            throw std::invalid_argument("rotation angle must be finite");
        }
        const double h = 0.5 * angle;
        const double c = std::cos(h);
        const double s = std::sin(h);
        const Vec3 u = axis_unit(axis);
        return from_components(c, s * u.x, s * u.y, s * u.z);
    }

    /// Exponential map: rotation about v/|v| by |v| radians.
    static UnitQuaternion from_rotation_vector(const Vec3& v) {
        const double angle = v.norm();
        if (!std::isfinite(angle)) {
            throw std::invalid_argument("rotation vector must be finite");
        }
        if (angle < 1e-12) {
            // sin(a/2)/a -> 1/2 as a -> 0
            return from_components(1.0, 0.5 * v.x, 0.5 * v.y, 0.5 * v.z);
        }
        const double s = std::sin(0.5 * angle) / angle;
        return from_components(std::cos(0.5 * angle), s * v.x, s * v.y, s * v.z);
    }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    UnitQuaternion conjugate() const {
        return from_components(w_, -x_, -y_, -z_);
    }
    UnitQuaternion inverse() const { return conjugate(); }

    double dot(const UnitQuaternion& o) const {
        return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
    }

    /// Hamilton product. a * b is the rotation b applied first, then a,
    /// both about fixed world axes.
    friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
        return from_components(
            a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
            a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
            a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
            a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
    }

    Vec3 rotate(const Vec3& v) const {
        // v + 2 w (q_v x v) + 2 q_v x (q_v x v)
        const Vec3 qv{x_, y_, z_};
        const Vec3 t{2.0 * (qv.y * v.z - qv.z * v.y),
                     2.0 * (qv.z * v.x - qv.x * v.z),
                     2.0 * (qv.x * v.y - qv.y * v.x)};
        return {v.x + w_ * t.x + (qv.y * t.z - qv.z * t.y),
                v.y + w_ * t.y + (qv.z * t.x - qv.x * t.z),
                v.z + w_ * t.z + (qv.x * t.y - qv.y * t.x)};
    }

    /// Log map: rotation vector with angle in [0, pi].
    Vec3 to_rotation_vector() const {
        const double vn = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
        const double angle = 2.0 * std::atan2(vn, std::abs(w_));
        if (vn < 1e-12) {
            return {2.0 * x_, 2.0 * y_, 2.0 * z_};
        }
        const double s = (w_ >= 0.0 ? angle : -angle) / vn;
        return {s * x_, s * y_, s * z_};
    }

    std::array<std::array<double, 3>, 3> to_matrix() const {
        const double ww = w_, xx = x_, yy = y_, zz = z_;
        return {{{1.0 - 2.0 * (yy * yy + zz * zz), 2.0 * (xx * yy - zz * ww), 2.0 * (xx * zz + yy * ww)},
                 {2.0 * (xx * yy + zz * ww), 1.0 - 2.0 * (xx * xx + zz * zz), 2.0 * (yy * zz - xx * ww)},
                 {2.0 * (xx * zz - yy * ww), 2.0 * (yy * zz + xx * ww), 1.0 - 2.0 * (xx * xx + yy * yy)}}};
    }

    double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

    friend bool operator==(const UnitQuaternion& a, const UnitQuaternion& b) {
        return a.w_ == b.w_ && a.x_ == b.x_ && a.y_ == b.y_ && a.z_ == b.z_;
    }

  private:
    void canonicalize() {
        bool flip = false;
        if (w_ > 1e-12) {
            flip = false;
        } else if (w_ < -1e-12) {
            flip = true;
        } else if (x_ != 0.0) {
            flip = x_ < 0.0;
        } else if (y_ != 0.0) {
            flip = y_ < 0.0;
        } else {
            flip = z_ < 0.0;
        }
        if (flip) {
            w_ = -w_;
            x_ = -x_;
            y_ = -y_;
            z_ = -z_;
        }
        // -0.0 would break bitwise reproducibility of canonical forms
        if (w_ == 0.0) w_ = 0.0;
        if (x_ == 0.0) x_ = 0.0;
        if (y_ == 0.0) y_ = 0.0;
        if (z_ == 0.0) z_ = 0.0;
    }

    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

/// Angular distance theta = arccos(2 <q1,q2>^2 - 1), in [0, pi].
/// Invariant under sign flips of either argument (double cover).
///
/// Evaluated in the equivalent half-angle form 4*atan2(min(dm,dp), max(dm,dp))
/// with dm = |q1-q2| and dp = |q1+q2|: the direct arccos (argument clamped to
/// [-1, 1]) loses ~1e-8 of precision near 0 and pi, which would swamp the
/// 1e-9 round-trip contracts that are checked with this metric.
inline double quat_distance(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    const double dm = std::sqrt((q1.w() - q2.w()) * (q1.w() - q2.w()) +
                                (q1.x() - q2.x()) * (q1.x() - q2.x()) +
                                (q1.y() - q2.y()) * (q1.y() - q2.y()) +
                                (q1.z() - q2.z()) * (q1.z() - q2.z()));
    const double dp = std::sqrt((q1.w() + q2.w()) * (q1.w() + q2.w()) +
                                (q1.x() + q2.x()) * (q1.x() + q2.x()) +
                                (q1.y() + q2.y()) * (q1.y() + q2.y()) +
                                (q1.z() + q2.z()) * (q1.z() + q2.z()));
    const double theta = 4.0 * std::atan2(std::min(dm, dp), std::max(dm, dp));
    return theta > kPi ? kPi : theta;
}

/// Success predicate: strictly less than `tol` radians apart.
inline bool is_success(const UnitQuaternion& achieved, const UnitQuaternion& desired,
                       double tol = 0.1) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("success tolerance must be positive");
    }
    return quat_distance(achieved, desired) < tol;
}

}  // namespace davenport
