#pragma once

// Davenport chained rotations: decomposition of an arbitrary 3D rotation into
// three extrinsic rotations about a symmetric axis chain (z-x-z, z-y-z, ...),
// plus subgoal planning with the large-rotation splitting heuristic.
//
// Conventions used throughout:
//   * All chain rotations are extrinsic (fixed world axes). A triple
//     (alpha, beta, gamma) on chain (a1, a2, a3) composes as
//     R = R_a3(gamma) * R_a2(beta) * R_a1(alpha), i.e. alpha is applied first.
//   * The relative rotation carrying `initial` to `goal` is
//     goal * initial^-1 (a world-frame rotation).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "davenport/quaternion.hpp"

namespace davenport {

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    if (!std::isfinite(a)) {
        throw std::invalid_argument("angle must be finite");
    }
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

/// A symmetric Davenport axis chain: outer axes equal, middle axis distinct.
///
/// The six admissible chains are z-x-z, x-y-x, y-z-y, z-y-z, x-z-x and y-x-y.
/// Three-distinct-axis (Tait-Bryan) chains are rejected.
class Chain {
  public:
    Chain(Axis first, Axis middle, Axis last) : first_(first), middle_(middle), last_(last) {
        if (middle == first || middle == last) {
            throw std::invalid_argument("chain middle axis must differ from both outer axes");
        }
        if (first != last) {
            throw std::invalid_argument("only symmetric (proper-Euler) chains are supported");
        }
    }

    static Chain zxz() { return {Axis::Z, Axis::X, Axis::Z}; }
    static Chain zyz() { return {Axis::Z, Axis::Y, Axis::Z}; }
    static Chain xyx() { return {Axis::X, Axis::Y, Axis::X}; }
    static Chain xzx() { return {Axis::X, Axis::Z, Axis::X}; }
    static Chain yzy() { return {Axis::Y, Axis::Z, Axis::Y}; }
    static Chain yxy() { return {Axis::Y, Axis::X, Axis::Y}; }

    static const std::array<Chain, 6>& all() {
        static const std::array<Chain, 6> chains{zxz(), xyx(), yzy(), zyz(), xzx(), yxy()};
        return chains;
    }

    Axis first() const { return first_; }
    Axis middle() const { return middle_; }
    Axis last() const { return last_; }

    std::string name() const {
        std::string s;
        s += axis_name(first_);
        s += '-';
        s += axis_name(middle_);
        s += '-';
        s += axis_name(last_);
        return s;
    }

    /// Parses "z-x-z" or "zxz" (case-insensitive).
    static Chain parse(const std::string& text) {
        std::string letters;
        for (char c : text) {
            if (c != '-' && c != ' ') letters += c;
        }
        if (letters.size() != 3) {
            throw std::invalid_argument("chain must name three axes, e.g. z-x-z");
        }
        return {axis_from_name(letters[0]), axis_from_name(letters[1]), axis_from_name(letters[2])};
    }

    friend bool operator==(const Chain& a, const Chain& b) {
        return a.first_ == b.first_ && a.middle_ == b.middle_ && a.last_ == b.last_;
    }

  private:
    Axis first_;
    Axis middle_;
    Axis last_;
};

/// Three extrinsic rotation angles on a chain, each in [-pi, pi].
struct DavenportTriple {
    Chain chain;
    double alpha = 0.0;  // first rotation, about chain.first()
    double beta = 0.0;   // second rotation, about chain.middle()
    double gamma = 0.0;  // third rotation, about chain.last()
};

/// Composes a triple back into a rotation: R_a3(gamma) R_a2(beta) R_a1(alpha).
inline UnitQuaternion compose(const DavenportTriple& t) {
    return UnitQuaternion::from_axis_angle(t.chain.last(), t.gamma) *
           UnitQuaternion::from_axis_angle(t.chain.middle(), t.beta) *
           UnitQuaternion::from_axis_angle(t.chain.first(), t.alpha);
}

namespace detail {

// Levi-Civita sign of the permutation (i, j, k) of (0, 1, 2).
inline double permutation_sign(int i, int j, int k) {
    const bool cyclic = (i == 0 && j == 1 && k == 2) || (i == 1 && j == 2 && k == 0) ||
                        (i == 2 && j == 0 && k == 1);
    return cyclic ? 1.0 : -1.0;
}

}  // namespace detail

/// Decomposes `relative` into extrinsic chain angles.
///
/// Degenerate middle angles (beta within 1e-9 of 0 or pi) are canonicalized:
/// the free outer angle is folded into alpha and gamma is set to zero.
inline DavenportTriple decompose(const UnitQuaternion& relative, const Chain& chain) {
    const auto R = relative.to_matrix();
    const int i = static_cast<int>(chain.first());
    const int j = static_cast<int>(chain.middle());
    const int k = 3 - i - j;
    const double eps = detail::permutation_sign(i, j, k);

    // Column i carries sin(beta){sin,cos}(gamma); row i the alpha analogue.
    const double sin_beta = std::hypot(R[j][i], R[k][i]);
    DavenportTriple t{chain, 0.0, 0.0, 0.0};
    t.beta = std::atan2(sin_beta, R[i][i]);

    constexpr double degen = 1e-9;
    if (sin_beta > degen) {
        t.alpha = std::atan2(R[i][j], eps * R[i][k]);
        t.gamma = std::atan2(R[j][i], -eps * R[k][i]);
    } else if (R[i][i] > 0.0) {
        // beta ~ 0: pure rotation about the outer axis.
        t.beta = 0.0;
        t.alpha = std::atan2(eps * R[k][j], R[j][j]);
        t.gamma = 0.0;
    } else {
        // beta ~ pi: R = R_j(pi) R_i(alpha).
        t.beta = kPi;
        t.alpha = std::atan2(-eps * R[k][j], R[j][j]);
        t.gamma = 0.0;
    }
    // Negative zeros would leak into serialized output.
    if (t.alpha == 0.0) t.alpha = 0.0;
    if (t.beta == 0.0) t.beta = 0.0;
    if (t.gamma == 0.0) t.gamma = 0.0;
    return t;
}

/// Splitting heuristic for large single-axis rotations: a rotation with
/// magnitude greater than pi/2 becomes a +-pi/2 turn followed by the
/// remainder. Angles at or below pi/2 pass through unchanged.
inline std::vector<double> split_large(double angle) {
    if (!std::isfinite(angle) || std::abs(angle) > kPi) {
        throw std::invalid_argument("split_large expects a wrapped angle with |angle| <= pi");
    }
    const double half = 0.5 * kPi;
    if (std::abs(angle) <= half) {
        return {angle};
    }
    const double lead = angle > 0.0 ? half : -half;
    return {lead, angle - lead};
}

/// One executable subgoal rotation of a plan.
struct PlanStep {
    Axis axis;
    double angle = 0.0;
    UnitQuaternion subgoal;  // orientation after this step
    int parent_index = 0;    // which of the three chain rotations owns it
};

struct DavenportPlan {
    std::vector<PlanStep> steps;
};

/// Plans a chained-rotation route from `initial` to `goal`.
///
/// The relative rotation goal * initial^-1 is decomposed on `chain`; all
/// three chain rotations are emitted (zero angles included) so per-step
/// budget accounting stays uniform. With `split` enabled, angles larger
/// than pi/2 in magnitude become two steps sharing the same parent_index.
/// Subgoal k is the cumulative world-frame application of steps 1..k.
inline DavenportPlan plan(const UnitQuaternion& initial, const UnitQuaternion& goal,
                          const Chain& chain, bool split) {
    const UnitQuaternion relative = goal * initial.inverse();
    const DavenportTriple t = decompose(relative, chain);

    const std::array<Axis, 3> axes{chain.first(), chain.middle(), chain.last()};
    const std::array<double, 3> angles{t.alpha, t.beta, t.gamma};

    DavenportPlan p;
    UnitQuaternion current = initial;
    for (int parent = 0; parent < 3; ++parent) {
        const std::vector<double> parts =
            split ? split_large(angles[parent]) : std::vector<double>{angles[parent]};
        for (double part : parts) {
            current = UnitQuaternion::from_axis_angle(axes[parent], part) * current;
            p.steps.push_back({axes[parent], part, current, parent});
        }
    }
    return p;
}

/// Drops steps whose angle is below `tol`; for reporting only.
inline DavenportPlan filter_trivial_steps(const DavenportPlan& p, double tol) {
    DavenportPlan out;
    for (const auto& s : p.steps) {
        if (std::abs(s.angle) >= tol) out.steps.push_back(s);
    }
    return out;
}

/// Minimum number of chain rotations with |angle| >= tol needed to carry
/// `initial` to `goal`, minimized over the two evaluated chains
/// (z-x-z and z-y-z).
inline int count_required_rotations(const UnitQuaternion& initial, const UnitQuaternion& goal,
                                    double tol = 0.1) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("rotation-count tolerance must be positive");
    }
    const UnitQuaternion relative = goal * initial.inverse();
    int best = 3;
    for (const Chain& c : {Chain::zxz(), Chain::zyz()}) {
        const DavenportTriple t = decompose(relative, c);
        int n = 0;
        for (double a : {t.alpha, t.beta, t.gamma}) {
            if (std::abs(a) >= tol) ++n;
        }
        best = std::min(best, n);
    }
    return best;
}

}  // namespace davenport
