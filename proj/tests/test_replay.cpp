#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "davenport/replay.hpp"

using namespace davenport;
using namespace davenport::rl;

namespace {

constexpr double kTol = 0.1;

// Synthetic episode: a z-spin trajectory with a goal far away, so original
// rewards are all -1 and achieved orientations are distinct per step.
Episode make_episode(std::uint64_t id, int length, Rng& rng) {
    Episode ep;
    UnitQuaternion pose = uniform_rotation(rng);
    const UnitQuaternion goal =
        UnitQuaternion::from_axis_angle(Axis::X, kPi) * pose;  // unreachable by the spin below
    for (int k = 0; k < length; ++k) {
        Transition t;
        t.episode_id = id;
        t.step_index = k;
        t.achieved_goal = pose;
        t.observation[0] = pose.w();
        t.observation[1] = pose.x();
        t.observation[2] = pose.y();
        t.observation[3] = pose.z();
        t.action = {0, 0, 0.3};
        const UnitQuaternion next = UnitQuaternion::from_axis_angle(Axis::Z, 0.01) * pose;
        t.next_achieved_goal = next;
        t.next_observation[0] = next.w();
        t.next_observation[1] = next.x();
        t.next_observation[2] = next.y();
        t.next_observation[3] = next.z();
        t.desired_goal = goal;
        t.reward = env::compute_reward(next, goal, kTol);
        ep.push_back(t);
        pose = next;
    }
    return ep;
}

}  // namespace

TEST_CASE("store and sample without relabeling") {
    Rng rng(1);
    ReplayBuffer buf(1000, 10, kTol);
    CHECK_THROWS_AS(buf.sample_relabeled_batch(4, 0, kTol, rng), std::runtime_error);

    const auto ep = make_episode(0, 10, rng);
    buf.store_episode(ep);
    CHECK(buf.size() == 10);

    Rng srng(2);
    const auto batch = buf.sample_relabeled_batch(64, 0, kTol, srng);
    for (const auto& s : batch) {
        CHECK_FALSE(s.relabeled);
        CHECK(s.transition.desired_goal == ep.front().desired_goal);
        CHECK(s.transition.episode_id == 0);
        // Sampled transition matches the stored one at its step index.
        const auto& orig = ep[s.transition.step_index];
        CHECK(s.transition.achieved_goal == orig.achieved_goal);
        CHECK(s.transition.action.z == orig.action.z);
        CHECK(s.transition.reward == orig.reward);
    }
}

TEST_CASE("episode validation") {
    Rng rng(3);
    ReplayBuffer buf(1000, 10, kTol);

    auto short_ep = make_episode(1, 10, rng);
    short_ep.pop_back();
    CHECK_THROWS_AS(buf.store_episode(short_ep), std::invalid_argument);

    auto bad_index = make_episode(2, 10, rng);
    bad_index[5].step_index = 7;
    CHECK_THROWS_AS(buf.store_episode(bad_index), std::invalid_argument);

    auto bad_chain = make_episode(3, 10, rng);
    bad_chain[4].next_observation[0] += 0.5;
    CHECK_THROWS_AS(buf.store_episode(bad_chain), std::invalid_argument);

    auto bad_reward = make_episode(4, 10, rng);
    bad_reward[2].reward = 0.0;  // inconsistent with the far-away goal
    CHECK_THROWS_AS(buf.store_episode(bad_reward), std::invalid_argument);
}

TEST_CASE("oldest-episode eviction") {
    Rng rng(4);
    ReplayBuffer buf(100, 10, kTol);  // room for exactly 10 episodes
    for (std::uint64_t id = 0; id < 10; ++id) {
        buf.store_episode(make_episode(id, 10, rng));
        CHECK(buf.size() == (id + 1) * 10);
    }
    CHECK(buf.has_episode(0));
    buf.store_episode(make_episode(10, 10, rng));
    CHECK(buf.size() == 100);
    CHECK_FALSE(buf.has_episode(0));
    CHECK(buf.has_episode(1));
    CHECK(buf.has_episode(10));
}

TEST_CASE("future-strategy relabeling") {
    Rng rng(5);
    const int length = 20;
    ReplayBuffer buf(10000, length, kTol);
    std::map<std::uint64_t, Episode> episodes;
    for (std::uint64_t id = 0; id < 50; ++id) {
        auto ep = make_episode(id, length, rng);
        buf.store_episode(ep);
        episodes[id] = std::move(ep);
    }

    Rng srng(6);
    int relabeled = 0;
    const int n = 20000;
    const auto batch = buf.sample_relabeled_batch(n, 4, kTol, srng);
    for (const auto& s : batch) {
        if (!s.relabeled) {
            CHECK(s.transition.desired_goal == episodes[s.transition.episode_id][0].desired_goal);
            continue;
        }
        ++relabeled;
        const auto& ep = episodes[s.transition.episode_id];
        const int k = s.transition.step_index;
        REQUIRE(s.future_time > k);
        REQUIRE(s.future_time <= length);
        // The relabeled goal is the achieved orientation at that later time.
        const UnitQuaternion expected = s.future_time < length
                                            ? ep[s.future_time].achieved_goal
                                            : ep.back().next_achieved_goal;
        CHECK(s.transition.desired_goal == expected);
        // Reward is recomputed against the substituted goal.
        CHECK(s.transition.reward == env::compute_reward(s.transition.next_achieved_goal,
                                                         s.transition.desired_goal, kTol));
        // Selecting the immediately achieved orientation succeeds by construction.
        if (s.future_time == k + 1) {
            CHECK(s.transition.reward == 0.0);
        }
    }
    // Binomial check on the k/(k+1) relabel fraction.
    const double p = 4.0 / 5.0;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(relabeled / static_cast<double>(n) - p) < 3 * se);
}

TEST_CASE("sampling does not mutate stored episodes") {
    Rng rng(7);
    ReplayBuffer buf(1000, 10, kTol);
    buf.store_episode(make_episode(0, 10, rng));
    Rng s1(8), s2(8);
    const auto a = buf.sample_relabeled_batch(32, 4, kTol, s1);
    const auto b = buf.sample_relabeled_batch(32, 4, kTol, s2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].transition.desired_goal == b[i].transition.desired_goal);
        CHECK(a[i].transition.reward == b[i].transition.reward);
        CHECK(a[i].relabeled == b[i].relabeled);
    }
}
