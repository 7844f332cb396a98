#pragma once

// Episode replay buffer with hindsight goal relabeling ("future" strategy):
// a sampled transition keeps its original goal with probability 1/(k+1), and
// otherwise has the goal replaced by an orientation actually achieved at a
// strictly later time of the same episode, with the sparse reward recomputed
// for the substituted goal. Stored episodes are never mutated.

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "davenport/env.hpp"
#include "davenport/quaternion.hpp"
#include "davenport/rng.hpp"

namespace davenport::rl {

struct Transition {
    std::array<double, env::Observation::kSize> observation{};
    Vec3 action;
    double reward = -1.0;
    std::array<double, env::Observation::kSize> next_observation{};
    UnitQuaternion achieved_goal;
    UnitQuaternion next_achieved_goal;
    UnitQuaternion desired_goal;
    std::uint64_t episode_id = 0;
    int step_index = 0;
};

using Episode = std::vector<Transition>;

/// A sampled (possibly relabeled) transition plus relabeling metadata.
struct SampledTransition {
    Transition transition;
    bool relabeled = false;
    int future_time = -1;  // achieved-goal timestamp used for relabeling
};

class ReplayBuffer {
  public:
    /// `capacity` counts transitions; storage and eviction are whole episodes.
    ReplayBuffer(std::size_t capacity, int episode_length, double tolerance)
        : capacity_(capacity), episode_length_(episode_length), tolerance_(tolerance) {
        if (capacity < static_cast<std::size_t>(episode_length)) {
            throw std::invalid_argument("buffer capacity below one episode");
        }
        if (episode_length < 1) throw std::invalid_argument("episode_length must be >= 1");
        if (!(tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
    }

    std::size_t size() const { return episodes_.size() * episode_length_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t episode_count() const { return episodes_.size(); }

    bool has_episode(std::uint64_t id) const {
        for (const auto& e : episodes_) {
            if (e.id == id) return true;
        }
        return false;
    }

    /// Validates and stores a complete episode; evicts oldest-first when the
    /// transition capacity would be exceeded.
    void store_episode(const Episode& episode) {
        validate(episode);
        Stored s;
        s.id = episode.front().episode_id;
        s.observations.reserve(episode_length_ + 1);
        s.achieved.reserve(episode_length_ + 1);
        s.actions.reserve(episode_length_);
        for (const auto& t : episode) {
            s.observations.push_back(t.observation);
            s.achieved.push_back(t.achieved_goal);
            s.actions.push_back(t.action);
        }
        s.observations.push_back(episode.back().next_observation);
        s.achieved.push_back(episode.back().next_achieved_goal);
        s.desired = episode.front().desired_goal;
        episodes_.push_back(std::move(s));
        while (size() > capacity_) {
            episodes_.pop_front();
        }
    }

    /// Uniform transition sampling with "future" hindsight relabeling at
    /// probability her_k / (her_k + 1).
    std::vector<SampledTransition> sample_relabeled_batch(int batch_size, int her_k,
                                                          double tolerance, Rng& rng) const {
        if (episodes_.empty()) {
            throw std::runtime_error("cannot sample from an empty replay buffer");
        }
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (her_k < 0) throw std::invalid_argument("her_k must be >= 0");

        const double relabel_prob =
            her_k > 0 ? static_cast<double>(her_k) / (her_k + 1.0) : 0.0;
        std::vector<SampledTransition> batch;
        batch.reserve(batch_size);
        for (int b = 0; b < batch_size; ++b) {
            const auto& ep = episodes_[rng.integer(episodes_.size())];
            const int k = static_cast<int>(rng.integer(episode_length_));
            SampledTransition s;
            s.transition = materialize(ep, k);
            if (her_k > 0 && rng.uniform() < relabel_prob) {
                // Achieved orientation at a strictly later time j in (k, T].
                const int j = k + 1 + static_cast<int>(rng.integer(episode_length_ - k));
                s.relabeled = true;
                s.future_time = j;
                s.transition.desired_goal = ep.achieved[j];
                s.transition.reward = env::compute_reward(s.transition.next_achieved_goal,
                                                          s.transition.desired_goal, tolerance);
            }
            batch.push_back(std::move(s));
        }
        return batch;
    }

  private:
    struct Stored {
        std::uint64_t id = 0;
        std::vector<std::array<double, env::Observation::kSize>> observations;  // T + 1
        std::vector<UnitQuaternion> achieved;                                   // T + 1
        std::vector<Vec3> actions;                                              // T
        UnitQuaternion desired;
    };

    Transition materialize(const Stored& ep, int k) const {
        Transition t;
        t.observation = ep.observations[k];
        t.next_observation = ep.observations[k + 1];
        t.action = ep.actions[k];
        t.achieved_goal = ep.achieved[k];
        t.next_achieved_goal = ep.achieved[k + 1];
        t.desired_goal = ep.desired;
        t.reward = env::compute_reward(t.next_achieved_goal, t.desired_goal, tolerance_);
        t.episode_id = ep.id;
        t.step_index = k;
        return t;
    }

    void validate(const Episode& episode) const {
        if (static_cast<int>(episode.size()) != episode_length_) {
            throw std::invalid_argument("episode length mismatch: incomplete episode");
        }
        for (int k = 0; k < episode_length_; ++k) {
            const auto& t = episode[k];
            if (t.step_index != k) {
                throw std::invalid_argument("episode step indices must be contiguous from 0");
            }
            if (t.episode_id != episode.front().episode_id) {
                throw std::invalid_argument("episode transitions must share one episode_id");
            }
            if (t.reward != 0.0 && t.reward != -1.0) {
                throw std::invalid_argument("rewards must be 0 or -1");
            }
            if (t.reward !=
                env::compute_reward(t.next_achieved_goal, t.desired_goal, tolerance_)) {
                throw std::invalid_argument("stored reward inconsistent with goal metric");
            }
            if (k > 0 && episode[k - 1].next_observation != t.observation) {
                throw std::invalid_argument("observation chain broken between steps");
            }
        }
    }

    std::size_t capacity_;
    int episode_length_;
    double tolerance_;
    std::deque<Stored> episodes_;
};

}  // namespace davenport::rl
