#pragma once

// Goal-conditioned deterministic-policy-gradient learner. The critic
// regresses toward r + gamma * Q'(s', g, mu'(s', g)) with targets clipped to
// [-1/(1-gamma), 0] (returns of a {-1, 0} reward lie in that interval); the
// actor ascends the critic; target networks track the mains by polyak
// averaging once per training cycle.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "davenport/env.hpp"
#include "davenport/nn.hpp"
#include "davenport/normalizer.hpp"
#include "davenport/replay.hpp"
#include "davenport/rng.hpp"
#include "davenport/text_io.hpp"

namespace davenport::rl {

struct TrainConfig {
    std::uint64_t total_timesteps = 200000;
    int cycle_episodes = 50;        // rollout episodes per cycle
    int updates_per_cycle = 40;     // gradient steps per cycle
    int batch_size = 256;
    double gamma = 0.98;
    double polyak = 0.95;           // target <- polyak*target + (1-polyak)*main
    double actor_lr = 1e-3;
    double critic_lr = 1e-3;
    int her_k = 4;                  // relabeled-to-original ratio
    double explore_sigma = 0.2;     // gaussian action noise
    double random_action_prob = 0.3;
    double action_l2 = 1.0;         // actor loss penalty on squared actions
    std::uint64_t seed = 1;
    std::vector<int> hidden_sizes{256, 256, 256};
    std::uint64_t buffer_capacity = 1000000;
    double normalizer_clip = 5.0;
    int eval_episodes = 100;

    void validate(int episode_length) const {
        if (total_timesteps <
            static_cast<std::uint64_t>(cycle_episodes) * static_cast<std::uint64_t>(episode_length)) {
            throw std::invalid_argument("total_timesteps below one cycle of episodes");
        }
        if (cycle_episodes < 1) throw std::invalid_argument("cycle_episodes must be >= 1");
        if (updates_per_cycle < 0) throw std::invalid_argument("updates_per_cycle must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (!(gamma > 0.0) || gamma >= 1.0) throw std::invalid_argument("gamma must be in (0, 1)");
        if (polyak < 0.0 || polyak > 1.0) throw std::invalid_argument("polyak must be in [0, 1]");
        if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
            throw std::invalid_argument("learning rates must be positive");
        }
        if (her_k < 0) throw std::invalid_argument("her_k must be >= 0");
        if (explore_sigma < 0.0) throw std::invalid_argument("explore_sigma must be >= 0");
        if (random_action_prob < 0.0 || random_action_prob > 1.0) {
            throw std::invalid_argument("random_action_prob must be in [0, 1]");
        }
        if (action_l2 < 0.0) throw std::invalid_argument("action_l2 must be >= 0");
        if (hidden_sizes.empty()) throw std::invalid_argument("need at least one hidden layer");
        if (buffer_capacity < static_cast<std::uint64_t>(episode_length)) {
            throw std::invalid_argument("buffer capacity below one episode");
        }
        if (!(normalizer_clip > 0)) throw std::invalid_argument("normalizer_clip must be positive");
        if (eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
    }
};

inline void save_train_config(std::ostream& out, const TrainConfig& c) {
    out << "total_timesteps = " << c.total_timesteps << "\n"
        << "cycle_episodes = " << c.cycle_episodes << "\n"
        << "updates_per_cycle = " << c.updates_per_cycle << "\n"
        << "batch_size = " << c.batch_size << "\n"
        << "gamma = " << io::fmt(c.gamma) << "\n"
        << "polyak = " << io::fmt(c.polyak) << "\n"
        << "actor_lr = " << io::fmt(c.actor_lr) << "\n"
        << "critic_lr = " << io::fmt(c.critic_lr) << "\n"
        << "her_k = " << c.her_k << "\n"
        << "explore_sigma = " << io::fmt(c.explore_sigma) << "\n"
        << "random_action_prob = " << io::fmt(c.random_action_prob) << "\n"
        << "action_l2 = " << io::fmt(c.action_l2) << "\n"
        << "seed = " << c.seed << "\n";
    out << "hidden_sizes = ";
    for (std::size_t i = 0; i < c.hidden_sizes.size(); ++i) {
        out << (i ? "," : "") << c.hidden_sizes[i];
    }
    out << "\n"
        << "buffer_capacity = " << c.buffer_capacity << "\n"
        << "normalizer_clip = " << io::fmt(c.normalizer_clip) << "\n"
        << "eval_episodes = " << c.eval_episodes << "\n";
}

inline TrainConfig load_train_config(std::istream& in) {
    TrainConfig c;
    for (const auto& [key, value] : io::parse_key_values(in)) {
        if (key == "total_timesteps") c.total_timesteps = std::stoull(value);
        else if (key == "cycle_episodes") c.cycle_episodes = std::stoi(value);
        else if (key == "updates_per_cycle") c.updates_per_cycle = std::stoi(value);
        else if (key == "batch_size") c.batch_size = std::stoi(value);
        else if (key == "gamma") c.gamma = io::parse_double(value);
        else if (key == "polyak") c.polyak = io::parse_double(value);
        else if (key == "actor_lr") c.actor_lr = io::parse_double(value);
        else if (key == "critic_lr") c.critic_lr = io::parse_double(value);
        else if (key == "her_k") c.her_k = std::stoi(value);
        else if (key == "explore_sigma") c.explore_sigma = io::parse_double(value);
        else if (key == "random_action_prob") c.random_action_prob = io::parse_double(value);
        else if (key == "action_l2") c.action_l2 = io::parse_double(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "hidden_sizes") {
            c.hidden_sizes.clear();
            for (const auto& part : io::split(value, ',')) {
                c.hidden_sizes.push_back(std::stoi(io::trim(part)));
            }
        } else if (key == "buffer_capacity") c.buffer_capacity = std::stoull(value);
        else if (key == "normalizer_clip") c.normalizer_clip = io::parse_double(value);
        else if (key == "eval_episodes") c.eval_episodes = std::stoi(value);
        else throw std::invalid_argument("unknown training config key: " + key);
    }
    return c;
}

/// Actor/critic parameter bundle, target copies, input normalizer.
///
/// Orientation quaternions (the observation's pose and the goal) enter the
/// networks through their ten quadratic monomials (ww, wx, ..., zz) rather
/// than raw components: the monomials are invariant under the q -> -q double
/// cover, so the canonical-sign seam at half-turn rotations disappears from
/// the input space, and they determine the rotation matrix exactly.
struct PolicyParams {
    static constexpr int kObsSize = env::Observation::kSize;  // 10
    static constexpr int kGoalSize = 4;
    static constexpr int kActionSize = 3;
    static constexpr int kQuatFeatures = 10;
    // features(pose) + angular velocity + previous action + features(goal)
    static constexpr int kInputSize = kQuatFeatures + 3 + 3 + kQuatFeatures;

    static void quat_features(double w, double x, double y, double z, double* out) {
        out[0] = w * w;
        out[1] = w * x;
        out[2] = w * y;
        out[3] = w * z;
        out[4] = x * x;
        out[5] = x * y;
        out[6] = x * z;
        out[7] = y * y;
        out[8] = y * z;
        out[9] = z * z;
    }

    Mlp actor;
    Mlp critic;
    Mlp actor_target;
    Mlp critic_target;
    RunningNormalizer normalizer;

    static PolicyParams make(const std::vector<int>& hidden, double normalizer_clip, Rng& rng,
                             Activation hidden_act = Activation::ReLU) {
        std::vector<int> actor_sizes{kInputSize};
        actor_sizes.insert(actor_sizes.end(), hidden.begin(), hidden.end());
        actor_sizes.push_back(kActionSize);
        std::vector<int> critic_sizes{kInputSize + kActionSize};
        critic_sizes.insert(critic_sizes.end(), hidden.begin(), hidden.end());
        critic_sizes.push_back(1);

        PolicyParams p{Mlp({actor_sizes, hidden_act, Activation::Tanh}),
                       Mlp({critic_sizes, hidden_act, Activation::Linear}),
                       Mlp({actor_sizes, hidden_act, Activation::Tanh}),
                       Mlp({critic_sizes, hidden_act, Activation::Linear}),
                       RunningNormalizer(kInputSize, normalizer_clip)};
        p.actor.init_random(rng);
        p.critic.init_random(rng);
        p.actor_target.set_params(p.actor.params());
        p.critic_target.set_params(p.critic.params());
        return p;
    }

    /// Raw featurized (observation, goal) vector, before normalization.
    static void build_raw_input(const std::array<double, kObsSize>& obs,
                                const UnitQuaternion& goal, std::span<double> raw) {
        quat_features(obs[0], obs[1], obs[2], obs[3], raw.data());
        for (int i = 4; i < kObsSize; ++i) raw[kQuatFeatures + i - 4] = obs[i];
        quat_features(goal.w(), goal.x(), goal.y(), goal.z(),
                      raw.data() + kQuatFeatures + 6);
    }

    /// Normalized, clipped (observation, goal) network input.
    void build_input(const std::array<double, kObsSize>& obs, const UnitQuaternion& goal,
                     std::span<double> out) const {
        std::array<double, kInputSize> raw;
        build_raw_input(obs, goal, raw);
        normalizer.normalize(raw, out);
    }
};

struct Exploration {
    double sigma = 0.2;
    double random_prob = 0.3;
};

/// Deterministic actor output, componentwise in [-1, 1].
inline Vec3 act(const PolicyParams& p, const env::Observation& obs, const UnitQuaternion& goal) {
    std::array<double, PolicyParams::kInputSize> in;
    p.build_input(obs.flatten(), goal, in);
    const auto out = p.actor.forward(in);
    return {out[0], out[1], out[2]};
}

/// Behavioral action: gaussian noise on the actor output (clipped), replaced
/// by a uniform random action with probability `random_prob`.
inline Vec3 act(const PolicyParams& p, const env::Observation& obs, const UnitQuaternion& goal,
                const Exploration& ex, Rng& rng) {
    if (ex.random_prob > 0.0 && rng.uniform() < ex.random_prob) {
        return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    const Vec3 a = act(p, obs, goal);
    const Vec3 noisy = a + ex.sigma * rng.gaussian3();
    return noisy.clipped(-1.0, 1.0);
}

struct CycleDiagnostics {
    double mean_critic_loss = 0.0;
    double mean_abs_q = 0.0;
    int updates_applied = 0;
    bool skipped_insufficient_data = false;
};

struct GradScratch {
    Mlp::Workspace ws_a, ws_c;
    std::vector<double> din;
};

/// Critic regression loss mean((Q(s,g,a) - y)^2) with bootstrap targets
/// y = clip(r + gamma * Q'(s',g,mu'(s',g)), [-1/(1-gamma), 0]); accumulates
/// dloss/dcritic into `grad`. Targets are constants w.r.t. the main critic.
inline double critic_loss_and_grad(const PolicyParams& p,
                                   std::span<const SampledTransition> batch, double gamma,
                                   std::span<double> grad, GradScratch& scratch) {
    const double q_min = -1.0 / (1.0 - gamma);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::array<double, PolicyParams::kInputSize> nin;
    std::array<double, PolicyParams::kInputSize + PolicyParams::kActionSize> cin;
    for (const auto& s : batch) {
        const auto& t = s.transition;
        p.build_input(t.next_observation, t.desired_goal, nin);
        p.actor_target.forward(nin, scratch.ws_a);
        const auto& a_next = scratch.ws_a.act.back();
        std::copy(nin.begin(), nin.end(), cin.begin());
        for (int i = 0; i < PolicyParams::kActionSize; ++i) {
            cin[PolicyParams::kInputSize + i] = a_next[i];
        }
        p.critic_target.forward(cin, scratch.ws_c);
        double y = t.reward + gamma * scratch.ws_c.act.back()[0];
        if (y < q_min) y = q_min;
        if (y > 0.0) y = 0.0;

        p.build_input(t.observation, t.desired_goal, nin);
        std::copy(nin.begin(), nin.end(), cin.begin());
        cin[PolicyParams::kInputSize + 0] = t.action.x;
        cin[PolicyParams::kInputSize + 1] = t.action.y;
        cin[PolicyParams::kInputSize + 2] = t.action.z;
        p.critic.forward(cin, scratch.ws_c);
        const double err = scratch.ws_c.act.back()[0] - y;
        loss += err * err * inv_n;
        const double dout = 2.0 * err * inv_n;
        p.critic.backward(scratch.ws_c, std::span<const double>(&dout, 1), grad);
    }
    return loss;
}

/// Actor loss -mean(Q(s, g, mu(s, g))) + action_l2 * mean(mu^2) through the
/// frozen critic; accumulates dloss/dactor into `grad`.
inline double actor_loss_and_grad(const PolicyParams& p,
                                  std::span<const SampledTransition> batch,
                                  std::span<double> grad, GradScratch& scratch,
                                  double action_l2 = 0.0, double* mean_abs_q = nullptr) {
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0, abs_q = 0.0;
    std::array<double, PolicyParams::kInputSize> nin;
    std::array<double, PolicyParams::kInputSize + PolicyParams::kActionSize> cin;
    scratch.din.resize(PolicyParams::kInputSize + PolicyParams::kActionSize);
    for (const auto& s : batch) {
        const auto& t = s.transition;
        p.build_input(t.observation, t.desired_goal, nin);
        p.actor.forward(nin, scratch.ws_a);
        const auto& a = scratch.ws_a.act.back();
        std::copy(nin.begin(), nin.end(), cin.begin());
        for (int i = 0; i < PolicyParams::kActionSize; ++i) {
            cin[PolicyParams::kInputSize + i] = a[i];
        }
        p.critic.forward(cin, scratch.ws_c);
        const double q = scratch.ws_c.act.back()[0];
        loss -= q * inv_n;
        abs_q += std::abs(q) * inv_n;
        const double dq = -inv_n;
        p.critic.backward_input_only(scratch.ws_c, std::span<const double>(&dq, 1), scratch.din);
        const double l2_scale = 2.0 * action_l2 * inv_n / PolicyParams::kActionSize;
        std::array<double, PolicyParams::kActionSize> da;
        for (int i = 0; i < PolicyParams::kActionSize; ++i) {
            const double ai = a[i];
            loss += action_l2 * inv_n * ai * ai / PolicyParams::kActionSize;
            da[i] = scratch.din[PolicyParams::kInputSize + i] + l2_scale * ai;
        }
        p.actor.backward(scratch.ws_a, da, grad);
    }
    if (mean_abs_q) *mean_abs_q = abs_q;
    return loss;
}

/// Owns the policy bundle and optimizer state across training cycles.
class Trainer {
  public:
    Trainer(TrainConfig cfg, int episode_length, double tolerance)
        : cfg_(std::move(cfg)),
          tolerance_(tolerance),
          init_rng_(derive_seed(cfg_.seed, 0)),
          params_(PolicyParams::make(cfg_.hidden_sizes, cfg_.normalizer_clip, init_rng_)),
          actor_opt_(params_.actor.params().size(), cfg_.actor_lr),
          critic_opt_(params_.critic.params().size(), cfg_.critic_lr) {
        cfg_.validate(episode_length);
    }

    const TrainConfig& config() const { return cfg_; }
    PolicyParams& params() { return params_; }
    const PolicyParams& params() const { return params_; }

    /// Runs `updates_per_cycle` gradient steps on relabeled batches (targets
    /// tracked per step). No-op (flagged) while the buffer holds fewer than
    /// batch_size transitions.
    CycleDiagnostics train_cycle(const ReplayBuffer& buffer, Rng& rng) {
        return run_updates(buffer, rng, cfg_.updates_per_cycle);
    }

    /// A partial cycle: `updates` gradient steps. The training loop spreads
    /// a cycle's update budget across its rollouts so value estimates track
    /// fresh experience instead of moving in one burst.
    CycleDiagnostics run_updates(const ReplayBuffer& buffer, Rng& rng, int updates) {
        CycleDiagnostics diag;
        if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size)) {
            diag.skipped_insufficient_data = true;
            return diag;
        }
        actor_grad_.assign(params_.actor.params().size(), 0.0);
        critic_grad_.assign(params_.critic.params().size(), 0.0);

        double loss_sum = 0.0, abs_q_sum = 0.0;
        for (int u = 0; u < updates; ++u) {
            const auto batch =
                buffer.sample_relabeled_batch(cfg_.batch_size, cfg_.her_k, tolerance_, rng);

            std::fill(critic_grad_.begin(), critic_grad_.end(), 0.0);
            loss_sum += critic_loss_and_grad(params_, batch, cfg_.gamma, critic_grad_, scratch_);
            critic_opt_.step(params_.critic.params_mut(), critic_grad_);

            std::fill(actor_grad_.begin(), actor_grad_.end(), 0.0);
            double abs_q = 0.0;
            actor_loss_and_grad(params_, batch, actor_grad_, scratch_, cfg_.action_l2, &abs_q);
            actor_opt_.step(params_.actor.params_mut(), actor_grad_);
            abs_q_sum += abs_q;
            ++diag.updates_applied;

            polyak_update(params_.actor_target.params_mut(), params_.actor.params(),
                          cfg_.polyak);
            polyak_update(params_.critic_target.params_mut(), params_.critic.params(),
                          cfg_.polyak);
        }

        diag.mean_critic_loss = diag.updates_applied ? loss_sum / diag.updates_applied : 0.0;
        diag.mean_abs_q = diag.updates_applied ? abs_q_sum / diag.updates_applied : 0.0;
        return diag;
    }

  private:
    TrainConfig cfg_;
    double tolerance_;
    Rng init_rng_;
    PolicyParams params_;
    Adam actor_opt_;
    Adam critic_opt_;
    std::vector<double> actor_grad_, critic_grad_;
    GradScratch scratch_;
};

}  // namespace davenport::rl
