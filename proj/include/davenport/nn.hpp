#pragma once

// Minimal dense networks with explicit reverse-mode gradients. No learning
// framework: determinism and finite-difference checkability matter more here
// than raw speed, and the models are small (a few hidden layers of 64-256
// units).
//
// Parameter layout is flat: for each layer, the weight matrix in row-major
// order (out x in) followed by the bias vector. Checkpoints and the polyak
// update operate directly on this layout.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "davenport/rng.hpp"

namespace davenport::rl {

enum class Activation { ReLU, Tanh, Linear };

inline double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
        default: return x;
    }
}

// Derivative from the post-activation value (enough for all three kinds).
inline double activation_grad(Activation a, double post) {
    switch (a) {
        case Activation::ReLU: return post > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - post * post;
        default: return 1.0;
    }
}

struct MlpSpec {
    std::vector<int> sizes;  // input, hidden..., output
    Activation hidden = Activation::ReLU;
    Activation output = Activation::Linear;

    int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

    int param_count() const {
        int n = 0;
        for (int l = 0; l < layer_count(); ++l) n += sizes[l + 1] * (sizes[l] + 1);
        return n;
    }

    bool operator==(const MlpSpec& o) const {
        return sizes == o.sizes && hidden == o.hidden && output == o.output;
    }
};

class Mlp {
  public:
    explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
        if (spec_.sizes.size() < 2) {
            throw std::invalid_argument("network needs at least input and output sizes");
        }
        for (int s : spec_.sizes) {
            if (s < 1) throw std::invalid_argument("layer sizes must be positive");
        }
        params_.assign(spec_.param_count(), 0.0);
    }

    /// Uniform init scaled by fan-in; biases zero.
    void init_random(Rng& rng) {
        std::size_t off = 0;
        for (int l = 0; l < spec_.layer_count(); ++l) {
            const int in = spec_.sizes[l], out = spec_.sizes[l + 1];
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            for (int i = 0; i < out * in; ++i) params_[off + i] = rng.uniform(-bound, bound);
            off += static_cast<std::size_t>(out) * in;
            for (int i = 0; i < out; ++i) params_[off + i] = 0.0;
            off += out;
        }
    }

    const MlpSpec& spec() const { return spec_; }
    int input_size() const { return spec_.sizes.front(); }
    int output_size() const { return spec_.sizes.back(); }
    const std::vector<double>& params() const { return params_; }
    std::vector<double>& params_mut() { return params_; }

    void set_params(std::span<const double> p) {
        if (p.size() != params_.size()) {
            throw std::invalid_argument("parameter size mismatch");
        }
        params_.assign(p.begin(), p.end());
    }

    /// Post-activation values per layer; index 0 is the input copy.
    struct Workspace {
        std::vector<std::vector<double>> act;
        std::vector<double> delta_a, delta_b;
    };

    void forward(std::span<const double> in, Workspace& ws) const {
        if (static_cast<int>(in.size()) != input_size()) {
            throw std::invalid_argument("input size mismatch");
        }
        ws.act.resize(spec_.sizes.size());
        ws.act[0].assign(in.begin(), in.end());
        std::size_t off = 0;
        for (int l = 0; l < spec_.layer_count(); ++l) {
            const int nin = spec_.sizes[l], nout = spec_.sizes[l + 1];
            const Activation a = (l == spec_.layer_count() - 1) ? spec_.output : spec_.hidden;
            auto& prev = ws.act[l];
            auto& cur = ws.act[l + 1];
            cur.resize(nout);
            const double* W = params_.data() + off;
            const double* b = W + static_cast<std::size_t>(nout) * nin;
            for (int o = 0; o < nout; ++o) {
                double s = b[o];
                const double* row = W + static_cast<std::size_t>(o) * nin;
                for (int i = 0; i < nin; ++i) s += row[i] * prev[i];
                cur[o] = apply_activation(a, s);
            }
            off += static_cast<std::size_t>(nout) * (nin + 1);
        }
    }

    std::vector<double> forward(std::span<const double> in) const {
        Workspace ws;
        forward(in, ws);
        return ws.act.back();
    }

    /// Accumulates dL/dparams into `grad` given dL/doutput; optionally
    /// writes dL/dinput. Requires the workspace of the matching forward.
    void backward(const Workspace& ws, std::span<const double> dout, std::span<double> grad,
                  std::span<double> din = {}) const {
        if (grad.size() != params_.size()) {
            throw std::invalid_argument("gradient buffer size mismatch");
        }
        auto& delta = const_cast<Workspace&>(ws).delta_a;
        auto& next_delta = const_cast<Workspace&>(ws).delta_b;
        delta.assign(dout.begin(), dout.end());

        // Offsets from the back.
        std::vector<std::size_t> offs(spec_.layer_count());
        std::size_t off = 0;
        for (int l = 0; l < spec_.layer_count(); ++l) {
            offs[l] = off;
            off += static_cast<std::size_t>(spec_.sizes[l + 1]) * (spec_.sizes[l] + 1);
        }

        for (int l = spec_.layer_count() - 1; l >= 0; --l) {
            const int nin = spec_.sizes[l], nout = spec_.sizes[l + 1];
            const Activation a = (l == spec_.layer_count() - 1) ? spec_.output : spec_.hidden;
            const auto& post = ws.act[l + 1];
            const auto& prev = ws.act[l];
            for (int o = 0; o < nout; ++o) delta[o] *= activation_grad(a, post[o]);

            const double* W = params_.data() + offs[l];
            double* gW = grad.data() + offs[l];
            double* gb = gW + static_cast<std::size_t>(nout) * nin;
            for (int o = 0; o < nout; ++o) {
                double* grow = gW + static_cast<std::size_t>(o) * nin;
                const double d = delta[o];
                for (int i = 0; i < nin; ++i) grow[i] += d * prev[i];
                gb[o] += d;
            }
            if (l > 0 || !din.empty()) {
                next_delta.assign(nin, 0.0);
                for (int o = 0; o < nout; ++o) {
                    const double* row = W + static_cast<std::size_t>(o) * nin;
                    const double d = delta[o];
                    for (int i = 0; i < nin; ++i) next_delta[i] += row[i] * d;
                }
                if (l == 0) {
                    for (int i = 0; i < nin; ++i) din[i] = next_delta[i];
                } else {
                    std::swap(delta, next_delta);
                }
            }
        }
    }

    /// Input gradients only (no parameter-gradient accumulation); used where
    /// a frozen network sits inside another network's loss.
    void backward_input_only(const Workspace& ws, std::span<const double> dout,
                             std::span<double> din) const {
        auto& delta = const_cast<Workspace&>(ws).delta_a;
        auto& next_delta = const_cast<Workspace&>(ws).delta_b;
        delta.assign(dout.begin(), dout.end());

        std::vector<std::size_t> offs(spec_.layer_count());
        std::size_t off = 0;
        for (int l = 0; l < spec_.layer_count(); ++l) {
            offs[l] = off;
            off += static_cast<std::size_t>(spec_.sizes[l + 1]) * (spec_.sizes[l] + 1);
        }
        for (int l = spec_.layer_count() - 1; l >= 0; --l) {
            const int nin = spec_.sizes[l], nout = spec_.sizes[l + 1];
            const Activation a = (l == spec_.layer_count() - 1) ? spec_.output : spec_.hidden;
            const auto& post = ws.act[l + 1];
            for (int o = 0; o < nout; ++o) delta[o] *= activation_grad(a, post[o]);
            next_delta.assign(nin, 0.0);
            const double* W = params_.data() + offs[l];
            for (int o = 0; o < nout; ++o) {
                const double* row = W + static_cast<std::size_t>(o) * nin;
                const double d = delta[o];
                for (int i = 0; i < nin; ++i) next_delta[i] += row[i] * d;
            }
            if (l == 0) {
                for (int i = 0; i < nin; ++i) din[i] = next_delta[i];
            } else {
                std::swap(delta, next_delta);
            }
        }
    }

  private:
    MlpSpec spec_;
    std::vector<double> params_;
};

class Adam {
  public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        if (params.size() != m_.size() || grad.size() != m_.size()) {
            throw std::invalid_argument("optimizer size mismatch");
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < m_.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
            params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
        }
    }

    double learning_rate() const { return lr_; }

  private:
    double lr_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long t_ = 0;
    std::vector<double> m_, v_;
};

/// target <- coef * target + (1 - coef) * main.
inline void polyak_update(std::span<double> target, std::span<const double> main, double coef) {
    if (target.size() != main.size()) {
        throw std::invalid_argument("polyak size mismatch");
    }
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i] = coef * target[i] + (1.0 - coef) * main[i];
    }
}

}  // namespace davenport::rl
