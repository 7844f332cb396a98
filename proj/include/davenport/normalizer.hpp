#pragma once

// Running per-coordinate input normalizer (Welford mean/variance).
// Statistics come only from raw collected rollouts; normalized values are
// clipped to a fixed range.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace davenport::rl {

class RunningNormalizer {
  public:
    explicit RunningNormalizer(int dim, double clip = 5.0)
        : dim_(dim), clip_(clip), mean_(dim, 0.0), m2_(dim, 0.0) {
        if (dim < 1) throw std::invalid_argument("normalizer dimension must be positive");
        if (!(clip > 0)) throw std::invalid_argument("normalizer clip must be positive");
    }

    int dim() const { return dim_; }
    double clip() const { return clip_; }
    double count() const { return count_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& m2() const { return m2_; }

    void update(std::span<const double> x) {
        check_size(x.size());
        count_ += 1.0;
        for (int i = 0; i < dim_; ++i) {
            const double delta = x[i] - mean_[i];
            mean_[i] += delta / count_;
            m2_[i] += delta * (x[i] - mean_[i]);
        }
    }

    double std_at(int i) const {
        const double var = count_ > 0.0 ? m2_[i] / count_ : 1.0;
        const double s = std::sqrt(var);
        return s > kStdFloor ? s : kStdFloor;
    }

    void normalize(std::span<const double> in, std::span<double> out) const {
        check_size(in.size());
        check_size(out.size());
        for (int i = 0; i < dim_; ++i) {
            const double mu = count_ > 0.0 ? mean_[i] : 0.0;
            double v = (in[i] - mu) / (count_ > 0.0 ? std_at(i) : 1.0);
            if (v > clip_) v = clip_;
            if (v < -clip_) v = -clip_;
            out[i] = v;
        }
    }

    /// Restores serialized state.
    void set_state(double count, std::vector<double> mean, std::vector<double> m2) {
        if (static_cast<int>(mean.size()) != dim_ || static_cast<int>(m2.size()) != dim_) {
            throw std::invalid_argument("normalizer state size mismatch");
        }
        count_ = count;
        mean_ = std::move(mean);
        m2_ = std::move(m2);
    }

  private:
    static constexpr double kStdFloor = 1e-2;

    void check_size(std::size_t n) const {
        if (static_cast<int>(n) != dim_) {
            throw std::invalid_argument("normalizer input size mismatch");
        }
    }

    int dim_;
    double clip_;
    double count_ = 0.0;
    std::vector<double> mean_, m2_;
};

}  // namespace davenport::rl
