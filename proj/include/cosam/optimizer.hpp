#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cosam {

// Adam with bias correction. Objectives in this codebase are maximized, so
// the step direction is ascent.
class AdamOptimizer {
  public:
    AdamOptimizer() = default;
    AdamOptimizer(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

    void ascend(std::vector<double>& params, const std::vector<double>& grad) {
        if (params.size() != m_.size() || grad.size() != m_.size())
            throw std::invalid_argument("adam: parameter/gradient size mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t k = 0; k < m_.size(); ++k) {
            m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
            v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
            params[k] += lr_ * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + eps_);
        }
    }

    std::int64_t steps() const { return t_; }
    double learning_rate() const { return lr_; }

  private:
    double lr_ = 1e-3;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    std::int64_t t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace cosam
