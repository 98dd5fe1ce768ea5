#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace splatc {

/// Adam with bias correction over a flat parameter vector. Each parameter
/// slot carries its own learning rate so parameter groups can differ.
class Adam {
public:
    struct Hyper {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
    };

    explicit Adam(std::size_t size) : Adam(size, Hyper{}) {}
    Adam(std::size_t size, Hyper hyper) : hyper_(hyper), m_(size, 0.0), v_(size, 0.0) {}

    /// One update of params[i] for every i with active(i); inactive slots keep
    /// their parameters and moments untouched.
    template <typename ActiveFn>
    void step(std::span<double> params, std::span<const double> grads, std::span<const double> lrs, ActiveFn&& active) {
        ++t_;
        const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!active(i)) {
                continue;
            }
            const double g = grads[i];
            m_[i] = hyper_.beta1 * m_[i] + (1.0 - hyper_.beta1) * g;
            v_[i] = hyper_.beta2 * v_[i] + (1.0 - hyper_.beta2) * g * g;
            const double m_hat = m_[i] / c1;
            const double v_hat = v_[i] / c2;
            params[i] -= lrs[i] * m_hat / (std::sqrt(v_hat) + hyper_.eps);
        }
    }

    std::size_t steps() const { return t_; }

private:
    Hyper hyper_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::size_t t_ = 0;
};

} // namespace splatc
