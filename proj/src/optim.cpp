#include "micon/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "micon/errors.hpp"

namespace micon::math {

AdamW::AdamW(std::vector<ParamRef> params, double lr, double weight_decay, double beta1, double beta2,
             double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr < 0.0) throw std::invalid_argument("AdamW: lr must be >= 0");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("AdamW: betas must be in [0, 1)");
    slots_.reserve(params.size());
    for (auto& p : params) {
        Slot s;
        s.ref = p;
        s.m.assign(p.value->size(), 0.0);
        s.v.assign(p.value->size(), 0.0);
        slots_.push_back(std::move(s));
    }
}

void AdamW::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (auto& s : slots_) {
        auto& p = *s.ref.value;
        const auto& g = *s.ref.grad;
        for (size_t i = 0; i < p.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw TrainError("AdamW: non-finite gradient in " + s.ref.name);
            // decoupled decay, independent of the moment update
            if (weight_decay_ != 0.0) p[i] -= lr_ * weight_decay_ * p[i];
            s.m[i] = beta1_ * s.m[i] + (1.0 - beta1_) * g[i];
            s.v[i] = beta2_ * s.v[i] + (1.0 - beta2_) * g[i] * g[i];
            const double mhat = s.m[i] / bc1;
            const double vhat = s.v[i] / bc2;
            p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

PlateauScheduler::PlateauScheduler(double base_lr, uint64_t warmup_steps, double factor, uint64_t patience)
    : base_lr_(base_lr),
      warmup_steps_(warmup_steps),
      factor_(factor),
      patience_(patience),
      post_warmup_lr_(base_lr),
      current_lr_(warmup_steps > 0 ? 0.0 : base_lr),
      best_metric_(0.0) {
    if (base_lr < 0.0) throw std::invalid_argument("PlateauScheduler: base_lr must be >= 0");
    if (factor <= 0.0 || factor >= 1.0) throw std::invalid_argument("PlateauScheduler: factor must be in (0,1)");
}

double PlateauScheduler::step(uint64_t global_step, std::optional<double> val_metric) {
    if (val_metric) {
        if (!has_best_ || *val_metric < best_metric_) {
            best_metric_ = *val_metric;
            has_best_ = true;
            bad_count_ = 0;
        } else {
            ++bad_count_;
            if (bad_count_ > patience_) {
                post_warmup_lr_ *= factor_;
                bad_count_ = 0;
            }
        }
    }
    if (global_step < warmup_steps_) {
        current_lr_ = base_lr_ * static_cast<double>(global_step) / static_cast<double>(warmup_steps_);
    } else {
        current_lr_ = post_warmup_lr_;
    }
    return current_lr_;
}

double clip_gradients(const std::vector<ParamRef>& params, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("clip_gradients: max_norm must be > 0");
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : *p.grad) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (const auto& p : params)
            for (double& g : *p.grad) g *= scale;
    }
    return norm;
}

}  // namespace micon::math
