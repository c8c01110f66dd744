#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "micon/mlp.hpp"

namespace micon::math {

// AdamW with decoupled weight decay: decay shrinks the parameter directly,
// independent of the adaptive moment update.
class AdamW {
public:
    AdamW(std::vector<ParamRef> params, double lr, double weight_decay, double beta1 = 0.9,
          double beta2 = 0.999, double eps = 1e-8);

    void step();
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }
    uint64_t step_count() const { return step_; }

    struct Slot {
        ParamRef ref;
        std::vector<double> m, v;
    };
    const std::vector<Slot>& slots() const { return slots_; }

private:
    std::vector<Slot> slots_;
    double lr_, weight_decay_, beta1_, beta2_, eps_;
    uint64_t step_ = 0;
};

// Linear warmup to base_lr, then multiplicative decay whenever the monitored
// validation metric has failed to improve for more than `patience` rounds.
class PlateauScheduler {
public:
    PlateauScheduler(double base_lr, uint64_t warmup_steps, double factor = 0.5, uint64_t patience = 3);

    // Call every optimizer step with the 1-based global step count; pass the
    // validation metric only on evaluation rounds.  Returns the lr to use.
    double step(uint64_t global_step, std::optional<double> val_metric = std::nullopt);

    double current_lr() const { return current_lr_; }

private:
    double base_lr_;
    uint64_t warmup_steps_;
    double factor_;
    uint64_t patience_;
    double post_warmup_lr_;
    double current_lr_;
    double best_metric_;
    bool has_best_ = false;
    uint64_t bad_count_ = 0;
};

// Scales all gradients in place by max_norm/norm when the global L2 norm
// exceeds max_norm.  Returns the pre-clip norm.
double clip_gradients(const std::vector<ParamRef>& params, double max_norm);

}  // namespace micon::math
