#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "micon/dataset.hpp"
#include "micon/model.hpp"
#include "micon/sampler.hpp"

namespace micon::model {

struct TrainLogEntry {
    uint64_t step = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;  // NaN when the step ran no validation round
};

struct TrainResult {
    ModelParams best;        // checkpoint with the lowest validation loss
    ModelParams last;        // parameters at the final step
    std::vector<TrainLogEntry> log;
    double best_val_loss = 0.0;
    uint64_t best_step = 0;
    uint64_t total_steps = 0;
};

// Full optimization loop: sample batch -> forward -> loss/grads -> global-norm
// clip -> AdamW -> plateau scheduler, with a validation round (and checkpoint
// snapshot) every hp.checkpoint_every steps and at the end.
TrainResult train_model(const data::Dataset& ds, const data::SplitSpec& split,
                        const HyperParams& hp, Method method);

// One loss evaluation over a freshly sampled batch.  with_grad accumulates
// parameter gradients (train mode only).  Exposed for tests.
double batch_loss(ModelParams& mp, const BatchSampler& sampler, Method method, math::Mode mode,
                  bool with_grad, math::SplitRng& rng);

// Serializes the log as tab-delimited text: step, lr, train_loss, val_loss.
std::string format_log(const std::vector<TrainLogEntry>& log);

}  // namespace micon::model
