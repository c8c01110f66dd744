#include "micon/train.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "micon/errors.hpp"
#include "micon/losses.hpp"
#include "micon/optim.hpp"

namespace micon::model {

namespace {

constexpr uint32_t kValBatches = 4;
constexpr double kJitterScale = 0.05;
constexpr double kDropoutP = 0.1;

double micon_family_loss(ModelParams& mp, const BatchSampler& sampler, double cf_weight,
                         math::Mode mode, bool with_grad, math::SplitRng& rng) {
    const auto& ds = sampler.dataset();
    const HyperParams& hp = mp.hp;
    const uint32_t T = hp.pairs_per_batch();
    const uint32_t C = hp.controls_per_batch();
    const TrainingBatch b = sampler.sample(T, C, rng);

    std::vector<FovRef> refs;
    refs.reserve(2 * T + C);
    refs.insert(refs.end(), b.t1.begin(), b.t1.end());
    refs.insert(refs.end(), b.t2.begin(), b.t2.end());
    refs.insert(refs.end(), b.ctrl.begin(), b.ctrl.end());
    std::vector<std::string> labels;
    labels.reserve(refs.size());
    for (const auto& r : refs) labels.push_back(ds.wells[r.well].perturbation_id);

    const math::Matrix x = gather_fovs(ds, refs);
    math::Matrix reps = mp.encode_and_project(x, mode);
    math::Matrix dreps(reps.rows, reps.cols);

    double loss;
    if (cf_weight == 0.0) {
        loss = paclr_loss(reps, labels, hp.tau, with_grad ? &dreps : nullptr);
    } else {
        std::vector<std::string> cf_labels;
        cf_labels.reserve(T);
        for (const auto& r : b.t1) cf_labels.push_back(ds.wells[r.well].perturbation_id);
        const math::Matrix fps = fingerprint_rows(ds, cf_labels);
        math::Matrix emb = mp.encode_compound(fps, mode);

        math::Matrix ctx(T, reps.cols);
        for (uint32_t j = 0; j < T; ++j) {
            const size_t src = 2 * static_cast<size_t>(T) + b.cf_context[j];
            for (size_t c = 0; c < reps.cols; ++c) ctx(j, c) = reps(src, c);
        }
        math::Matrix cf = mp.fuse_counterfactual(ctx, emb, mode);

        math::Matrix dcf(T, reps.cols);
        loss = micon_total_loss(reps, labels, cf, cf_labels, hp.tau, cf_weight,
                                with_grad ? &dreps : nullptr, with_grad ? &dcf : nullptr);

        if (with_grad) {
            const math::Matrix dcat = mp.fusion.backward(dcf);
            math::Matrix demb(T, emb.cols);
            for (uint32_t j = 0; j < T; ++j) {
                const size_t dst = 2 * static_cast<size_t>(T) + b.cf_context[j];
                for (size_t c = 0; c < reps.cols; ++c) dreps(dst, c) += dcat(j, c);
                for (size_t c = 0; c < emb.cols; ++c) demb(j, c) = dcat(j, reps.cols + c);
            }
            mp.compound_encoder.backward(demb);
        }
    }

    if (with_grad) {
        const math::Matrix dproj_in = mp.projection.backward(dreps);
        mp.image_encoder.backward(dproj_in);
    }
    return loss;
}

double simclr_step_loss(ModelParams& mp, const BatchSampler& sampler, math::Mode mode,
                        bool with_grad, math::SplitRng& rng) {
    const auto& ds = sampler.dataset();
    const uint32_t n_inst = std::max<uint32_t>(1, mp.hp.batch_size / 2);
    const auto refs = sampler.sample_instances(n_inst, rng);
    const math::Matrix base = gather_fovs(ds, refs);
    const auto& sd = sampler.feature_sd();

    math::Matrix views(2 * static_cast<size_t>(n_inst), base.cols);
    for (uint32_t i = 0; i < n_inst; ++i) {
        for (int v = 0; v < 2; ++v) {
            const size_t row = 2 * static_cast<size_t>(i) + static_cast<size_t>(v);
            for (size_t j = 0; j < base.cols; ++j)
                views(row, j) = base(i, j) + kJitterScale * sd[j] * rng.gaussian();
            for (size_t j = 0; j < base.cols; ++j)
                if (rng.uniform() < kDropoutP) views(row, j) = 0.0;
        }
    }

    math::Matrix reps = mp.encode_and_project(views, mode);
    math::Matrix dreps(reps.rows, reps.cols);
    const double loss = simclr_loss(reps, mp.hp.tau, with_grad ? &dreps : nullptr);
    if (with_grad) {
        const math::Matrix dproj_in = mp.projection.backward(dreps);
        mp.image_encoder.backward(dproj_in);
    }
    return loss;
}

double clip_step_loss(ModelParams& mp, const BatchSampler& sampler, math::Mode mode,
                      bool with_grad, math::SplitRng& rng) {
    const auto& ds = sampler.dataset();
    const auto refs = sampler.sample_perturbed(mp.hp.batch_size, rng);
    const math::Matrix x = gather_fovs(ds, refs);
    std::vector<std::string> ids;
    ids.reserve(refs.size());
    for (const auto& r : refs) ids.push_back(ds.wells[r.well].perturbation_id);

    math::Matrix img = mp.encode_and_project(x, mode);
    const math::Matrix fps = fingerprint_rows(ds, ids);
    math::Matrix emb = mp.encode_compound(fps, mode);
    math::Matrix cmp = mp.clip_head.forward(emb, mode);

    math::Matrix dimg(img.rows, img.cols), dcmp(cmp.rows, cmp.cols);
    const double loss =
        clip_loss(img, cmp, mp.hp.tau, with_grad ? &dimg : nullptr, with_grad ? &dcmp : nullptr);
    if (with_grad) {
        const math::Matrix demb = mp.clip_head.backward(dcmp);
        mp.compound_encoder.backward(demb);
        const math::Matrix dproj_in = mp.projection.backward(dimg);
        mp.image_encoder.backward(dproj_in);
    }
    return loss;
}

double validation_loss(ModelParams& mp, const BatchSampler& val_sampler, Method method,
                       math::SplitRng val_rng) {
    double total = 0.0;
    for (uint32_t i = 0; i < kValBatches; ++i) {
        auto rng = val_rng.split(i);
        total += batch_loss(mp, val_sampler, method, math::Mode::infer, false, rng);
    }
    return total / kValBatches;
}

}  // namespace

double batch_loss(ModelParams& mp, const BatchSampler& sampler, Method method, math::Mode mode,
                  bool with_grad, math::SplitRng& rng) {
    switch (method) {
        case Method::micon:
            return micon_family_loss(mp, sampler, mp.hp.cf_weight, mode, with_grad, rng);
        case Method::paclr_only:
            return micon_family_loss(mp, sampler, 0.0, mode, with_grad, rng);
        case Method::simclr:
            return simclr_step_loss(mp, sampler, mode, with_grad, rng);
        case Method::clip:
            return clip_step_loss(mp, sampler, mode, with_grad, rng);
    }
    throw ConfigError("unknown training method");
}

TrainResult train_model(const data::Dataset& ds, const data::SplitSpec& split,
                        const HyperParams& hp_in, Method method) {
    HyperParams hp = hp_in;
    // the counterfactual term never runs for the ablation, so pin its weight:
    // keeps paclr_only checkpoints byte-identical to micon with cf_weight 0
    if (method == Method::paclr_only) hp.cf_weight = 0.0;
    hp.validate();
    if (split.train.empty()) throw ConfigError("train: empty training split");
    if (split.val.empty()) throw ConfigError("train: empty validation split");

    ModelParams mp = ModelParams::build(ds.feature_dim, hp);
    auto params = mp.params_for(method);
    math::AdamW opt(params, hp.lr, hp.weight_decay);
    math::PlateauScheduler sched(hp.lr, hp.warmup_steps);

    const BatchSampler train_sampler(ds, split.train);
    const BatchSampler val_sampler(ds, split.val);

    const uint64_t steps_per_epoch =
        std::max<uint64_t>(1, train_sampler.n_fovs() / std::max<uint32_t>(1, hp.batch_size));
    const uint64_t total_steps = steps_per_epoch * hp.epochs;

    const math::SplitRng root(hp.seed);
    auto sample_rng = root.split("sample");
    const auto val_root = root.split("val");

    TrainResult result;
    result.total_steps = total_steps;

    // baseline validation loss before any update (not a checkpoint candidate)
    uint64_t val_round = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    {
        const double v0 = validation_loss(mp, val_sampler, method, val_root.split(val_round++));
        result.log.push_back({0, 0.0, nan, v0});
    }

    bool has_best = false;
    for (uint64_t step = 1; step <= total_steps; ++step) {
        mp.zero_grad();
        const double train_loss =
            batch_loss(mp, train_sampler, method, math::Mode::train, true, sample_rng);
        if (!std::isfinite(train_loss))
            throw TrainError("non-finite training loss at step " + std::to_string(step));
        math::clip_gradients(params, hp.clip_norm);
        const double lr = sched.step(step);
        opt.set_lr(lr);
        opt.step();

        double val = nan;
        if ((hp.checkpoint_every > 0 && step % hp.checkpoint_every == 0) || step == total_steps) {
            val = validation_loss(mp, val_sampler, method, val_root.split(val_round++));
            if (!std::isfinite(val))
                throw TrainError("non-finite validation loss at step " + std::to_string(step));
            sched.step(step, val);  // plateau bookkeeping; lr takes effect next step
            if (!has_best || val < result.best_val_loss) {
                has_best = true;
                result.best = mp;
                result.best_val_loss = val;
                result.best_step = step;
            }
        }
        result.log.push_back({step, lr, train_loss, val});
    }
    result.last = mp;
    if (!has_best) {  // total_steps == 0 cannot happen; guard for safety
        result.best = mp;
        result.best_val_loss = result.log.front().val_loss;
        result.best_step = 0;
    }
    return result;
}

std::string format_log(const std::vector<TrainLogEntry>& log) {
    std::string out = "step\tlr\ttrain_loss\tval_loss\n";
    char buf[96];
    auto put = [&out, &buf](double v) {
        if (std::isnan(v)) {
            out += "-";
        } else {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
        }
    };
    for (const auto& e : log) {
        out += std::to_string(e.step);
        out += '\t';
        put(e.lr);
        out += '\t';
        put(e.train_loss);
        out += '\t';
        put(e.val_loss);
        out += '\n';
    }
    return out;
}

}  // namespace micon::model
