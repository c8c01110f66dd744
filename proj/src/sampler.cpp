#include "micon/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "micon/errors.hpp"

namespace micon::model {

namespace {

std::string batch_key(const data::WellRecord& w) { return w.source_id + "|" + w.batch_id; }
std::string plate_key(const data::WellRecord& w) {
    return w.source_id + "|" + w.batch_id + "|" + w.plate_id;
}

}  // namespace

BatchSampler::BatchSampler(const data::Dataset& ds, const std::vector<uint32_t>& well_indices)
    : ds_(&ds) {
    for (uint32_t wi : well_indices) {
        if (wi >= ds.wells.size()) throw ConfigError("sampler: well index out of range");
        const auto& w = ds.wells[wi];
        for (uint32_t f = 0; f < w.fovs.size(); ++f) {
            FovRef ref{wi, f};
            all_fovs_.push_back(ref);
            if (w.is_control()) {
                controls_by_batch_[batch_key(w)].push_back(ref);
                controls_by_plate_[plate_key(w)].push_back(ref);
            } else {
                perturbed_fovs_.push_back(ref);
                by_perturbation_[w.perturbation_id].push_back(ref);
            }
        }
    }
    if (all_fovs_.empty()) throw ConfigError("sampler: empty well subset");

    // per-feature sd over the subset, for feature-space augmentation
    const size_t d = ds.feature_dim;
    feature_sd_.assign(d, 0.0);
    std::vector<double> mean(d, 0.0);
    for (const auto& ref : all_fovs_) {
        const auto& x = ds.wells[ref.well].fovs[ref.fov];
        for (size_t j = 0; j < d; ++j) mean[j] += x[j];
    }
    for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(all_fovs_.size());
    for (const auto& ref : all_fovs_) {
        const auto& x = ds.wells[ref.well].fovs[ref.fov];
        for (size_t j = 0; j < d; ++j) {
            const double c = x[j] - mean[j];
            feature_sd_[j] += c * c;
        }
    }
    for (size_t j = 0; j < d; ++j)
        feature_sd_[j] = std::sqrt(feature_sd_[j] / static_cast<double>(all_fovs_.size()));
}

TrainingBatch BatchSampler::sample(uint32_t T, uint32_t C, math::SplitRng& rng) const {
    if (perturbed_fovs_.empty()) throw TrainError("sampler: no perturbed images in subset");
    TrainingBatch b;
    b.t1.reserve(T);
    b.t2.reserve(T);

    // T1 uniform over perturbed FOVs whose perturbation has a second image;
    // T2 uniform over the same perturbation excluding the exact T1 image.
    for (uint32_t j = 0; j < T; ++j) {
        FovRef a{};
        const std::vector<FovRef>* pool = nullptr;
        bool found = false;
        for (int attempt = 0; attempt < 256; ++attempt) {
            a = perturbed_fovs_[rng.below(perturbed_fovs_.size())];
            pool = &by_perturbation_.at(ds_->wells[a.well].perturbation_id);
            if (pool->size() >= 2) {
                found = true;
                break;
            }
        }
        if (!found)
            throw TrainError("sampler: could not find a perturbation with two images");
        FovRef p{};
        do {
            p = (*pool)[rng.below(pool->size())];
        } while (p == a);
        b.t1.push_back(a);
        b.t2.push_back(p);
    }

    // batches touched by the perturbed draws, in key-sorted order
    std::vector<std::string> pbatches;
    std::vector<std::string> pplates;
    for (const auto* side : {&b.t1, &b.t2}) {
        for (const auto& ref : *side) {
            pbatches.push_back(batch_key(ds_->wells[ref.well]));
            pplates.push_back(plate_key(ds_->wells[ref.well]));
        }
    }
    std::sort(pbatches.begin(), pbatches.end());
    pbatches.erase(std::unique(pbatches.begin(), pbatches.end()), pbatches.end());
    std::sort(pplates.begin(), pplates.end());
    pplates.erase(std::unique(pplates.begin(), pplates.end()), pplates.end());

    for (const auto& bk : pbatches)
        if (!controls_by_batch_.count(bk))
            throw TrainError("sampler: no eligible control image in batch " + bk);

    // guarantee coverage of min(|perturbed batches|, C) distinct batches
    const uint32_t m = std::min<uint32_t>(static_cast<uint32_t>(pbatches.size()), C);
    std::vector<std::string> order = pbatches;
    rng.shuffle(order);
    b.ctrl.reserve(C);
    for (uint32_t i = 0; i < m; ++i) {
        const std::string& bk = order[i];
        // plate-first: controls from a perturbed plate inside this batch
        std::vector<FovRef> plate_pool;
        for (const auto& pk : pplates) {
            if (pk.compare(0, bk.size(), bk) != 0 || pk.size() <= bk.size() || pk[bk.size()] != '|')
                continue;
            auto it = controls_by_plate_.find(pk);
            if (it != controls_by_plate_.end())
                plate_pool.insert(plate_pool.end(), it->second.begin(), it->second.end());
        }
        const auto& pool = plate_pool.empty() ? controls_by_batch_.at(bk) : plate_pool;
        b.ctrl.push_back(pool[rng.below(pool.size())]);
    }
    // remaining control draws: uniform over every control in the touched batches
    if (C > m) {
        std::vector<FovRef> rest;
        for (const auto& bk : pbatches) {
            const auto& v = controls_by_batch_.at(bk);
            rest.insert(rest.end(), v.begin(), v.end());
        }
        for (uint32_t i = m; i < C; ++i) b.ctrl.push_back(rest[rng.below(rest.size())]);
    }

    // counterfactual fusion context: same-batch control, else any sampled control
    b.cf_context.reserve(T);
    for (uint32_t j = 0; j < T; ++j) {
        const std::string bk = batch_key(ds_->wells[b.t1[j].well]);
        std::vector<uint32_t> same;
        for (uint32_t c = 0; c < b.ctrl.size(); ++c)
            if (batch_key(ds_->wells[b.ctrl[c].well]) == bk) same.push_back(c);
        if (!same.empty())
            b.cf_context.push_back(same[rng.below(same.size())]);
        else
            b.cf_context.push_back(static_cast<uint32_t>(rng.below(b.ctrl.size())));
    }
    return b;
}

std::vector<FovRef> BatchSampler::sample_instances(uint32_t n, math::SplitRng& rng) const {
    std::vector<FovRef> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) out.push_back(all_fovs_[rng.below(all_fovs_.size())]);
    return out;
}

std::vector<FovRef> BatchSampler::sample_perturbed(uint32_t n, math::SplitRng& rng) const {
    if (perturbed_fovs_.empty()) throw TrainError("sampler: no perturbed images in subset");
    std::vector<FovRef> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        out.push_back(perturbed_fovs_[rng.below(perturbed_fovs_.size())]);
    return out;
}

math::Matrix gather_fovs(const data::Dataset& ds, const std::vector<FovRef>& refs) {
    math::Matrix x(refs.size(), ds.feature_dim);
    for (size_t i = 0; i < refs.size(); ++i) {
        const auto& f = ds.wells[refs[i].well].fovs[refs[i].fov];
        for (size_t j = 0; j < ds.feature_dim; ++j) x(i, j) = f[j];
    }
    return x;
}

}  // namespace micon::model
