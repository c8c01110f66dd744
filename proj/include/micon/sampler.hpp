#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "micon/dataset.hpp"
#include "micon/matrix.hpp"
#include "micon/rng.hpp"

namespace micon::model {

struct FovRef {
    uint32_t well = 0;
    uint32_t fov = 0;
    bool operator==(const FovRef&) const = default;
};

// One PaCLR training batch: T perturbed anchors, T same-perturbation partners
// (distinct images), C controls from the perturbed images' plates/batches.
struct TrainingBatch {
    std::vector<FovRef> t1, t2, ctrl;
    // fusion context per T1 entry: index into ctrl, same microscopy batch when
    // available, otherwise any sampled control
    std::vector<uint32_t> cf_context;
};

// Precomputes index structures over one split subset and draws batches.
class BatchSampler {
public:
    BatchSampler(const data::Dataset& ds, const std::vector<uint32_t>& well_indices);

    // T1/T2/C sampling per the perturbation-aware scheme.
    TrainingBatch sample(uint32_t T, uint32_t C, math::SplitRng& rng) const;

    // label-free instance draws (SimCLR) over every FOV including controls
    std::vector<FovRef> sample_instances(uint32_t n, math::SplitRng& rng) const;
    // uniform perturbed draws (CLIP)
    std::vector<FovRef> sample_perturbed(uint32_t n, math::SplitRng& rng) const;

    const std::vector<double>& feature_sd() const { return feature_sd_; }
    size_t n_fovs() const { return all_fovs_.size(); }
    size_t n_perturbed_fovs() const { return perturbed_fovs_.size(); }

    const data::Dataset& dataset() const { return *ds_; }

private:
    const data::Dataset* ds_;
    std::vector<FovRef> all_fovs_;
    std::vector<FovRef> perturbed_fovs_;
    std::map<std::string, std::vector<FovRef>> by_perturbation_;
    std::map<std::string, std::vector<FovRef>> controls_by_batch_;  // "source|batch"
    std::map<std::string, std::vector<FovRef>> controls_by_plate_;  // "source|batch|plate"
    std::vector<double> feature_sd_;
};

// Assembles the feature matrix for a list of FOV refs.
math::Matrix gather_fovs(const data::Dataset& ds, const std::vector<FovRef>& refs);

}  // namespace micon::model
