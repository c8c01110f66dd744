#pragma once

#include <string>
#include <vector>

#include "micon/matrix.hpp"

namespace micon::model {

// All losses are InfoNCE over cosine similarity with temperature tau.
// Gradient outputs are optional; pass nullptr to compute the value only.
// Gradients are ACCUMULATED into pre-sized matrices when provided.

// Perturbation-aware contrastive loss over one set of representations.
// Positives: same label, i != k.  Denominator: all k != i.  Anchors without
// any positive are skipped and the outer average renormalized.
double paclr_loss(const math::Matrix& reps, const std::vector<std::string>& labels, double tau,
                  math::Matrix* dreps = nullptr);

// Counterfactual variant: anchors are real representations, candidates are
// counterfactual representations; denominator spans ALL candidates (the sets
// are disjoint, no self-exclusion).  Errors if no anchor shares a label with
// any candidate.
double cf_paclr_loss(const math::Matrix& real, const std::vector<std::string>& real_labels,
                     const math::Matrix& cf, const std::vector<std::string>& cf_labels, double tau,
                     math::Matrix* dreal = nullptr, math::Matrix* dcf = nullptr);

// Combined objective: paclr_loss(reps) + cf_weight * cf_paclr_loss(reps, cf).
// cf_weight = 0 skips the counterfactual term entirely and matches paclr_loss
// bit for bit.  Gradients on the counterfactual side arrive pre-scaled.
double micon_total_loss(const math::Matrix& reps, const std::vector<std::string>& labels,
                        const math::Matrix& cf, const std::vector<std::string>& cf_labels,
                        double tau, double cf_weight, math::Matrix* dreps = nullptr,
                        math::Matrix* dcf = nullptr);

// SimCLR instance discrimination: rows interleaved as (instance0 view0,
// instance0 view1, instance1 view0, ...).  Positive of row i is row i^1.
double simclr_loss(const math::Matrix& views, double tau, math::Matrix* dviews = nullptr);

// Symmetric cross-modal InfoNCE, image->compound and compound->image, halved.
// Row i of both matrices forms the matched pair; duplicates are independent.
double clip_loss(const math::Matrix& image_reps, const math::Matrix& compound_reps, double tau,
                 math::Matrix* dimage = nullptr, math::Matrix* dcompound = nullptr);

}  // namespace micon::model
