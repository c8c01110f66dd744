#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "micon/dataset.hpp"
#include "micon/matrix.hpp"
#include "micon/model.hpp"

namespace micon::eval {

struct WellEmbedding {
    std::string source_id, batch_id, plate_id;
    int row = 0, col = 0;
    std::string perturbation_id;
    std::vector<double> vec;

    std::string key() const;        // source|batch|plate|row|col
    std::string plate_key() const;  // source|batch|plate
    std::string batch_key() const;  // source|batch
    bool is_control() const { return perturbation_id == data::kControlId; }
};

// Mean of the per-FOV representations of one well.
WellEmbedding aggregate_well(const data::WellRecord& well, const math::Matrix& fov_reps);

// Projects every FOV of the listed wells through the image tower (infer mode)
// and averages per well.
std::vector<WellEmbedding> embed_wells(model::ModelParams& mp, const data::Dataset& ds,
                                       const std::vector<uint32_t>& well_indices);

// Counterfactual well embeddings: each perturbed well's embedding is replaced
// by F(context, compound embedding) where the context is the aggregated
// projected representation of the spatially nearest control well on the same
// plate.  Control wells in the list are rejected.
std::vector<WellEmbedding> counterfactual_embed_wells(model::ModelParams& mp,
                                                      const data::Dataset& ds,
                                                      const std::vector<uint32_t>& well_indices);

// Raw-feature baseline: mean FOV feature vector per well, no model.
std::vector<WellEmbedding> feature_embed_wells(const data::Dataset& ds,
                                               const std::vector<uint32_t>& well_indices);

// ---- post-processing ----

// Per plate and coordinate: x <- (x - median(controls)) / max(MAD(controls), 1e-6).
// Every represented plate needs >= 2 control wells.
void mad_normalize(std::vector<WellEmbedding>& wells);

// Per-plate ZCA whitening fit on the control wells: center on the control
// mean, transform by W = U diag(lambda'^-1/2) U^T where lambda' are the
// eigenvalues of (1-shrink)*Sigma + shrink*mean(diag(Sigma))*I.
void spherize(std::vector<WellEmbedding>& wells, double shrink);

// ---- retrieval ----

enum class Constraint { none, nsb, nss };

Constraint constraint_from_string(const std::string& s);
std::string constraint_to_string(Constraint c);

struct QueryMatch {
    std::string query_key, matched_key;
    bool correct = false;
};

struct RetrievalReport {
    Constraint constraint = Constraint::none;
    size_t n_queries = 0, n_correct = 0;
    double accuracy = 0.0, chance_level = 0.0;
    std::vector<QueryMatch> per_query;
};

// 1-nearest-neighbor by cosine distance.  Candidates: different well key
// always; NSB additionally requires a different (source, batch); NSS a
// different source.  Ties resolve to the candidate earliest in key order.
RetrievalReport retrieve_1nn(const std::vector<WellEmbedding>& query,
                             const std::vector<WellEmbedding>& retrieval, Constraint constraint);

std::string report_to_json(const RetrievalReport& report);

// ---- statistics ----

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);
// Upper-tail probabilities.
double student_t_sf(double t, double dof);
double f_sf(double f, double d1, double d2);

// Pooled-variance unpaired t-test, alternative: mean(a) > mean(b).
// Returns (t, p).  Zero pooled variance: equal means -> (0, 0.5); otherwise
// t = +-inf with p = 0 or 1.
std::pair<double, double> t_test_one_tailed(const std::vector<double>& a,
                                            const std::vector<double>& b);

// One-way repeated-measures ANOVA on a complete subjects x conditions table.
// Returns (F, p).  Conventions: no condition variance -> (0, 1); zero error
// sum of squares with condition variance -> (inf, 0).
std::pair<double, double> rm_anova(const math::Matrix& table);

}  // namespace micon::eval
