#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "micon/fingerprint.hpp"
#include "micon/rng.hpp"

namespace micon::data {

inline constexpr const char* kControlId = "DMSO";

struct WellRecord {
    std::string source_id;
    std::string batch_id;
    std::string plate_id;
    int row = 0;
    int col = 0;
    std::string perturbation_id;
    std::vector<std::vector<double>> fovs;

    bool is_control() const { return perturbation_id == kControlId; }
    std::string key() const;  // "source|batch|plate|row|col"
    std::vector<double> mean_fov() const;
};

struct CompoundInfo {
    std::string smiles;
    chem::Fingerprint fp;
};

// Synthetic provenance, kept for diagnostics and generator tests.
struct BatchEffects {
    double treatment_scale = 1.0;          // scalar multiplier on compound effects
    std::vector<double> phenotype_shift;   // additive, feature space
    std::vector<double> imaging_gain;      // elementwise multiplicative
    std::vector<double> imaging_offset;    // additive after gain
};

struct GroundTruth {
    std::map<std::string, std::vector<double>> compound_effects;          // latent e_k
    std::map<std::string, BatchEffects> batch_effects;                    // key "source|batch"
    std::vector<double> phenotype_base;
};

struct Dataset {
    std::vector<WellRecord> wells;
    std::map<std::string, CompoundInfo> compounds;
    size_t feature_dim = 0;
    std::optional<GroundTruth> ground_truth;

    std::vector<std::string> sources() const;
    std::vector<uint32_t> wells_of_source(const std::string& source) const;
};

struct SplitSpec {
    std::vector<uint32_t> train, val, retrieval, query;  // well indices, ascending
    uint64_t seed = 0;
};

struct SynthConfig {
    uint32_t n_sources = 6;
    uint32_t batches_per_source = 3;
    uint32_t plates_per_batch = 2;
    uint32_t wells_per_plate = 24;
    uint32_t fovs_per_well = 4;
    uint32_t n_compounds = 8;
    double control_fraction = 1.0 / 3.0;
    uint32_t latent_dim = 16;
    uint32_t feature_dim = 64;
    double effect_strength = 1.0;
    double treatment_strength = 0.1;
    double phenotype_strength = 0.5;
    double imaging_strength = 0.3;
    double noise_sd = 0.1;
    double structure_signal = 0.8;
    uint64_t seed = 1;

    void validate() const;  // throws ConfigError on bad fields
};

// ---- generation & IO ----

Dataset gen_synthetic(const SynthConfig& cfg);

// committed pool of valid drug-like SMILES used by the generator
const std::vector<std::string>& smiles_pool();

Dataset ingest_features(const std::string& wells_table, const std::string& compounds_table);
void export_features(const Dataset& ds, const std::string& wells_table, const std::string& compounds_table);

void save_split(const SplitSpec& split, const Dataset& ds, const std::string& path);
SplitSpec load_split(const std::string& path, const Dataset& ds);

// ---- split protocols ----

SplitSpec split_id_by_batch(const Dataset& ds, double query_frac, uint32_t val_batches_per_source,
                            uint64_t seed);
SplitSpec split_ood_source(const Dataset& ds, const std::string& unseen_source, uint64_t seed);
SplitSpec split_ood_compound(const Dataset& ds, const std::set<std::string>& seen_compounds,
                             uint32_t unseen_wells_retrieval, uint32_t unseen_wells_query, uint64_t seed);

// ---- compound nomination ----

struct NominatedCompound {
    std::string compound_id;
    uint32_t qualifying_sources = 0;
    double mean_distance = 0.0;
    std::map<std::string, double> per_source_distance;
};

std::vector<NominatedCompound> nominate_strong_compounds(const Dataset& ds, double top_frac,
                                                         uint32_t min_sources);

}  // namespace micon::data
