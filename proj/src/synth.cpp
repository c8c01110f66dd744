#include <cmath>

#include "micon/dataset.hpp"
#include "micon/errors.hpp"

namespace micon::data {

namespace {

std::vector<double> unit_or_zero(std::vector<double> v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return v;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return v;
}

// near-square plate grid: rows is the largest divisor of n not above sqrt(n)
std::pair<int, int> plate_grid(uint32_t n) {
    int rows = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (rows > 1 && n % static_cast<uint32_t>(rows) != 0) --rows;
    return {rows, static_cast<int>(n) / rows};
}

}  // namespace

Dataset gen_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    math::SplitRng root(cfg.seed);
    Dataset ds;
    ds.feature_dim = cfg.feature_dim;
    GroundTruth gt;

    // global structure: base phenotype, fingerprint->latent map, latent->feature decoder
    math::SplitRng base_rng = root.split("phenotype_base");
    gt.phenotype_base.resize(cfg.feature_dim);
    for (auto& v : gt.phenotype_base) v = base_rng.gaussian();

    const auto& pool = smiles_pool();
    math::SplitRng pool_rng = root.split("compound_pool");
    std::vector<uint32_t> pool_idx(pool.size());
    for (uint32_t i = 0; i < pool.size(); ++i) pool_idx[i] = i;
    pool_rng.shuffle(pool_idx);

    const uint32_t fp_bits = 2048;
    math::SplitRng map_rng = root.split("structure_map");
    std::vector<double> M(cfg.latent_dim * fp_bits);
    for (auto& v : M) v = map_rng.gaussian();
    math::SplitRng dec_rng = root.split("decoder");
    std::vector<double> D(cfg.feature_dim * cfg.latent_dim);
    const double dec_sd = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
    for (auto& v : D) v = dec_sd * dec_rng.gaussian();

    // batch nuisance lives in a shared low-dimensional subspace (a handful of
    // global factors: staining intensity, confluence, focus), with per-batch
    // coefficients; full-rank per-batch draws would make invariance to unseen
    // batches unlearnable
    constexpr uint32_t kNuisanceRank = 4;
    math::SplitRng nui_rng = root.split("nuisance_basis");
    auto draw_basis = [&] {
        std::vector<std::vector<double>> basis(kNuisanceRank);
        for (auto& dir : basis) {
            dir.resize(cfg.feature_dim);
            for (auto& v : dir) v = nui_rng.gaussian();
            dir = unit_or_zero(std::move(dir));
        }
        return basis;
    };
    const auto shift_basis = draw_basis();
    const auto gain_basis = draw_basis();
    const auto offset_basis = draw_basis();
    // coefficient sd keeps the per-feature magnitude of a rank-r mixture equal
    // to an iid draw at the same strength
    const double coef_sd = std::sqrt(static_cast<double>(cfg.feature_dim) / kNuisanceRank);
    auto mix = [&](const std::vector<std::vector<double>>& basis, double strength, double center,
                   math::SplitRng& rng) {
        std::vector<double> v(cfg.feature_dim, center);
        for (const auto& dir : basis) {
            const double c = strength * coef_sd * rng.gaussian();
            for (uint32_t f = 0; f < cfg.feature_dim; ++f) v[f] += c * dir[f];
        }
        return v;
    };

    std::vector<std::string> compound_ids;
    for (uint32_t k = 0; k < cfg.n_compounds; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "CPD-%03u", k);
        const std::string id = buf;
        compound_ids.push_back(id);
        CompoundInfo info;
        info.smiles = pool[pool_idx[k]];
        info.fp = chem::ecfp(chem::parse_smiles(info.smiles));
        // latent effect: structured part from the fingerprint + free part
        std::vector<double> structured(cfg.latent_dim, 0.0);
        for (uint32_t bit : info.fp.on_bits())
            for (uint32_t l = 0; l < cfg.latent_dim; ++l) structured[l] += M[l * fp_bits + bit];
        structured = unit_or_zero(std::move(structured));
        math::SplitRng g_rng = root.split("free_effect").split(id);
        std::vector<double> free(cfg.latent_dim);
        for (auto& v : free) v = g_rng.gaussian();
        free = unit_or_zero(std::move(free));
        std::vector<double> e(cfg.latent_dim);
        for (uint32_t l = 0; l < cfg.latent_dim; ++l)
            e[l] = cfg.structure_signal * structured[l] + (1.0 - cfg.structure_signal) * free[l];
        gt.compound_effects[id] = std::move(e);
        ds.compounds.emplace(id, std::move(info));
    }

    // effect vectors decoded into feature space once per compound
    std::map<std::string, std::vector<double>> decoded;
    for (const auto& [id, e] : gt.compound_effects) {
        std::vector<double> fx(cfg.feature_dim, 0.0);
        for (uint32_t f = 0; f < cfg.feature_dim; ++f)
            for (uint32_t l = 0; l < cfg.latent_dim; ++l) fx[f] += D[f * cfg.latent_dim + l] * e[l];
        decoded[id] = std::move(fx);
    }

    const auto [grid_rows, grid_cols] = plate_grid(cfg.wells_per_plate);
    uint32_t n_ctrl = static_cast<uint32_t>(std::floor(cfg.control_fraction * cfg.wells_per_plate + 0.5));
    n_ctrl = std::max(1u, std::min(n_ctrl, cfg.wells_per_plate - 1));

    for (uint32_t s = 0; s < cfg.n_sources; ++s) {
        const std::string source = "S" + std::to_string(s);
        for (uint32_t b = 0; b < cfg.batches_per_source; ++b) {
            const std::string batch = "B" + std::to_string(b);
            math::SplitRng brng = root.split("batch_effects").split(source).split(batch);
            BatchEffects be;
            be.treatment_scale = 1.0 + cfg.treatment_strength * brng.gaussian();
            be.phenotype_shift = mix(shift_basis, cfg.phenotype_strength, 0.0, brng);
            be.imaging_gain = mix(gain_basis, cfg.imaging_strength, 1.0, brng);
            be.imaging_offset = mix(offset_basis, cfg.imaging_strength, 0.0, brng);
            gt.batch_effects[source + "|" + batch] = be;

            for (uint32_t p = 0; p < cfg.plates_per_batch; ++p) {
                const std::string plate = "P" + std::to_string(p);
                math::SplitRng lay_rng = root.split("layout").split(source).split(batch).split(plate);
                std::vector<uint32_t> pos(cfg.wells_per_plate);
                for (uint32_t i = 0; i < pos.size(); ++i) pos[i] = i;
                lay_rng.shuffle(pos);
                math::SplitRng nrng = root.split("noise").split(source).split(batch).split(plate);

                for (uint32_t wi = 0; wi < cfg.wells_per_plate; ++wi) {
                    WellRecord w;
                    w.source_id = source;
                    w.batch_id = batch;
                    w.plate_id = plate;
                    w.row = static_cast<int>(pos[wi]) / grid_cols;
                    w.col = static_cast<int>(pos[wi]) % grid_cols;
                    const bool control = wi < n_ctrl;
                    w.perturbation_id = control ? kControlId : compound_ids[(wi - n_ctrl) % cfg.n_compounds];
                    const std::vector<double>* eff = control ? nullptr : &decoded.at(w.perturbation_id);
                    w.fovs.reserve(cfg.fovs_per_well);
                    for (uint32_t fv = 0; fv < cfg.fovs_per_well; ++fv) {
                        std::vector<double> x(cfg.feature_dim);
                        for (uint32_t f = 0; f < cfg.feature_dim; ++f) {
                            double v = gt.phenotype_base[f] + be.phenotype_shift[f];
                            if (eff) v += cfg.effect_strength * be.treatment_scale * (*eff)[f];
                            v = be.imaging_gain[f] * v + be.imaging_offset[f];
                            v += cfg.noise_sd * nrng.gaussian();
                            x[f] = v;
                        }
                        w.fovs.push_back(std::move(x));
                    }
                    ds.wells.push_back(std::move(w));
                }
            }
        }
    }
    ds.ground_truth = std::move(gt);
    return ds;
}

}  // namespace micon::data
