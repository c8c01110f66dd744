#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "micon/checkpoint.hpp"
#include "micon/commands.hpp"
#include "micon/dataset.hpp"
#include "micon/errors.hpp"
#include "micon/eval.hpp"
#include "micon/train.hpp"

namespace fs = std::filesystem;

namespace micon::cli {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv(const std::vector<double>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(v[i]);
    }
    return out;
}

std::string join(const std::vector<size_t>& v) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out.good()) throw ArtifactError("cannot write " + tmp);
        out << content;
        if (!out.good()) throw ArtifactError("short write to " + tmp);
    }
    fs::rename(tmp, path);
}

constexpr std::initializer_list<const char*> kDataKeys = {
    "n_sources",       "batches_per_source", "plates_per_batch",  "wells_per_plate",
    "fovs_per_well",   "n_compounds",        "control_fraction",  "latent_dim",
    "feature_dim",     "effect_strength",    "treatment_strength", "phenotype_strength",
    "imaging_strength", "noise_sd",          "structure_signal",  "seed",
    "wells_table",     "compounds_table",    "ground_truth_table"};

constexpr std::initializer_list<const char*> kTrainKeys = {
    "method",      "methods",        "seeds",         "tau",
    "batch_size",  "control_fraction", "epochs",      "fp_bits",
    "image_embed", "image_hidden",   "compound_hidden", "fusion_hidden",
    "proj_hidden", "proj_dim",       "lr",            "weight_decay",
    "warmup_steps", "clip_norm",     "checkpoint_every", "cf_weight"};

constexpr std::initializer_list<const char*> kSplitKeys = {
    "protocol",      "seed",          "query_frac",
    "val_batches_per_source", "unseen_source", "seen_compounds",
    "unseen_wells_retrieval", "unseen_wells_query"};

constexpr std::initializer_list<const char*> kEvalKeys = {
    "constraints", "postprocess",        "shrink",           "include_controls",
    "query_mode",  "permutation_rounds", "permutation_seed", "feature_baseline"};

struct DataPaths {
    std::string wells, compounds, ground_truth;
};

DataPaths data_paths(const Config& cfg, const std::string& out_dir) {
    DataPaths p;
    p.wells = cfg.str("data", "wells_table", out_dir + "/data/wells.csv");
    p.compounds = cfg.str("data", "compounds_table", out_dir + "/data/compounds.csv");
    p.ground_truth = cfg.str("data", "ground_truth_table", out_dir + "/data/ground_truth.tsv");
    return p;
}

data::SynthConfig synth_from_config(const Config& cfg) {
    data::SynthConfig sc;
    sc.n_sources = static_cast<uint32_t>(cfg.uint("data", "n_sources", sc.n_sources));
    sc.batches_per_source =
        static_cast<uint32_t>(cfg.uint("data", "batches_per_source", sc.batches_per_source));
    sc.plates_per_batch =
        static_cast<uint32_t>(cfg.uint("data", "plates_per_batch", sc.plates_per_batch));
    sc.wells_per_plate =
        static_cast<uint32_t>(cfg.uint("data", "wells_per_plate", sc.wells_per_plate));
    sc.fovs_per_well = static_cast<uint32_t>(cfg.uint("data", "fovs_per_well", sc.fovs_per_well));
    sc.n_compounds = static_cast<uint32_t>(cfg.uint("data", "n_compounds", sc.n_compounds));
    sc.control_fraction = cfg.num("data", "control_fraction", sc.control_fraction);
    sc.latent_dim = static_cast<uint32_t>(cfg.uint("data", "latent_dim", sc.latent_dim));
    sc.feature_dim = static_cast<uint32_t>(cfg.uint("data", "feature_dim", sc.feature_dim));
    sc.effect_strength = cfg.num("data", "effect_strength", sc.effect_strength);
    sc.treatment_strength = cfg.num("data", "treatment_strength", sc.treatment_strength);
    sc.phenotype_strength = cfg.num("data", "phenotype_strength", sc.phenotype_strength);
    sc.imaging_strength = cfg.num("data", "imaging_strength", sc.imaging_strength);
    sc.noise_sd = cfg.num("data", "noise_sd", sc.noise_sd);
    sc.structure_signal = cfg.num("data", "structure_signal", sc.structure_signal);
    sc.seed = cfg.uint("data", "seed");  // required: generated data must be reproducible
    sc.validate();
    return sc;
}

model::HyperParams hp_from_config(const Config& cfg) {
    model::HyperParams hp;
    hp.tau = cfg.num("train", "tau", hp.tau);
    hp.batch_size = static_cast<uint32_t>(cfg.uint("train", "batch_size", hp.batch_size));
    hp.control_fraction = cfg.num("train", "control_fraction", hp.control_fraction);
    hp.epochs = static_cast<uint32_t>(cfg.uint("train", "epochs", hp.epochs));
    hp.fp_bits = cfg.uint("train", "fp_bits", hp.fp_bits);
    hp.image_embed = cfg.uint("train", "image_embed", hp.image_embed);
    hp.image_hidden = cfg.size_list("train", "image_hidden", join(hp.image_hidden));
    hp.compound_hidden = cfg.size_list("train", "compound_hidden", join(hp.compound_hidden));
    hp.fusion_hidden = cfg.size_list("train", "fusion_hidden", join(hp.fusion_hidden));
    hp.proj_hidden = cfg.size_list("train", "proj_hidden", join(hp.proj_hidden));
    hp.proj_dim = cfg.uint("train", "proj_dim", hp.proj_dim);
    hp.lr = cfg.num("train", "lr", hp.lr);
    hp.weight_decay = cfg.num("train", "weight_decay", hp.weight_decay);
    hp.warmup_steps = static_cast<uint32_t>(cfg.uint("train", "warmup_steps", hp.warmup_steps));
    hp.clip_norm = cfg.num("train", "clip_norm", hp.clip_norm);
    hp.checkpoint_every =
        static_cast<uint32_t>(cfg.uint("train", "checkpoint_every", hp.checkpoint_every));
    hp.cf_weight = cfg.num("train", "cf_weight", hp.cf_weight);
    return hp;
}

std::vector<model::Method> methods_from_config(const Config& cfg) {
    std::string dflt = cfg.str("train", "method", "micon");
    std::vector<model::Method> out;
    for (const auto& name : cfg.list("train", "methods", dflt))
        out.push_back(model::method_from_string(name));
    if (out.empty()) throw ConfigError("train.methods must name at least one method");
    return out;
}

std::vector<uint64_t> seeds_from_config(const Config& cfg) {
    auto seeds = cfg.uint_list("train", "seeds", "1");
    if (seeds.empty()) throw ConfigError("train.seeds must be a nonempty seed list");
    std::set<uint64_t> uniq(seeds.begin(), seeds.end());
    if (uniq.size() != seeds.size()) throw ConfigError("train.seeds contains duplicates");
    return seeds;
}

data::SplitSpec build_split(const Config& cfg, const data::Dataset& ds) {
    const std::string protocol = cfg.str("split", "protocol", "id_by_batch");
    const uint64_t seed = cfg.uint("split", "seed", 17);
    if (protocol == "id_by_batch") {
        return data::split_id_by_batch(
            ds, cfg.num("split", "query_frac", 0.34),
            static_cast<uint32_t>(cfg.uint("split", "val_batches_per_source", 1)), seed);
    }
    if (protocol == "ood_source") {
        return data::split_ood_source(ds, cfg.str("split", "unseen_source"), seed);
    }
    if (protocol == "ood_compound") {
        const auto seen = cfg.list("split", "seen_compounds", "");
        return data::split_ood_compound(
            ds, std::set<std::string>(seen.begin(), seen.end()),
            static_cast<uint32_t>(cfg.uint("split", "unseen_wells_retrieval", 2)),
            static_cast<uint32_t>(cfg.uint("split", "unseen_wells_query", 2)), seed);
    }
    throw ConfigError("split.protocol must be one of id_by_batch|ood_source|ood_compound, got '" +
                      protocol + "'");
}

void write_manifest(const std::string& out_dir, const std::string& command, const Config& cfg,
                    const std::string& seeds) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "0x%016llx",
                  static_cast<unsigned long long>(cfg.content_hash()));
    std::string m = "command=" + command + "\nconfig_hash=" + hash +
                    "\ncode_version=" + kCodeVersion + "\nseeds=" + seeds + "\n";
    write_file_atomic(out_dir + "/manifest-" + command + ".txt", m);
}

void write_ground_truth(const data::Dataset& ds, const std::string& path) {
    if (!ds.ground_truth) return;
    const auto& gt = *ds.ground_truth;
    std::string out;
    out += "phenotype_base\t" + csv(gt.phenotype_base) + "\n";
    for (const auto& [id, e] : gt.compound_effects)
        out += "compound_effect\t" + id + "\t" + csv(e) + "\n";
    for (const auto& [key, be] : gt.batch_effects)
        out += "batch_effect\t" + key + "\ttreatment_scale=" + fmt_double(be.treatment_scale) +
               "\tphenotype_shift=" + csv(be.phenotype_shift) +
               "\timaging_gain=" + csv(be.imaging_gain) +
               "\timaging_offset=" + csv(be.imaging_offset) + "\n";
    write_file_atomic(path, out);
}

void ensure_parent_dir(const std::string& file_path) {
    const fs::path dir = fs::path(file_path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
}

std::string ckpt_path(const std::string& out_dir, model::Method m, uint64_t seed) {
    return out_dir + "/checkpoints/" + model::method_to_string(m) + "-seed" +
           std::to_string(seed) + ".ckpt";
}

// ---- evaluation helpers ----

void postprocess_union(std::vector<eval::WellEmbedding>& q, std::vector<eval::WellEmbedding>& r,
                       double shrink) {
    std::vector<eval::WellEmbedding> all = q;
    all.insert(all.end(), r.begin(), r.end());
    eval::mad_normalize(all);
    eval::spherize(all, shrink);
    std::copy(all.begin(), all.begin() + static_cast<long>(q.size()), q.begin());
    std::copy(all.begin() + static_cast<long>(q.size()), all.end(), r.begin());
}

void drop_controls(std::vector<eval::WellEmbedding>& wells) {
    std::erase_if(wells, [](const eval::WellEmbedding& w) { return w.is_control(); });
}

// counterfactual query embeddings: fused representations for treated wells,
// real embeddings for control wells (kept only to fit post-processing)
std::vector<eval::WellEmbedding> cf_query_embeddings(model::ModelParams& mp,
                                                     const data::Dataset& ds,
                                                     const std::vector<uint32_t>& indices) {
    std::vector<uint32_t> treated, ctrl;
    for (uint32_t i : indices)
        (ds.wells.at(i).is_control() ? ctrl : treated).push_back(i);
    auto out = eval::counterfactual_embed_wells(mp, ds, treated);
    if (!ctrl.empty()) {
        auto c = eval::embed_wells(mp, ds, ctrl);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

SeedRetrieval pack_for_permutation(const eval::RetrievalReport& rep,
                                   const std::vector<eval::WellEmbedding>& q,
                                   const std::vector<eval::WellEmbedding>& r) {
    SeedRetrieval s;
    std::map<std::string, size_t> idx;
    s.retrieval_labels.reserve(r.size());
    for (size_t i = 0; i < r.size(); ++i) {
        s.retrieval_labels.push_back(r[i].perturbation_id);
        idx[r[i].key()] = i;
    }
    s.query_labels.reserve(q.size());
    s.matched.reserve(q.size());
    for (size_t i = 0; i < rep.per_query.size(); ++i) {
        s.query_labels.push_back(q[i].perturbation_id);
        s.matched.push_back(idx.at(rep.per_query[i].matched_key));
    }
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

double permutation_pvalue(const std::vector<SeedRetrieval>& seeds, uint32_t rounds,
                          uint64_t rng_seed) {
    if (rounds == 0) throw ConfigError("eval.permutation_rounds must be >= 1");
    uint64_t observed = 0;
    for (const auto& s : seeds) {
        if (s.matched.size() != s.query_labels.size())
            throw EvalError("permutation test: matched/query size mismatch");
        for (size_t i = 0; i < s.matched.size(); ++i)
            if (s.retrieval_labels.at(s.matched[i]) == s.query_labels[i]) ++observed;
    }
    const math::SplitRng root(rng_seed);
    uint64_t ge = 0;
    for (uint32_t m = 0; m < rounds; ++m) {
        uint64_t total = 0;
        const auto draw = root.split(m);
        for (size_t si = 0; si < seeds.size(); ++si) {
            auto rng = draw.split(si);
            std::vector<std::string> labels = seeds[si].retrieval_labels;
            rng.shuffle(labels);
            for (size_t i = 0; i < seeds[si].matched.size(); ++i)
                if (labels[seeds[si].matched[i]] == seeds[si].query_labels[i]) ++total;
        }
        if (total >= observed) ++ge;
    }
    return (1.0 + static_cast<double>(ge)) / (static_cast<double>(rounds) + 1.0);
}

ComparisonReport build_comparison(const std::vector<EvalRow>& rows,
                                  const std::map<std::string, double>& permutation_p) {
    if (rows.empty()) throw ArtifactError("no evaluation rows to compare");
    ComparisonReport rep;
    std::map<std::string, std::set<uint64_t>> seeds_by_method;
    for (const auto& r : rows) {
        if (std::find(rep.methods.begin(), rep.methods.end(), r.method) == rep.methods.end())
            rep.methods.push_back(r.method);
        if (std::find(rep.settings.begin(), rep.settings.end(), r.setting) == rep.settings.end())
            rep.settings.push_back(r.setting);
        seeds_by_method[r.method].insert(r.seed);
    }
    const auto& ref_seeds = seeds_by_method.at(rep.methods.front());
    for (const auto& [m, s] : seeds_by_method)
        if (s != ref_seeds)
            throw ArtifactError("mismatched seed sets across methods: " + rep.methods.front() +
                                " vs " + m);
    rep.seeds.assign(ref_seeds.begin(), ref_seeds.end());

    for (const auto& method : rep.methods)
        for (const auto& setting : rep.settings) {
            std::map<uint64_t, const EvalRow*> by_seed;
            for (const auto& r : rows)
                if (r.method == method && r.setting == setting) {
                    if (!by_seed.emplace(r.seed, &r).second)
                        throw ArtifactError("duplicate result row: " + method + " " + setting +
                                            " seed " + std::to_string(r.seed));
                }
            if (by_seed.empty())
                throw ArtifactError("method " + method + " has no rows for setting " + setting);
            if (by_seed.size() != rep.seeds.size())
                throw ArtifactError("mismatched seed counts for " + method + " " + setting);
            ComparisonCell cell;
            for (const auto& [seed, r] : by_seed) cell.per_seed.push_back(r->accuracy);
            cell.mean = mean_of(cell.per_seed);
            cell.sd = sd_of(cell.per_seed);
            cell.chance = by_seed.begin()->second->chance;
            auto p = permutation_p.find(method + "|" + setting);
            if (p != permutation_p.end()) cell.permutation_p = p->second;
            rep.cells[method][setting] = std::move(cell);
        }

    rep.reference = std::find(rep.methods.begin(), rep.methods.end(), "micon") != rep.methods.end()
                        ? "micon"
                        : rep.methods.front();
    for (const auto& method : rep.methods) {
        if (method == rep.reference) continue;
        for (const auto& setting : rep.settings) {
            auto& cell = rep.cells[method][setting];
            const auto& ref = rep.cells[rep.reference][setting];
            if (ref.per_seed.size() + cell.per_seed.size() < 3) continue;  // needs df >= 1
            const auto [t, p] = eval::t_test_one_tailed(ref.per_seed, cell.per_seed);
            cell.t_vs_ref = t;
            cell.p_vs_ref = p;
            cell.has_test = true;
            cell.significant = p < 0.05;
        }
    }

    const bool both = rep.cells.count("micon") && rep.cells.count("paclr_only");
    if (both && rep.seeds.size() * rep.settings.size() >= 2) {
        math::Matrix table(rep.seeds.size() * rep.settings.size(), 2);
        size_t row = 0;
        for (const auto& setting : rep.settings)
            for (size_t k = 0; k < rep.seeds.size(); ++k, ++row) {
                table(row, 0) = rep.cells["micon"][setting].per_seed[k];
                table(row, 1) = rep.cells["paclr_only"][setting].per_seed[k];
            }
        const auto [f, p] = eval::rm_anova(table);
        rep.has_anova = true;
        rep.anova_f = f;
        rep.anova_p = p;
    }
    return rep;
}

std::string ComparisonReport::format_table() const {
    auto cell_text = [this](const std::string& m, const std::string& s) {
        const auto& c = cells.at(m).at(s);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f \xc2\xb1 %.3f%s", c.mean, c.sd,
                      c.significant ? "*" : " ");
        return std::string(buf);
    };
    std::vector<std::string> header = {"setting", "chance"};
    header.insert(header.end(), methods.begin(), methods.end());
    std::vector<std::vector<std::string>> grid;
    for (const auto& s : settings) {
        std::vector<std::string> row = {s};
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", cells.at(methods.front()).at(s).chance);
        row.push_back(buf);
        for (const auto& m : methods) row.push_back(cell_text(m, s));
        grid.push_back(std::move(row));
    }
    std::vector<size_t> width(header.size());
    auto display_len = [](const std::string& s) {  // the ± sign is 2 bytes, 1 column
        size_t n = 0;
        for (unsigned char c : s)
            if ((c & 0xc0) != 0x80) ++n;
        return n;
    };
    for (size_t j = 0; j < header.size(); ++j) width[j] = display_len(header[j]);
    for (const auto& row : grid)
        for (size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], display_len(row[j]));

    std::string out = "retrieval accuracy by method and evaluation setting\n";
    out += "seeds:";
    for (uint64_t s : seeds) out += " " + std::to_string(s);
    out += "; cells: mean \xc2\xb1 sd; *: one-tailed t-test " + reference +
           " > method, p < 0.05\n\n";
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (size_t j = 0; j < row.size(); ++j) {
            out += row[j];
            if (j + 1 < row.size())
                out += std::string(width[j] - display_len(row[j]) + 2, ' ');
        }
        out += "\n";
    };
    emit_row(header);
    for (const auto& row : grid) emit_row(row);

    bool any_perm = false;
    for (const auto& m : methods)
        for (const auto& s : settings)
            if (cells.at(m).at(s).permutation_p >= 0.0) any_perm = true;
    if (any_perm) {
        out += "\nlabel-permutation p (pooled over seeds):\n";
        for (const auto& m : methods) {
            out += "  " + m + ":";
            for (const auto& s : settings) {
                const double p = cells.at(m).at(s).permutation_p;
                char buf[80];
                if (p >= 0.0)
                    std::snprintf(buf, sizeof buf, " %s=%.6g", s.c_str(), p);
                else
                    std::snprintf(buf, sizeof buf, " %s=n/a", s.c_str());
                out += buf;
            }
            out += "\n";
        }
    }
    if (has_anova) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "\ncf-ablation micon vs paclr_only, RM-ANOVA pooled over settings: "
                      "F = %.6g, p = %.6g\n",
                      anova_f, anova_p);
        out += buf;
    }
    return out;
}

std::string ComparisonReport::to_json() const {
    auto num_or_null = [](double v, bool present) {
        return present ? fmt_double(v) : std::string("null");
    };
    std::string out = "{\n";
    out += "  \"reference\": \"" + reference + "\",\n";
    out += "  \"seeds\": [";
    for (size_t i = 0; i < seeds.size(); ++i)
        out += (i ? ", " : "") + std::to_string(seeds[i]);
    out += "],\n  \"methods\": [";
    for (size_t i = 0; i < methods.size(); ++i)
        out += (i ? ", " : "") + ("\"" + methods[i] + "\"");
    out += "],\n  \"settings\": [";
    for (size_t i = 0; i < settings.size(); ++i)
        out += (i ? ", " : "") + ("\"" + settings[i] + "\"");
    out += "],\n  \"cells\": [\n";
    bool first = true;
    for (const auto& m : methods)
        for (const auto& s : settings) {
            const auto& c = cells.at(m).at(s);
            if (!first) out += ",\n";
            first = false;
            out += "    {\"method\": \"" + m + "\", \"setting\": \"" + s + "\", \"per_seed\": [";
            for (size_t i = 0; i < c.per_seed.size(); ++i)
                out += (i ? ", " : "") + fmt_double(c.per_seed[i]);
            out += "], \"mean\": " + fmt_double(c.mean) + ", \"sd\": " + fmt_double(c.sd) +
                   ", \"chance\": " + fmt_double(c.chance) +
                   ", \"t_vs_reference\": " + num_or_null(c.t_vs_ref, c.has_test) +
                   ", \"p_vs_reference\": " + num_or_null(c.p_vs_ref, c.has_test) +
                   ", \"significant\": " + (c.has_test && c.significant ? "true" : "false") +
                   ", \"permutation_p\": " + num_or_null(c.permutation_p, c.permutation_p >= 0.0) +
                   "}";
        }
    out += "\n  ],\n";
    out += "  \"anova\": {\"contrast\": \"micon_vs_paclr_only\", \"F\": " +
           num_or_null(anova_f, has_anova) + ", \"p\": " + num_or_null(anova_p, has_anova) +
           "}\n}\n";
    return out;
}

void cmd_gen_data(const Config& cfg, const std::string& out_dir) {
    cfg.check_known("data", kDataKeys);
    const auto sc = synth_from_config(cfg);
    const auto paths = data_paths(cfg, out_dir);
    const auto ds = data::gen_synthetic(sc);
    ensure_parent_dir(paths.wells);
    ensure_parent_dir(paths.compounds);
    ensure_parent_dir(paths.ground_truth);
    data::export_features(ds, paths.wells, paths.compounds);
    write_ground_truth(ds, paths.ground_truth);
    write_manifest(out_dir, "gen-data", cfg, std::to_string(sc.seed));

    std::set<std::string> batches, plates;
    size_t fovs = 0;
    for (const auto& w : ds.wells) {
        batches.insert(w.source_id + "|" + w.batch_id);
        plates.insert(w.source_id + "|" + w.batch_id + "|" + w.plate_id);
        fovs += w.fovs.size();
    }
    std::printf(
        "generated %zu wells (%zu FOVs) across %zu sources, %zu batches, %zu plates; "
        "%zu compounds; feature_dim=%zu\n",
        ds.wells.size(), fovs, ds.sources().size(), batches.size(), plates.size(),
        ds.compounds.size(), ds.feature_dim);
    std::printf("wells table:     %s\ncompounds table: %s\nground truth:    %s\n",
                paths.wells.c_str(), paths.compounds.c_str(), paths.ground_truth.c_str());
}

void cmd_train(const Config& cfg, const std::string& out_dir) {
    cfg.check_known("data", kDataKeys);
    cfg.check_known("split", kSplitKeys);
    cfg.check_known("train", kTrainKeys);
    const auto paths = data_paths(cfg, out_dir);
    const auto ds = data::ingest_features(paths.wells, paths.compounds);
    const auto split = build_split(cfg, ds);
    data::save_split(split, ds, out_dir + "/split.tsv");

    const auto hp_base = hp_from_config(cfg);
    const auto methods = methods_from_config(cfg);
    const auto seeds = seeds_from_config(cfg);
    fs::create_directories(out_dir + "/checkpoints");
    fs::create_directories(out_dir + "/logs");

    for (const auto method : methods)
        for (const uint64_t seed : seeds) {
            auto hp = hp_base;
            hp.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            const auto result = model::train_model(ds, split, hp, method);
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::string name = model::method_to_string(method);
            model::save_checkpoint(result.best, ckpt_path(out_dir, method, seed));
            write_file_atomic(out_dir + "/logs/" + name + "-seed" + std::to_string(seed) + ".log",
                              model::format_log(result.log));
            std::printf("trained %s seed %llu: %llu steps, best val %.6g at step %llu (%.1fs)\n",
                        name.c_str(), static_cast<unsigned long long>(seed),
                        static_cast<unsigned long long>(result.total_steps), result.best_val_loss,
                        static_cast<unsigned long long>(result.best_step), secs);
        }

    std::string seed_str;
    for (size_t i = 0; i < seeds.size(); ++i)
        seed_str += (i ? "," : "") + std::to_string(seeds[i]);
    write_manifest(out_dir, "train", cfg, seed_str);
}

void cmd_evaluate(const Config& cfg, const std::string& out_dir) {
    cfg.check_known("data", kDataKeys);
    cfg.check_known("train", kTrainKeys);
    cfg.check_known("eval", kEvalKeys);
    const auto paths = data_paths(cfg, out_dir);
    const auto ds = data::ingest_features(paths.wells, paths.compounds);
    const auto split = data::load_split(out_dir + "/split.tsv", ds);

    const auto methods = methods_from_config(cfg);
    const auto seeds = seeds_from_config(cfg);
    std::vector<eval::Constraint> constraints;
    for (const auto& name : cfg.list("eval", "constraints", "none,nsb,nss"))
        constraints.push_back(eval::constraint_from_string(name));
    if (constraints.empty()) throw ConfigError("eval.constraints must be nonempty");

    const std::string pp = cfg.str("eval", "postprocess", "on");
    std::vector<std::pair<std::string, bool>> variants;  // (setting suffix, post?)
    if (pp == "on")
        variants = {{"", true}};
    else if (pp == "off")
        variants = {{"", false}};
    else if (pp == "both")
        variants = {{"-raw", false}, {"-post", true}};
    else
        throw ConfigError("eval.postprocess must be on|off|both, got '" + pp + "'");

    const double shrink = cfg.num("eval", "shrink", 0.1);
    const bool include_controls = cfg.boolean("eval", "include_controls", false);
    const std::string query_mode = cfg.str("eval", "query_mode", "real");
    if (query_mode != "real" && query_mode != "counterfactual")
        throw ConfigError("eval.query_mode must be real|counterfactual, got '" + query_mode + "'");
    const uint32_t rounds =
        static_cast<uint32_t>(cfg.uint("eval", "permutation_rounds", 1000));
    const uint64_t perm_seed = cfg.uint("eval", "permutation_seed", 929);
    const bool feature_baseline = cfg.boolean("eval", "feature_baseline", false);

    fs::create_directories(out_dir + "/reports");

    std::vector<std::string> method_names;
    for (const auto m : methods) method_names.push_back(model::method_to_string(m));
    if (feature_baseline) method_names.push_back("features");

    std::vector<EvalRow> rows;
    std::map<std::string, std::vector<SeedRetrieval>> perm_inputs;  // "method|setting"
    for (const auto& name : method_names) {
        for (const uint64_t seed : seeds) {
            std::vector<eval::WellEmbedding> q_raw, r_raw;
            if (name == "features") {
                q_raw = eval::feature_embed_wells(ds, split.query);
                r_raw = eval::feature_embed_wells(ds, split.retrieval);
            } else {
                auto mp = model::load_checkpoint(
                    ckpt_path(out_dir, model::method_from_string(name), seed));
                r_raw = eval::embed_wells(mp, ds, split.retrieval);
                q_raw = query_mode == "real" ? eval::embed_wells(mp, ds, split.query)
                                             : cf_query_embeddings(mp, ds, split.query);
            }
            for (const auto& [suffix, post] : variants) {
                auto q = q_raw;
                auto r = r_raw;
                if (post) postprocess_union(q, r, shrink);
                if (!include_controls) {
                    drop_controls(q);
                    drop_controls(r);
                }
                for (const auto c : constraints) {
                    const auto rep = eval::retrieve_1nn(q, r, c);
                    const std::string setting = eval::constraint_to_string(c) + suffix;
                    write_file_atomic(out_dir + "/reports/" + name + "-seed" +
                                          std::to_string(seed) + "-" + setting + ".json",
                                      eval::report_to_json(rep));
                    rows.push_back({name, setting, seed, rep.accuracy, rep.chance_level,
                                    rep.n_queries, rep.n_correct});
                    perm_inputs[name + "|" + setting].push_back(pack_for_permutation(rep, q, r));
                }
            }
        }
    }

    std::map<std::string, double> perm_p;
    for (const auto& [key, inputs] : perm_inputs)
        perm_p[key] = permutation_pvalue(inputs, rounds, perm_seed ^ math::SplitRng::fnv64(key));

    std::string acc = "method\tsetting\tseed\taccuracy\tchance\tn_queries\tn_correct\n";
    for (const auto& r : rows)
        acc += r.method + "\t" + r.setting + "\t" + std::to_string(r.seed) + "\t" +
               fmt_double(r.accuracy) + "\t" + fmt_double(r.chance) + "\t" +
               std::to_string(r.n_queries) + "\t" + std::to_string(r.n_correct) + "\n";
    write_file_atomic(out_dir + "/reports/accuracies.tsv", acc);

    std::string perm = "method\tsetting\trounds\tp\n";
    for (const auto& [key, p] : perm_p) {
        const size_t bar = key.find('|');
        perm += key.substr(0, bar) + "\t" + key.substr(bar + 1) + "\t" + std::to_string(rounds) +
                "\t" + fmt_double(p) + "\n";
    }
    write_file_atomic(out_dir + "/reports/permutation.tsv", perm);

    const auto comparison = build_comparison(rows, perm_p);
    write_file_atomic(out_dir + "/comparison.txt", comparison.format_table());
    write_file_atomic(out_dir + "/comparison.json", comparison.to_json());

    std::string seed_str;
    for (size_t i = 0; i < seeds.size(); ++i)
        seed_str += (i ? "," : "") + std::to_string(seeds[i]);
    write_manifest(out_dir, "evaluate", cfg, seed_str);
    std::fputs(comparison.format_table().c_str(), stdout);
}

void cmd_nominate(const Config& cfg, const std::string& out_dir) {
    cfg.check_known("data", kDataKeys);
    cfg.check_known("nominate", {"top_frac", "min_sources"});
    const auto paths = data_paths(cfg, out_dir);
    const auto ds = data::ingest_features(paths.wells, paths.compounds);
    const double top_frac = cfg.num("nominate", "top_frac", 0.1);
    const auto min_sources = static_cast<uint32_t>(cfg.uint("nominate", "min_sources", 4));
    const auto picks = data::nominate_strong_compounds(ds, top_frac, min_sources);

    const auto sources = ds.sources();
    std::string out = "compound_id\tqualifying_sources\tmean_distance";
    for (const auto& s : sources) out += "\tdist_" + s;
    out += "\n";
    for (const auto& p : picks) {
        out += p.compound_id + "\t" + std::to_string(p.qualifying_sources) + "\t" +
               fmt_double(p.mean_distance);
        for (const auto& s : sources) {
            auto it = p.per_source_distance.find(s);
            out += "\t" + (it == p.per_source_distance.end() ? std::string("-")
                                                             : fmt_double(it->second));
        }
        out += "\n";
    }
    write_file_atomic(out_dir + "/nominated.tsv", out);
    write_manifest(out_dir, "nominate", cfg, "-");
    std::printf("nominated %zu of %zu compounds (top_frac %.3g, min_sources %u) -> %s\n",
                picks.size(), ds.compounds.size(), top_frac, min_sources,
                (out_dir + "/nominated.tsv").c_str());
}

void cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
    if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
    std::vector<EvalRow> rows;
    std::map<std::string, std::vector<double>> perm_raw;
    for (const auto& dir : run_dirs) {
        const std::string acc_path = dir + "/reports/accuracies.tsv";
        std::ifstream in(acc_path);
        if (!in.good())
            throw ArtifactError("no evaluation results in " + dir + " (expected " + acc_path +
                                ")");
        std::string line;
        std::getline(in, line);  // header
        size_t line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::vector<std::string> f;
            std::string tok;
            while (std::getline(ss, tok, '\t')) f.push_back(tok);
            if (f.size() != 7)
                throw ArtifactError(acc_path + " line " + std::to_string(line_no) +
                                    ": expected 7 columns");
            rows.push_back({f[0], f[1], std::stoull(f[2]), std::stod(f[3]), std::stod(f[4]),
                            std::stoull(f[5]), std::stoull(f[6])});
        }
        std::ifstream pin(dir + "/reports/permutation.tsv");
        if (pin.good()) {
            std::getline(pin, line);
            while (std::getline(pin, line)) {
                if (line.empty()) continue;
                std::stringstream ss(line);
                std::vector<std::string> f;
                std::string tok;
                while (std::getline(ss, tok, '\t')) f.push_back(tok);
                if (f.size() == 4) perm_raw[f[0] + "|" + f[1]].push_back(std::stod(f[3]));
            }
        }
    }
    // permutation p values pool over one run's seeds; a key contributed by
    // several runs cannot be pooled after the fact, so it is dropped
    std::map<std::string, double> perm_p;
    for (const auto& [key, vals] : perm_raw)
        if (vals.size() == 1) perm_p[key] = vals[0];

    const auto comparison = build_comparison(rows, perm_p);
    fs::create_directories(out_dir);
    write_file_atomic(out_dir + "/comparison.txt", comparison.format_table());
    write_file_atomic(out_dir + "/plot_data.json", comparison.to_json());
    std::fputs(comparison.format_table().c_str(), stdout);
}

int run_command(const CliOptions& opt) {
    try {
        if (opt.command == "report") {
            const std::string out =
                opt.out_override.empty() ? opt.run_dirs.at(0) : opt.out_override;
            cmd_report(opt.run_dirs, out);
            return 0;
        }
        Config cfg = Config::parse_file(opt.config_path);
        if (opt.has_seed) {
            cfg.set("data", "seed", std::to_string(opt.seed));
            cfg.set("train", "seeds", std::to_string(opt.seed));
        }
        cfg.check_known("output", {"dir"});
        const std::string out = !opt.out_override.empty() ? opt.out_override
                                                          : cfg.str("output", "dir");
        fs::create_directories(out);
        if (opt.command == "gen-data")
            cmd_gen_data(cfg, out);
        else if (opt.command == "train")
            cmd_train(cfg, out);
        else if (opt.command == "evaluate")
            cmd_evaluate(cfg, out);
        else if (opt.command == "nominate")
            cmd_nominate(cfg, out);
        else
            throw ConfigError("unknown command '" + opt.command + "'");
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const TrainError& e) {
        std::fprintf(stderr, "training error: %s\n", e.what());
        return 3;
    } catch (const chem::ParseError& e) {
        std::fprintf(stderr, "artifact error: %s\n", e.what());
        return 4;
    } catch (const ArtifactError& e) {
        std::fprintf(stderr, "artifact error: %s\n", e.what());
        return 4;
    } catch (const EvalError& e) {
        std::fprintf(stderr, "evaluation error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace micon::cli
