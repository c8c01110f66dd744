#include "micon/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "micon/errors.hpp"
#include "micon/smiles.hpp"

namespace micon::data {

std::string WellRecord::key() const {
    return source_id + "|" + batch_id + "|" + plate_id + "|" + std::to_string(row) + "|" +
           std::to_string(col);
}

std::vector<double> WellRecord::mean_fov() const {
    std::vector<double> m(fovs.at(0).size(), 0.0);
    for (const auto& f : fovs)
        for (size_t i = 0; i < m.size(); ++i) m[i] += f[i];
    for (auto& v : m) v /= static_cast<double>(fovs.size());
    return m;
}

std::vector<std::string> Dataset::sources() const {
    std::vector<std::string> out;
    for (const auto& w : wells)
        if (std::find(out.begin(), out.end(), w.source_id) == out.end()) out.push_back(w.source_id);
    return out;
}

std::vector<uint32_t> Dataset::wells_of_source(const std::string& source) const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < wells.size(); ++i)
        if (wells[i].source_id == source) out.push_back(i);
    return out;
}

void SynthConfig::validate() const {
    auto need = [](bool ok, const std::string& field) {
        if (!ok) throw ConfigError("data." + field + ": invalid value");
    };
    need(n_sources >= 1, "n_sources");
    need(batches_per_source >= 1, "batches_per_source");
    need(plates_per_batch >= 1, "plates_per_batch");
    need(wells_per_plate >= 1, "wells_per_plate");
    need(fovs_per_well >= 1, "fovs_per_well");
    need(n_compounds >= 1, "n_compounds");
    need(control_fraction > 0.0 && control_fraction < 1.0, "control_fraction");
    need(latent_dim >= 1, "latent_dim");
    need(feature_dim >= 1, "feature_dim");
    need(effect_strength >= 0.0, "effect_strength");
    need(treatment_strength >= 0.0, "treatment_strength");
    need(phenotype_strength >= 0.0, "phenotype_strength");
    need(imaging_strength >= 0.0, "imaging_strength");
    need(noise_sd >= 0.0, "noise_sd");
    need(structure_signal >= 0.0 && structure_signal <= 1.0, "structure_signal");
    need(n_compounds <= smiles_pool().size(), "n_compounds (exceeds SMILES pool)");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Dataset ingest_features(const std::string& wells_table, const std::string& compounds_table) {
    Dataset ds;

    std::ifstream cf(compounds_table);
    if (!cf.good()) throw ArtifactError("cannot open compounds table: " + compounds_table);
    std::string line;
    if (!std::getline(cf, line)) throw ArtifactError(compounds_table + ": empty file");
    {
        auto hdr = split_csv_line(line);
        if (hdr.size() < 2 || hdr[0] != "compound_id" || hdr[1] != "smiles")
            throw ArtifactError(compounds_table + ": expected header compound_id,smiles");
    }
    size_t row_no = 1;
    while (std::getline(cf, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2)
            throw ArtifactError(compounds_table + " row " + std::to_string(row_no) + ": expected 2 columns");
        CompoundInfo info;
        info.smiles = f[1];
        info.fp = chem::ecfp(chem::parse_smiles(f[1]));
        ds.compounds.emplace(f[0], std::move(info));
    }

    std::ifstream wf(wells_table);
    if (!wf.good()) throw ArtifactError("cannot open wells table: " + wells_table);
    if (!std::getline(wf, line)) throw ArtifactError(wells_table + ": empty file");
    auto hdr = split_csv_line(line);
    const std::vector<std::string> fixed = {"source_id", "batch_id",        "plate_id", "row",
                                            "col",       "perturbation_id", "fov_index"};
    if (hdr.size() <= fixed.size())
        throw ArtifactError(wells_table + ": header missing feature columns");
    for (size_t i = 0; i < fixed.size(); ++i)
        if (hdr[i] != fixed[i])
            throw ArtifactError(wells_table + ": missing column '" + fixed[i] + "' (got '" + hdr[i] + "')");
    const size_t d = hdr.size() - fixed.size();
    for (size_t i = 0; i < d; ++i)
        if (hdr[fixed.size() + i] != "f_" + std::to_string(i))
            throw ArtifactError(wells_table + ": feature column " + std::to_string(i) + " must be f_" +
                                std::to_string(i));
    ds.feature_dim = d;

    std::map<std::string, uint32_t> index;  // well key -> wells index
    struct PendingFov {
        uint32_t well;
        uint32_t fov_index;
        std::vector<double> values;
    };
    std::vector<PendingFov> pend;
    row_no = 1;
    while (std::getline(wf, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != fixed.size() + d)
            throw ArtifactError(wells_table + " row " + std::to_string(row_no) + ": expected " +
                                std::to_string(fixed.size() + d) + " columns, got " +
                                std::to_string(f.size()));
        WellRecord w;
        w.source_id = f[0];
        w.batch_id = f[1];
        w.plate_id = f[2];
        try {
            w.row = std::stoi(f[3]);
            w.col = std::stoi(f[4]);
        } catch (const std::exception&) {
            throw ArtifactError(wells_table + " row " + std::to_string(row_no) + ": bad row/col");
        }
        w.perturbation_id = f[5];
        if (!w.is_control() && !ds.compounds.count(w.perturbation_id))
            throw ArtifactError(wells_table + " row " + std::to_string(row_no) + ": unknown compound_id '" +
                                w.perturbation_id + "'");
        PendingFov pf;
        pf.fov_index = static_cast<uint32_t>(std::stoul(f[6]));
        pf.values.reserve(d);
        for (size_t i = 0; i < d; ++i) {
            try {
                pf.values.push_back(std::stod(f[fixed.size() + i]));
            } catch (const std::exception&) {
                throw ArtifactError(wells_table + " row " + std::to_string(row_no) + ": bad feature value");
            }
        }
        const std::string key = w.key();
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, static_cast<uint32_t>(ds.wells.size()));
            pf.well = static_cast<uint32_t>(ds.wells.size());
            ds.wells.push_back(std::move(w));
        } else {
            if (ds.wells[it->second].perturbation_id != w.perturbation_id)
                throw ArtifactError(wells_table + " row " + std::to_string(row_no) +
                                    ": conflicting perturbation for well " + key);
            pf.well = it->second;
        }
        pend.push_back(std::move(pf));
    }
    std::stable_sort(pend.begin(), pend.end(), [](const PendingFov& a, const PendingFov& b) {
        if (a.well != b.well) return a.well < b.well;
        return a.fov_index < b.fov_index;
    });
    for (auto& pf : pend) ds.wells[pf.well].fovs.push_back(std::move(pf.values));
    for (const auto& w : ds.wells)
        if (w.fovs.empty()) throw ArtifactError(wells_table + ": well " + w.key() + " has no FOVs");
    return ds;
}

void export_features(const Dataset& ds, const std::string& wells_table, const std::string& compounds_table) {
    std::ofstream cf(compounds_table);
    if (!cf.good()) throw ArtifactError("cannot write " + compounds_table);
    cf << "compound_id,smiles\n";
    for (const auto& [id, info] : ds.compounds) cf << id << "," << info.smiles << "\n";

    std::ofstream wf(wells_table);
    if (!wf.good()) throw ArtifactError("cannot write " + wells_table);
    wf << "source_id,batch_id,plate_id,row,col,perturbation_id,fov_index";
    for (size_t i = 0; i < ds.feature_dim; ++i) wf << ",f_" << i;
    wf << "\n";
    for (const auto& w : ds.wells) {
        for (size_t fi = 0; fi < w.fovs.size(); ++fi) {
            wf << w.source_id << "," << w.batch_id << "," << w.plate_id << "," << w.row << "," << w.col
               << "," << w.perturbation_id << "," << fi;
            for (double v : w.fovs[fi]) wf << "," << fmt_double(v);
            wf << "\n";
        }
    }
}

void save_split(const SplitSpec& split, const Dataset& ds, const std::string& path) {
    std::map<uint32_t, std::vector<std::string>> tags;
    for (uint32_t i : split.train) tags[i].push_back("train");
    for (uint32_t i : split.val) tags[i].push_back("val");
    for (uint32_t i : split.retrieval) tags[i].push_back("retrieval");
    for (uint32_t i : split.query) tags[i].push_back("query");
    std::ofstream out(path);
    if (!out.good()) throw ArtifactError("cannot write " + path);
    out << "# seed=" << split.seed << "\n";
    for (const auto& [idx, ts] : tags) {
        out << ds.wells.at(idx).key() << "\t";
        for (size_t i = 0; i < ts.size(); ++i) out << (i ? "," : "") << ts[i];
        out << "\n";
    }
}

SplitSpec load_split(const std::string& path, const Dataset& ds) {
    std::ifstream in(path);
    if (!in.good()) throw ArtifactError("cannot open split file: " + path);
    std::map<std::string, uint32_t> index;
    for (uint32_t i = 0; i < ds.wells.size(); ++i) index[ds.wells[i].key()] = i;
    SplitSpec split;
    std::string line;
    size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find("seed=");
            if (eq != std::string::npos) split.seed = std::stoull(line.substr(eq + 5));
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ArtifactError(path + " line " + std::to_string(row_no) + ": expected well_key<TAB>tags");
        const std::string key = line.substr(0, tab);
        auto it = index.find(key);
        if (it == index.end())
            throw ArtifactError(path + " line " + std::to_string(row_no) + ": unknown well " + key);
        std::istringstream ts(line.substr(tab + 1));
        std::string tag;
        while (std::getline(ts, tag, ',')) {
            if (tag == "train")
                split.train.push_back(it->second);
            else if (tag == "val")
                split.val.push_back(it->second);
            else if (tag == "retrieval")
                split.retrieval.push_back(it->second);
            else if (tag == "query")
                split.query.push_back(it->second);
            else
                throw ArtifactError(path + " line " + std::to_string(row_no) + ": unknown tag '" + tag + "'");
        }
    }
    for (auto* v : {&split.train, &split.val, &split.retrieval, &split.query})
        std::sort(v->begin(), v->end());
    return split;
}

}  // namespace micon::data
