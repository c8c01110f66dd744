#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "micon/dataset.hpp"
#include "micon/errors.hpp"

namespace micon::data {

namespace {

uint32_t round_half_up(double x) { return static_cast<uint32_t>(std::floor(x + 0.5)); }

std::map<std::string, std::vector<std::string>> batches_by_source(const Dataset& ds) {
    std::map<std::string, std::set<std::string>> tmp;
    for (const auto& w : ds.wells) tmp[w.source_id].insert(w.batch_id);
    std::map<std::string, std::vector<std::string>> out;
    for (auto& [s, bs] : tmp) out[s] = {bs.begin(), bs.end()};
    return out;
}

void tag_wells(const Dataset& ds, const std::map<std::string, int>& batch_bucket, SplitSpec& split,
               bool val_in_retrieval) {
    // bucket: 0 train, 1 val, 2 query, 3 retrieval-only
    for (uint32_t i = 0; i < ds.wells.size(); ++i) {
        const auto& w = ds.wells[i];
        auto it = batch_bucket.find(w.source_id + "|" + w.batch_id);
        if (it == batch_bucket.end()) continue;
        switch (it->second) {
            case 0:
                split.train.push_back(i);
                split.retrieval.push_back(i);
                break;
            case 1:
                split.val.push_back(i);
                if (val_in_retrieval) split.retrieval.push_back(i);
                break;
            case 2:
                split.query.push_back(i);
                break;
            case 3:
                split.retrieval.push_back(i);
                break;
        }
    }
}

void check_solvable(const Dataset& ds, const SplitSpec& split) {
    std::set<std::string> in_retrieval;
    for (uint32_t i : split.retrieval) in_retrieval.insert(ds.wells[i].perturbation_id);
    for (uint32_t i : split.query)
        if (!in_retrieval.count(ds.wells[i].perturbation_id))
            throw ConfigError("split leaves query perturbation '" + ds.wells[i].perturbation_id +
                              "' absent from the retrieval set");
}

}  // namespace

SplitSpec split_id_by_batch(const Dataset& ds, double query_frac, uint32_t val_batches_per_source,
                            uint64_t seed) {
    if (query_frac <= 0.0 || query_frac >= 1.0)
        throw ConfigError("split.query_frac must be in (0,1); the query set may not be empty");
    math::SplitRng rng = math::SplitRng(seed).split("id_by_batch");
    std::map<std::string, int> bucket;
    for (auto& [source, batches] : batches_by_source(ds)) {
        const uint32_t n = static_cast<uint32_t>(batches.size());
        const uint32_t n_query = std::max(1u, round_half_up(query_frac * n));
        if (n_query + val_batches_per_source + 1 > n)
            throw ConfigError("source " + source + " has only " + std::to_string(n) +
                              " batches; needs >= " + std::to_string(n_query + val_batches_per_source + 1));
        math::SplitRng srng = rng.split(source);
        srng.shuffle(batches);
        for (uint32_t i = 0; i < n; ++i) {
            const int b = i < n_query ? 2 : (i < n_query + val_batches_per_source ? 1 : 0);
            bucket[source + "|" + batches[i]] = b;
        }
    }
    SplitSpec split;
    split.seed = seed;
    tag_wells(ds, bucket, split, /*val_in_retrieval=*/true);
    check_solvable(ds, split);
    return split;
}

SplitSpec split_ood_source(const Dataset& ds, const std::string& unseen_source, uint64_t seed) {
    auto by_source = batches_by_source(ds);
    auto it = by_source.find(unseen_source);
    if (it == by_source.end()) throw ConfigError("unknown unseen source: " + unseen_source);
    if (it->second.size() < 2)
        throw ConfigError("unseen source " + unseen_source + " needs >= 2 batches, has " +
                          std::to_string(it->second.size()));
    math::SplitRng rng = math::SplitRng(seed).split("ood_source");
    std::map<std::string, int> bucket;
    for (auto& [source, batches] : by_source) {
        math::SplitRng srng = rng.split(source);
        srng.shuffle(batches);
        if (source == unseen_source) {
            const uint32_t n = static_cast<uint32_t>(batches.size());
            const uint32_t n_retrieval = (n + 1) / 2;
            for (uint32_t i = 0; i < n; ++i)
                bucket[source + "|" + batches[i]] = i < n_retrieval ? 3 : 2;
        } else {
            // one validation batch when possible, the rest train
            for (uint32_t i = 0; i < batches.size(); ++i)
                bucket[source + "|" + batches[i]] = (i == 0 && batches.size() >= 2) ? 1 : 0;
        }
    }
    SplitSpec split;
    split.seed = seed;
    tag_wells(ds, bucket, split, /*val_in_retrieval=*/true);
    check_solvable(ds, split);
    return split;
}

SplitSpec split_ood_compound(const Dataset& ds, const std::set<std::string>& seen_compounds,
                             uint32_t unseen_wells_retrieval, uint32_t unseen_wells_query, uint64_t seed) {
    if (unseen_wells_retrieval < 1 || unseen_wells_query < 1)
        throw ConfigError("unseen well counts must be >= 1 for a solvable split");
    for (const auto& c : seen_compounds)
        if (!ds.compounds.count(c)) throw ConfigError("seen compound not in dataset: " + c);
    std::vector<std::string> unseen;
    for (const auto& [id, info] : ds.compounds)
        if (!seen_compounds.count(id)) unseen.push_back(id);
    if (unseen.empty()) throw ConfigError("no unseen compounds: every compound is marked seen");

    math::SplitRng rng = math::SplitRng(seed).split("ood_compound");
    SplitSpec split;
    split.seed = seed;

    // train/val over seen-compound (and control) wells, holding one batch per source out for val
    std::map<std::string, int> bucket;
    for (auto& [source, batches] : batches_by_source(ds)) {
        math::SplitRng srng = rng.split("val").split(source);
        srng.shuffle(batches);
        for (uint32_t i = 0; i < batches.size(); ++i)
            bucket[source + "|" + batches[i]] = (i == 0 && batches.size() >= 2) ? 1 : 0;
    }
    std::map<std::string, std::vector<uint32_t>> unseen_wells;
    for (uint32_t i = 0; i < ds.wells.size(); ++i) {
        const auto& w = ds.wells[i];
        const bool is_seen = w.is_control() || seen_compounds.count(w.perturbation_id) > 0;
        if (is_seen) {
            const int b = bucket.at(w.source_id + "|" + w.batch_id);
            if (b == 1) {
                split.val.push_back(i);
            } else {
                split.train.push_back(i);
                split.retrieval.push_back(i);
            }
        } else {
            unseen_wells[w.perturbation_id].push_back(i);
        }
    }
    for (const auto& c : unseen) {
        auto& wells = unseen_wells[c];
        if (wells.size() < unseen_wells_retrieval + unseen_wells_query)
            throw ConfigError("compound " + c + " has " + std::to_string(wells.size()) +
                              " wells; needs >= " +
                              std::to_string(unseen_wells_retrieval + unseen_wells_query));
        math::SplitRng crng = rng.split("wells").split(c);
        crng.shuffle(wells);
        for (uint32_t i = 0; i < unseen_wells_retrieval; ++i) split.retrieval.push_back(wells[i]);
        for (uint32_t i = 0; i < unseen_wells_query; ++i)
            split.query.push_back(wells[unseen_wells_retrieval + i]);
    }
    for (auto* v : {&split.train, &split.val, &split.retrieval, &split.query})
        std::sort(v->begin(), v->end());
    check_solvable(ds, split);
    return split;
}

}  // namespace micon::data
