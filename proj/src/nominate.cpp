#include <algorithm>
#include <cmath>
#include <map>

#include "micon/dataset.hpp"
#include "micon/errors.hpp"
#include "micon/matrix.hpp"

namespace micon::data {

std::vector<NominatedCompound> nominate_strong_compounds(const Dataset& ds, double top_frac,
                                                         uint32_t min_sources) {
    if (top_frac <= 0.0 || top_frac > 1.0) throw ConfigError("nominate.top_frac must be in (0,1]");
    if (min_sources < 1) throw ConfigError("nominate.min_sources must be >= 1");

    // controls per plate (plate identity = source|batch|plate)
    std::map<std::string, std::vector<uint32_t>> plate_controls;
    for (uint32_t i = 0; i < ds.wells.size(); ++i)
        if (ds.wells[i].is_control())
            plate_controls[ds.wells[i].source_id + "|" + ds.wells[i].batch_id + "|" + ds.wells[i].plate_id]
                .push_back(i);

    // per (source, compound): replicate-averaged cosine distance to the
    // spatially nearest same-plate control
    std::map<std::string, std::map<std::string, std::pair<double, uint32_t>>> acc;  // source -> cpd -> (sum, n)
    for (const auto& w : ds.wells) {
        if (w.is_control()) continue;
        const std::string plate_key = w.source_id + "|" + w.batch_id + "|" + w.plate_id;
        auto it = plate_controls.find(plate_key);
        if (it == plate_controls.end() || it->second.empty())
            throw ConfigError("plate " + plate_key + " has no control wells");
        const WellRecord* best = nullptr;
        double best_d2 = 0.0;
        for (uint32_t ci : it->second) {
            const auto& c = ds.wells[ci];
            const double dr = c.row - w.row, dc = c.col - w.col;
            const double d2 = dr * dr + dc * dc;
            if (!best || d2 < best_d2 - 1e-12 ||
                (std::abs(d2 - best_d2) <= 1e-12 &&
                 std::make_pair(c.row, c.col) < std::make_pair(best->row, best->col))) {
                best = &c;
                best_d2 = d2;
            }
        }
        const double dist = 1.0 - math::cosine_similarity(w.mean_fov(), best->mean_fov());
        auto& slot = acc[w.source_id][w.perturbation_id];
        slot.first += dist;
        slot.second += 1;
    }

    // per-source top-slot membership
    std::map<std::string, uint32_t> qualify_count;
    std::map<std::string, std::map<std::string, double>> per_source;  // cpd -> source -> distance
    for (const auto& [source, cpds] : acc) {
        std::vector<std::pair<std::string, double>> ranked;
        for (const auto& [cpd, sn] : cpds) {
            const double mean = sn.first / sn.second;
            ranked.emplace_back(cpd, mean);
            per_source[cpd][source] = mean;
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        const uint32_t n = static_cast<uint32_t>(ranked.size());
        uint32_t slots = static_cast<uint32_t>(std::floor(top_frac * n + 0.5));
        slots = std::max(1u, std::min(slots, n));
        for (uint32_t i = 0; i < slots; ++i) ++qualify_count[ranked[i].first];
    }

    std::vector<NominatedCompound> out;
    for (const auto& [cpd, cnt] : qualify_count) {
        if (cnt < min_sources) continue;
        NominatedCompound nc;
        nc.compound_id = cpd;
        nc.qualifying_sources = cnt;
        nc.per_source_distance = per_source[cpd];
        double sum = 0.0;
        for (const auto& [_, d] : nc.per_source_distance) sum += d;
        nc.mean_distance = sum / nc.per_source_distance.size();
        out.push_back(std::move(nc));
    }
    std::sort(out.begin(), out.end(), [](const NominatedCompound& a, const NominatedCompound& b) {
        if (a.qualifying_sources != b.qualifying_sources) return a.qualifying_sources > b.qualifying_sources;
        if (a.mean_distance != b.mean_distance) return a.mean_distance > b.mean_distance;
        return a.compound_id < b.compound_id;
    });
    return out;
}

}  // namespace micon::data
