#include <algorithm>
#include <cmath>
#include <map>

#include "micon/errors.hpp"
#include "micon/eval.hpp"

namespace micon::eval {

namespace {

constexpr double kMadEps = 1e-6;

double median_inplace(std::vector<double>& v) {
    const size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// group well list indices by plate, verifying control counts
std::map<std::string, std::vector<size_t>> by_plate(const std::vector<WellEmbedding>& wells,
                                                    size_t min_controls, const char* op) {
    std::map<std::string, std::vector<size_t>> plates;
    for (size_t i = 0; i < wells.size(); ++i) plates[wells[i].plate_key()].push_back(i);
    for (const auto& [plate, idx] : plates) {
        size_t n_ctrl = 0;
        for (size_t i : idx)
            if (wells[i].is_control()) ++n_ctrl;
        if (n_ctrl < min_controls)
            throw EvalError(std::string(op) + ": plate " + plate + " has " +
                            std::to_string(n_ctrl) + " control wells, needs >= " +
                            std::to_string(min_controls));
    }
    return plates;
}

// Jacobi eigendecomposition of a symmetric matrix: a = V diag(eig) V^T.
void jacobi_eigen(math::Matrix a, std::vector<double>& eig, math::Matrix& v) {
    const size_t n = a.rows;
    v = math::Matrix(n, n);
    for (size_t i = 0; i < n; ++i) v(i, i) = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-22) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    eig.resize(n);
    for (size_t i = 0; i < n; ++i) eig[i] = a(i, i);
}

}  // namespace

std::string WellEmbedding::key() const {
    return source_id + "|" + batch_id + "|" + plate_id + "|" + std::to_string(row) + "|" +
           std::to_string(col);
}

std::string WellEmbedding::plate_key() const { return source_id + "|" + batch_id + "|" + plate_id; }

std::string WellEmbedding::batch_key() const { return source_id + "|" + batch_id; }

WellEmbedding aggregate_well(const data::WellRecord& well, const math::Matrix& fov_reps) {
    if (fov_reps.rows == 0) throw EvalError("aggregate_well: no representations for " + well.key());
    WellEmbedding e;
    e.source_id = well.source_id;
    e.batch_id = well.batch_id;
    e.plate_id = well.plate_id;
    e.row = well.row;
    e.col = well.col;
    e.perturbation_id = well.perturbation_id;
    e.vec.assign(fov_reps.cols, 0.0);
    for (size_t r = 0; r < fov_reps.rows; ++r)
        for (size_t c = 0; c < fov_reps.cols; ++c) e.vec[c] += fov_reps(r, c);
    for (auto& x : e.vec) x /= static_cast<double>(fov_reps.rows);
    return e;
}

std::vector<WellEmbedding> embed_wells(model::ModelParams& mp, const data::Dataset& ds,
                                       const std::vector<uint32_t>& well_indices) {
    std::vector<WellEmbedding> out;
    out.reserve(well_indices.size());
    for (uint32_t wi : well_indices) {
        const auto& w = ds.wells[wi];
        math::Matrix x(w.fovs.size(), ds.feature_dim);
        for (size_t f = 0; f < w.fovs.size(); ++f)
            for (size_t j = 0; j < ds.feature_dim; ++j) x(f, j) = w.fovs[f][j];
        const math::Matrix reps = mp.encode_and_project(x, math::Mode::infer);
        out.push_back(aggregate_well(w, reps));
    }
    return out;
}

std::vector<WellEmbedding> feature_embed_wells(const data::Dataset& ds,
                                               const std::vector<uint32_t>& well_indices) {
    std::vector<WellEmbedding> out;
    out.reserve(well_indices.size());
    for (uint32_t wi : well_indices) {
        const auto& w = ds.wells[wi];
        math::Matrix x(w.fovs.size(), ds.feature_dim);
        for (size_t f = 0; f < w.fovs.size(); ++f)
            for (size_t j = 0; j < ds.feature_dim; ++j) x(f, j) = w.fovs[f][j];
        out.push_back(aggregate_well(w, x));
    }
    return out;
}

std::vector<WellEmbedding> counterfactual_embed_wells(model::ModelParams& mp,
                                                      const data::Dataset& ds,
                                                      const std::vector<uint32_t>& well_indices) {
    // spatially nearest same-plate control per query, smallest (row, col) on ties
    auto plate_of = [](const data::WellRecord& w) {
        return w.source_id + "|" + w.batch_id + "|" + w.plate_id;
    };
    std::map<std::string, std::vector<uint32_t>> plate_controls;
    for (uint32_t i = 0; i < ds.wells.size(); ++i)
        if (ds.wells[i].is_control()) plate_controls[plate_of(ds.wells[i])].push_back(i);

    std::vector<WellEmbedding> out;
    out.reserve(well_indices.size());
    for (uint32_t wi : well_indices) {
        const auto& w = ds.wells[wi];
        if (w.is_control())
            throw EvalError("counterfactual embedding requested for control well " + w.key());
        auto it = plate_controls.find(plate_of(w));
        if (it == plate_controls.end() || it->second.empty())
            throw EvalError("no control well on plate " + plate_of(w) + " for " + w.key());
        uint32_t best = it->second.front();
        double best_d2 = 1e300;
        for (uint32_t ci : it->second) {
            const auto& c = ds.wells[ci];
            const double dr = c.row - w.row, dc = c.col - w.col;
            const double d2 = dr * dr + dc * dc;
            const auto& b = ds.wells[best];
            if (d2 < best_d2 ||
                (d2 == best_d2 && std::make_pair(c.row, c.col) < std::make_pair(b.row, b.col))) {
                best_d2 = d2;
                best = ci;
            }
        }
        const auto& ctrl = ds.wells[best];
        math::Matrix cx(ctrl.fovs.size(), ds.feature_dim);
        for (size_t f = 0; f < ctrl.fovs.size(); ++f)
            for (size_t j = 0; j < ds.feature_dim; ++j) cx(f, j) = ctrl.fovs[f][j];
        const math::Matrix creps = mp.encode_and_project(cx, math::Mode::infer);
        const WellEmbedding ctx = aggregate_well(ctrl, creps);

        const math::Matrix fp = model::fingerprint_rows(ds, {w.perturbation_id});
        const math::Matrix emb = mp.encode_compound(fp, math::Mode::infer);
        math::Matrix ctx_m(1, ctx.vec.size());
        for (size_t j = 0; j < ctx.vec.size(); ++j) ctx_m(0, j) = ctx.vec[j];
        const math::Matrix t = mp.fuse_counterfactual(ctx_m, emb, math::Mode::infer);

        WellEmbedding e;
        e.source_id = w.source_id;
        e.batch_id = w.batch_id;
        e.plate_id = w.plate_id;
        e.row = w.row;
        e.col = w.col;
        e.perturbation_id = w.perturbation_id;
        e.vec.assign(t.cols, 0.0);
        for (size_t j = 0; j < t.cols; ++j) e.vec[j] = t(0, j);
        out.push_back(std::move(e));
    }
    return out;
}

void mad_normalize(std::vector<WellEmbedding>& wells) {
    if (wells.empty()) return;
    const size_t d = wells.front().vec.size();
    const auto plates = by_plate(wells, 2, "mad_normalize");
    for (const auto& [plate, idx] : plates) {
        std::vector<size_t> ctrl;
        for (size_t i : idx)
            if (wells[i].is_control()) ctrl.push_back(i);
        for (size_t j = 0; j < d; ++j) {
            std::vector<double> vals;
            vals.reserve(ctrl.size());
            for (size_t i : ctrl) vals.push_back(wells[i].vec[j]);
            const double med = median_inplace(vals);
            for (auto& v : vals) v = std::abs(v - med);
            const double mad = median_inplace(vals);
            const double denom = std::max(mad, kMadEps);
            for (size_t i : idx) wells[i].vec[j] = (wells[i].vec[j] - med) / denom;
        }
    }
}

void spherize(std::vector<WellEmbedding>& wells, double shrink) {
    if (wells.empty()) return;
    if (shrink < 0.0 || shrink > 1.0) throw EvalError("spherize: shrink must be in [0, 1]");
    const size_t d = wells.front().vec.size();
    const auto plates = by_plate(wells, 2, "spherize");
    for (const auto& [plate, idx] : plates) {
        std::vector<size_t> ctrl;
        for (size_t i : idx)
            if (wells[i].is_control()) ctrl.push_back(i);
        const double nc = static_cast<double>(ctrl.size());

        std::vector<double> mean(d, 0.0);
        for (size_t i : ctrl)
            for (size_t j = 0; j < d; ++j) mean[j] += wells[i].vec[j];
        for (auto& m : mean) m /= nc;

        math::Matrix sigma(d, d);
        for (size_t i : ctrl) {
            for (size_t a = 0; a < d; ++a) {
                const double xa = wells[i].vec[a] - mean[a];
                for (size_t b = a; b < d; ++b)
                    sigma(a, b) += xa * (wells[i].vec[b] - mean[b]);
            }
        }
        const double denom = nc - 1.0;
        double diag_mean = 0.0;
        for (size_t a = 0; a < d; ++a) {
            for (size_t b = a; b < d; ++b) {
                sigma(a, b) /= denom;
                sigma(b, a) = sigma(a, b);
            }
            diag_mean += sigma(a, a);
        }
        diag_mean /= static_cast<double>(d);
        if (shrink > 0.0) {
            for (size_t a = 0; a < d; ++a)
                for (size_t b = 0; b < d; ++b)
                    sigma(a, b) = (1.0 - shrink) * sigma(a, b) + (a == b ? shrink * diag_mean : 0.0);
        }

        std::vector<double> eig;
        math::Matrix v;
        jacobi_eigen(sigma, eig, v);
        double max_eig = 0.0;
        for (double e : eig) max_eig = std::max(max_eig, std::abs(e));
        std::vector<double> inv_sqrt(d);
        for (size_t a = 0; a < d; ++a) {
            if (eig[a] <= 1e-12 * std::max(1.0, max_eig))
                throw EvalError("spherize: control covariance on plate " + plate +
                                " is not positive definite (eigenvalue " + std::to_string(eig[a]) +
                                "); raise shrink or add controls");
            inv_sqrt[a] = 1.0 / std::sqrt(eig[a]);
        }

        // W = V diag(eig^-1/2) V^T
        math::Matrix w(d, d);
        for (size_t a = 0; a < d; ++a)
            for (size_t b = 0; b < d; ++b) {
                double acc = 0.0;
                for (size_t k = 0; k < d; ++k) acc += v(a, k) * inv_sqrt[k] * v(b, k);
                w(a, b) = acc;
            }

        for (size_t i : idx) {
            std::vector<double> y(d, 0.0);
            for (size_t a = 0; a < d; ++a) {
                double acc = 0.0;
                for (size_t b = 0; b < d; ++b) acc += w(a, b) * (wells[i].vec[b] - mean[b]);
                y[a] = acc;
            }
            wells[i].vec = std::move(y);
        }
    }
}

}  // namespace micon::eval
