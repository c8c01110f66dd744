#include "micon/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "micon/errors.hpp"

namespace micon::model {

using math::Matrix;

namespace {

struct Normalized {
    Matrix unit;                 // rows scaled to unit length
    std::vector<double> norm;    // original row norms
};

Normalized normalize_rows(const Matrix& m, const char* what) {
    Normalized out;
    out.unit = m;
    out.norm.resize(m.rows);
    for (size_t i = 0; i < m.rows; ++i) {
        double sq = 0.0;
        for (size_t j = 0; j < m.cols; ++j) sq += m(i, j) * m(i, j);
        const double n = std::sqrt(sq);
        if (n == 0.0)
            throw TrainError(std::string(what) + ": zero representation at row " + std::to_string(i));
        out.norm[i] = n;
        for (size_t j = 0; j < m.cols; ++j) out.unit(i, j) /= n;
    }
    return out;
}

// Shared InfoNCE core over cosine similarity.
//
//   loss = (1/N') sum_{i valid} (1/|P_i|) sum_{j in P_i} [logZ_i - s_ij/tau]
//   Z_i  = sum_{k in M_i} exp(s_ik/tau)
//
// where P_i marks positives and M_i the denominator candidates.  Gradients
// w.r.t. the raw (unnormalized) anchors/candidates are accumulated when
// requested.  `self_pair` excludes k == i from M (only meaningful when
// anchors and candidates alias the same matrix).
struct PairLoss {
    const Matrix& anchors;
    const Matrix& candidates;
    // pos[i] lists candidate indices that are positives of anchor i
    const std::vector<std::vector<uint32_t>>& pos;
    double tau;
    bool exclude_self;  // drop k == i from the denominator

    double compute(Matrix* danchors, Matrix* dcandidates) const {
        const size_t na = anchors.rows, nc = candidates.rows;
        if (na == 0 || nc == 0) throw TrainError("contrastive loss: empty representation set");
        if (anchors.cols != candidates.cols)
            throw std::invalid_argument("contrastive loss: dimension mismatch");
        Normalized A = normalize_rows(anchors, "anchors");
        Normalized B = normalize_rows(candidates, "candidates");

        // s = A_hat B_hat^T
        Matrix s = math::matmul_nt(A.unit, B.unit);

        size_t n_valid = 0;
        for (size_t i = 0; i < na; ++i)
            if (!pos[i].empty()) ++n_valid;
        if (n_valid == 0) throw TrainError("contrastive loss: no anchor has a positive candidate");

        // log-sum-exp denominators
        std::vector<double> logz(na, 0.0);
        double loss = 0.0;
        Matrix G;  // d loss / d s
        const bool want_grad = danchors || dcandidates;
        if (want_grad) G = Matrix(na, nc);

        for (size_t i = 0; i < na; ++i) {
            if (pos[i].empty()) continue;
            double mx = -1e300;
            for (size_t k = 0; k < nc; ++k) {
                if (exclude_self && k == i) continue;
                mx = std::max(mx, s(i, k) / tau);
            }
            double z = 0.0;
            for (size_t k = 0; k < nc; ++k) {
                if (exclude_self && k == i) continue;
                z += std::exp(s(i, k) / tau - mx);
            }
            logz[i] = mx + std::log(z);
            const double inv_p = 1.0 / static_cast<double>(pos[i].size());
            for (uint32_t j : pos[i]) loss += (logz[i] - s(i, j) / tau) * inv_p;
            if (want_grad) {
                const double w = 1.0 / (tau * static_cast<double>(n_valid));
                for (size_t k = 0; k < nc; ++k) {
                    if (exclude_self && k == i) continue;
                    G(i, k) = std::exp(s(i, k) / tau - logz[i]) * w;
                }
                for (uint32_t j : pos[i]) G(i, j) -= w * inv_p;
            }
        }
        loss /= static_cast<double>(n_valid);

        if (want_grad) {
            // dA_i = (sum_k G_ik B_hat_k - c_i A_hat_i) / ||A_i||, c_i = sum_k G_ik s_ik
            if (danchors) {
                Matrix U = math::matmul(G, B.unit);
                for (size_t i = 0; i < na; ++i) {
                    double c = 0.0;
                    for (size_t k = 0; k < nc; ++k) c += G(i, k) * s(i, k);
                    for (size_t j = 0; j < anchors.cols; ++j)
                        (*danchors)(i, j) += (U(i, j) - c * A.unit(i, j)) / A.norm[i];
                }
            }
            if (dcandidates) {
                Matrix V = math::matmul_tn(G, A.unit);
                for (size_t k = 0; k < nc; ++k) {
                    double c = 0.0;
                    for (size_t i = 0; i < na; ++i) c += G(i, k) * s(i, k);
                    for (size_t j = 0; j < candidates.cols; ++j)
                        (*dcandidates)(k, j) += (V(k, j) - c * B.unit(k, j)) / B.norm[k];
                }
            }
        }
        return loss;
    }
};

void check_tau(double tau) {
    if (tau <= 0.0) throw std::invalid_argument("tau must be > 0");
}

}  // namespace

double paclr_loss(const Matrix& reps, const std::vector<std::string>& labels, double tau, Matrix* dreps) {
    check_tau(tau);
    const size_t n = reps.rows;
    if (n < 2) throw std::invalid_argument("paclr_loss: need at least 2 representations");
    if (labels.size() != n) throw std::invalid_argument("paclr_loss: label count mismatch");
    std::vector<std::vector<uint32_t>> pos(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < n; ++k)
            if (i != k && labels[i] == labels[k]) pos[i].push_back(static_cast<uint32_t>(k));
    PairLoss pl{reps, reps, pos, tau, /*exclude_self=*/true};
    return pl.compute(dreps, dreps);  // anchors and candidates alias: both grads accumulate
}

double cf_paclr_loss(const Matrix& real, const std::vector<std::string>& real_labels, const Matrix& cf,
                     const std::vector<std::string>& cf_labels, double tau, Matrix* dreal, Matrix* dcf) {
    check_tau(tau);
    if (real.rows == 0 || cf.rows == 0) throw std::invalid_argument("cf_paclr_loss: empty input");
    if (real_labels.size() != real.rows || cf_labels.size() != cf.rows)
        throw std::invalid_argument("cf_paclr_loss: label count mismatch");
    std::vector<std::vector<uint32_t>> pos(real.rows);
    bool any = false;
    for (size_t i = 0; i < real.rows; ++i) {
        for (size_t k = 0; k < cf.rows; ++k)
            if (real_labels[i] == cf_labels[k]) {
                pos[i].push_back(static_cast<uint32_t>(k));
                any = true;
            }
    }
    if (!any) throw TrainError("cf_paclr_loss: no real representation shares a label with a counterfactual");
    PairLoss pl{real, cf, pos, tau, /*exclude_self=*/false};
    return pl.compute(dreal, dcf);
}

double micon_total_loss(const Matrix& reps, const std::vector<std::string>& labels, const Matrix& cf,
                        const std::vector<std::string>& cf_labels, double tau, double cf_weight,
                        Matrix* dreps, Matrix* dcf) {
    if (cf_weight < 0.0) throw std::invalid_argument("micon_total_loss: cf_weight must be >= 0");
    const double base = paclr_loss(reps, labels, tau, dreps);
    if (cf_weight == 0.0) return base;
    Matrix dr, dc;
    if (dreps) dr = Matrix(reps.rows, reps.cols);
    if (dcf) dc = Matrix(cf.rows, cf.cols);
    const double extra = cf_paclr_loss(reps, labels, cf, cf_labels, tau, dreps ? &dr : nullptr,
                                       dcf ? &dc : nullptr);
    if (dreps)
        for (size_t i = 0; i < dreps->size(); ++i) dreps->data[i] += cf_weight * dr.data[i];
    if (dcf)
        for (size_t i = 0; i < dcf->size(); ++i) dcf->data[i] += cf_weight * dc.data[i];
    return base + cf_weight * extra;
}

double simclr_loss(const Matrix& views, double tau, Matrix* dviews) {
    check_tau(tau);
    const size_t n = views.rows;
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("simclr_loss: expected an even number of view rows (2 per instance)");
    std::vector<std::vector<uint32_t>> pos(n);
    for (size_t i = 0; i < n; ++i) pos[i] = {static_cast<uint32_t>(i ^ 1)};
    PairLoss pl{views, views, pos, tau, /*exclude_self=*/true};
    return pl.compute(dviews, dviews);
}

double clip_loss(const Matrix& image_reps, const Matrix& compound_reps, double tau, Matrix* dimage,
                 Matrix* dcompound) {
    check_tau(tau);
    if (image_reps.rows != compound_reps.rows)
        throw std::invalid_argument("clip_loss: image/compound count mismatch");
    const size_t n = image_reps.rows;
    if (n == 0) throw std::invalid_argument("clip_loss: empty batch");
    std::vector<std::vector<uint32_t>> diag(n);
    for (size_t i = 0; i < n; ++i) diag[i] = {static_cast<uint32_t>(i)};
    PairLoss i2c{image_reps, compound_reps, diag, tau, /*exclude_self=*/false};
    PairLoss c2i{compound_reps, image_reps, diag, tau, /*exclude_self=*/false};
    // halve both directions: scale gradients by storing into temporaries
    Matrix di1, dc1, di2, dc2;
    Matrix *pdi1 = nullptr, *pdc1 = nullptr, *pdi2 = nullptr, *pdc2 = nullptr;
    if (dimage) {
        di1 = Matrix(n, image_reps.cols);
        di2 = Matrix(n, image_reps.cols);
        pdi1 = &di1;
        pdi2 = &di2;
    }
    if (dcompound) {
        dc1 = Matrix(n, compound_reps.cols);
        dc2 = Matrix(n, compound_reps.cols);
        pdc1 = &dc1;
        pdc2 = &dc2;
    }
    const double l1 = i2c.compute(pdi1, pdc1);
    const double l2 = c2i.compute(pdc2, pdi2);
    if (dimage)
        for (size_t i = 0; i < dimage->size(); ++i) dimage->data[i] += 0.5 * (di1.data[i] + di2.data[i]);
    if (dcompound)
        for (size_t i = 0; i < dcompound->size(); ++i)
            dcompound->data[i] += 0.5 * (dc1.data[i] + dc2.data[i]);
    return 0.5 * (l1 + l2);
}

}  // namespace micon::model
