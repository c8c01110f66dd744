#include "micon/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "micon/errors.hpp"

namespace micon::math {

Mlp::Mlp(std::string name, std::vector<LayerSpec> spec) : name_(std::move(name)), spec_(std::move(spec)) {
    size_t prev = 0;
    bool have_prev = false;
    for (size_t li = 0; li < spec_.size(); ++li) {
        const auto& s = spec_[li];
        Layer layer;
        layer.spec = s;
        if (s.kind == LayerKind::affine) {
            if (s.in == 0 || s.out == 0)
                throw std::invalid_argument(name_ + ": affine layer " + std::to_string(li) + " needs in/out dims");
            if (have_prev && prev != s.in)
                throw std::invalid_argument(name_ + ": layer " + std::to_string(li) + " in_dim " +
                                            std::to_string(s.in) + " != previous out_dim " + std::to_string(prev));
            layer.w.assign(s.out * s.in, 0.0);
            layer.b.assign(s.out, 0.0);
            layer.gw.assign(s.out * s.in, 0.0);
            layer.gb.assign(s.out, 0.0);
            prev = s.out;
            have_prev = true;
        } else if (s.kind == LayerKind::batch_norm) {
            if (!have_prev)
                throw std::invalid_argument(name_ + ": batch_norm layer " + std::to_string(li) +
                                            " needs a preceding affine layer");
            layer.w.assign(prev, 1.0);   // gamma
            layer.b.assign(prev, 0.0);   // beta
            layer.gw.assign(prev, 0.0);
            layer.gb.assign(prev, 0.0);
            layer.running_mean.assign(prev, 0.0);
            layer.running_var.assign(prev, 1.0);
        }
        layers_.push_back(std::move(layer));
    }
    if (!have_prev) throw std::invalid_argument(name_ + ": spec has no affine layer");
}

void Mlp::init(SplitRng& rng) {
    for (size_t li = 0; li < layers_.size(); ++li) {
        auto& l = layers_[li];
        if (l.spec.kind != LayerKind::affine) continue;
        SplitRng lr = rng.split("layer" + std::to_string(li));
        const double sd = std::sqrt(2.0 / static_cast<double>(l.spec.in));
        for (auto& w : l.w) w = sd * lr.gaussian();
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

size_t Mlp::in_dim() const {
    for (const auto& s : spec_)
        if (s.kind == LayerKind::affine) return s.in;
    return 0;
}

size_t Mlp::out_dim() const {
    size_t d = 0;
    for (const auto& s : spec_)
        if (s.kind == LayerKind::affine) d = s.out;
    return d;
}

Matrix Mlp::forward(const Matrix& x, Mode mode) {
    Matrix cur = x;
    for (size_t li = 0; li < layers_.size(); ++li) {
        auto& l = layers_[li];
        switch (l.spec.kind) {
            case LayerKind::affine: {
                if (cur.cols != l.spec.in)
                    throw std::invalid_argument(name_ + ": layer " + std::to_string(li) + " expects " +
                                                std::to_string(l.spec.in) + " inputs, got " +
                                                std::to_string(cur.cols));
                if (mode == Mode::train) l.in_cache = cur;
                Matrix out(cur.rows, l.spec.out);
                for (size_t i = 0; i < cur.rows; ++i) {
                    const double* xi = cur.data.data() + i * cur.cols;
                    double* oi = out.data.data() + i * out.cols;
                    for (size_t o = 0; o < l.spec.out; ++o) {
                        const double* wo = l.w.data() + o * l.spec.in;
                        double s = l.b[o];
                        for (size_t k = 0; k < l.spec.in; ++k) s += wo[k] * xi[k];
                        oi[o] = s;
                    }
                }
                cur = std::move(out);
                break;
            }
            case LayerKind::relu: {
                if (mode == Mode::train) l.in_cache = cur;
                for (auto& v : cur.data) v = v > 0.0 ? v : 0.0;
                break;
            }
            case LayerKind::leaky_relu: {
                if (mode == Mode::train) l.in_cache = cur;
                for (auto& v : cur.data) v = v > 0.0 ? v : kLeakySlope * v;
                break;
            }
            case LayerKind::batch_norm: {
                const size_t d = l.w.size();
                if (cur.cols != d)
                    throw std::invalid_argument(name_ + ": layer " + std::to_string(li) + " expects " +
                                                std::to_string(d) + " inputs, got " + std::to_string(cur.cols));
                const size_t n = cur.rows;
                if (mode == Mode::train) {
                    if (n < 2)
                        throw TrainError(name_ + ": batch_norm layer " + std::to_string(li) +
                                         " needs batch size >= 2 in train mode");
                    l.mu.assign(d, 0.0);
                    l.var.assign(d, 0.0);
                    l.inv_std.assign(d, 0.0);
                    for (size_t i = 0; i < n; ++i)
                        for (size_t j = 0; j < d; ++j) l.mu[j] += cur(i, j);
                    for (size_t j = 0; j < d; ++j) l.mu[j] /= static_cast<double>(n);
                    for (size_t i = 0; i < n; ++i)
                        for (size_t j = 0; j < d; ++j) {
                            const double c = cur(i, j) - l.mu[j];
                            l.var[j] += c * c;
                        }
                    for (size_t j = 0; j < d; ++j) {
                        const double var_pop = l.var[j] / static_cast<double>(n);
                        const double var_unbiased = l.var[j] / static_cast<double>(n - 1);
                        l.var[j] = var_pop;
                        l.inv_std[j] = 1.0 / std::sqrt(var_pop + kBnEps);
                        l.running_mean[j] = (1.0 - kBnMomentum) * l.running_mean[j] + kBnMomentum * l.mu[j];
                        l.running_var[j] = (1.0 - kBnMomentum) * l.running_var[j] + kBnMomentum * var_unbiased;
                    }
                    l.xhat = Matrix(n, d);
                    for (size_t i = 0; i < n; ++i)
                        for (size_t j = 0; j < d; ++j) {
                            const double xh = (cur(i, j) - l.mu[j]) * l.inv_std[j];
                            l.xhat(i, j) = xh;
                            cur(i, j) = l.w[j] * xh + l.b[j];
                        }
                } else {
                    for (size_t i = 0; i < n; ++i)
                        for (size_t j = 0; j < d; ++j) {
                            const double xh =
                                (cur(i, j) - l.running_mean[j]) / std::sqrt(l.running_var[j] + kBnEps);
                            cur(i, j) = l.w[j] * xh + l.b[j];
                        }
                }
                break;
            }
        }
    }
    has_cache_ = (mode == Mode::train);
    return cur;
}

Matrix Mlp::backward(const Matrix& dout) {
    if (!has_cache_)
        throw std::logic_error(name_ + ": backward without a preceding train-mode forward");
    Matrix cur = dout;
    for (size_t li = layers_.size(); li-- > 0;) {
        auto& l = layers_[li];
        switch (l.spec.kind) {
            case LayerKind::affine: {
                if (cur.cols != l.spec.out)
                    throw std::invalid_argument(name_ + ": layer " + std::to_string(li) + " backward expects " +
                                                std::to_string(l.spec.out) + " grads, got " +
                                                std::to_string(cur.cols));
                const Matrix& x = l.in_cache;
                // gw += dout^T x ; gb += colsum(dout) ; dx = dout W
                for (size_t i = 0; i < cur.rows; ++i) {
                    const double* gi = cur.data.data() + i * cur.cols;
                    const double* xi = x.data.data() + i * x.cols;
                    for (size_t o = 0; o < l.spec.out; ++o) {
                        const double g = gi[o];
                        if (g == 0.0) continue;
                        double* gwo = l.gw.data() + o * l.spec.in;
                        for (size_t k = 0; k < l.spec.in; ++k) gwo[k] += g * xi[k];
                        l.gb[o] += g;
                    }
                }
                Matrix dx(cur.rows, l.spec.in);
                for (size_t i = 0; i < cur.rows; ++i) {
                    const double* gi = cur.data.data() + i * cur.cols;
                    double* di = dx.data.data() + i * dx.cols;
                    for (size_t o = 0; o < l.spec.out; ++o) {
                        const double g = gi[o];
                        if (g == 0.0) continue;
                        const double* wo = l.w.data() + o * l.spec.in;
                        for (size_t k = 0; k < l.spec.in; ++k) di[k] += g * wo[k];
                    }
                }
                cur = std::move(dx);
                break;
            }
            case LayerKind::relu: {
                for (size_t i = 0; i < cur.size(); ++i)
                    if (l.in_cache.data[i] <= 0.0) cur.data[i] = 0.0;
                break;
            }
            case LayerKind::leaky_relu: {
                for (size_t i = 0; i < cur.size(); ++i)
                    if (l.in_cache.data[i] <= 0.0) cur.data[i] *= kLeakySlope;
                break;
            }
            case LayerKind::batch_norm: {
                const size_t d = l.w.size();
                const size_t n = cur.rows;
                const double dn = static_cast<double>(n);
                std::vector<double> sum_dxhat(d, 0.0), sum_dxhat_xhat(d, 0.0);
                Matrix dxhat(n, d);
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < d; ++j) {
                        const double g = cur(i, j);
                        l.gw[j] += g * l.xhat(i, j);
                        l.gb[j] += g;
                        const double dxh = g * l.w[j];
                        dxhat(i, j) = dxh;
                        sum_dxhat[j] += dxh;
                        sum_dxhat_xhat[j] += dxh * l.xhat(i, j);
                    }
                for (size_t i = 0; i < n; ++i)
                    for (size_t j = 0; j < d; ++j)
                        cur(i, j) = l.inv_std[j] / dn *
                                    (dn * dxhat(i, j) - sum_dxhat[j] - l.xhat(i, j) * sum_dxhat_xhat[j]);
                break;
            }
        }
    }
    has_cache_ = false;
    return cur;
}

void Mlp::zero_grad() {
    for (auto& l : layers_) {
        std::fill(l.gw.begin(), l.gw.end(), 0.0);
        std::fill(l.gb.begin(), l.gb.end(), 0.0);
    }
}

std::vector<ParamRef> Mlp::params() {
    std::vector<ParamRef> out;
    for (size_t li = 0; li < layers_.size(); ++li) {
        auto& l = layers_[li];
        if (l.spec.kind == LayerKind::affine) {
            out.push_back({name_ + ".layer" + std::to_string(li) + ".w", &l.w, &l.gw});
            out.push_back({name_ + ".layer" + std::to_string(li) + ".b", &l.b, &l.gb});
        } else if (l.spec.kind == LayerKind::batch_norm) {
            out.push_back({name_ + ".layer" + std::to_string(li) + ".gamma", &l.w, &l.gw});
            out.push_back({name_ + ".layer" + std::to_string(li) + ".beta", &l.b, &l.gb});
        }
    }
    return out;
}

std::vector<LayerSpec> mlp_spec(size_t in, const std::vector<size_t>& hidden, size_t out, LayerKind act,
                                bool batch_norm_hidden) {
    std::vector<LayerSpec> spec;
    size_t prev = in;
    for (size_t h : hidden) {
        spec.push_back({LayerKind::affine, prev, h});
        if (batch_norm_hidden) spec.push_back({LayerKind::batch_norm});
        spec.push_back({act});
        prev = h;
    }
    spec.push_back({LayerKind::affine, prev, out});
    return spec;
}

}  // namespace micon::math
