#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "micon/matrix.hpp"
#include "micon/rng.hpp"

namespace micon::math {

enum class LayerKind : uint8_t { affine, relu, leaky_relu, batch_norm };

struct LayerSpec {
    LayerKind kind;
    size_t in = 0;   // affine only
    size_t out = 0;  // affine only
};

enum class Mode { train, infer };

// View into one parameter tensor plus its gradient accumulator, used by the
// optimizer so a model is just a flat list of these.
struct ParamRef {
    std::string name;
    std::vector<double>* value;
    std::vector<double>* grad;
};

// Multilayer perceptron with explicit forward/backward.  Activations from the
// most recent train-mode forward are cached on the object; backward consumes
// them and accumulates parameter gradients (callers zero them per step).
class Mlp {
public:
    Mlp() = default;
    Mlp(std::string name, std::vector<LayerSpec> spec);

    // He-normal weights scaled by sqrt(2/fan_in), zero biases, unit BN gamma.
    void init(SplitRng& rng);

    // x is batch x in_dim.  Train mode caches per-layer inputs and BN stats
    // and updates BN running statistics; infer mode uses running stats and
    // caches nothing.
    Matrix forward(const Matrix& x, Mode mode);

    // dout is batch x out_dim from the most recent train-mode forward.
    // Returns dloss/dinput and adds parameter gradients into grads.
    Matrix backward(const Matrix& dout);

    void zero_grad();
    std::vector<ParamRef> params();

    size_t in_dim() const;
    size_t out_dim() const;
    const std::string& name() const { return name_; }
    const std::vector<LayerSpec>& spec() const { return spec_; }

    struct Layer {
        LayerSpec spec;
        // affine: W (out x in, row-major), b (out)
        // batch_norm: gamma, beta, running_mean, running_var (dim each)
        std::vector<double> w, b;
        std::vector<double> gw, gb;
        std::vector<double> running_mean, running_var;
        // caches from the last train-mode forward
        Matrix in_cache;           // affine / activations input
        std::vector<double> mu, var, inv_std;  // batch_norm batch stats
        Matrix xhat;               // batch_norm normalized input
    };

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    static constexpr double kBnEps = 1e-5;
    static constexpr double kBnMomentum = 0.1;
    static constexpr double kLeakySlope = 0.01;

private:
    std::string name_;
    std::vector<LayerSpec> spec_;
    std::vector<Layer> layers_;
    bool has_cache_ = false;
};

// Convenience: [affine in->h, act, affine h->h, act, ..., affine h->out],
// optionally batch_norm after every hidden affine (before the activation).
std::vector<LayerSpec> mlp_spec(size_t in, const std::vector<size_t>& hidden, size_t out,
                                LayerKind act = LayerKind::relu, bool batch_norm_hidden = false);

}  // namespace micon::math
