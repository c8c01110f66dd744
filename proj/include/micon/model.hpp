#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "micon/dataset.hpp"
#include "micon/matrix.hpp"
#include "micon/mlp.hpp"

namespace micon::model {

enum class Method { micon, paclr_only, simclr, clip };

Method method_from_string(const std::string& s);
std::string method_to_string(Method m);

struct HyperParams {
    double tau = 0.1;
    uint32_t batch_size = 64;      // N = 2T + C
    double control_fraction = 0.5; // presets 1/2 and 1/8
    uint32_t epochs = 30;
    size_t fp_bits = 2048;
    size_t image_embed = 1000;
    std::vector<size_t> image_hidden = {512};
    std::vector<size_t> compound_hidden = {2048, 2048, 2048, 2048};
    std::vector<size_t> fusion_hidden = {512};
    std::vector<size_t> proj_hidden = {512};
    size_t proj_dim = 256;
    double lr = 1e-3;
    double weight_decay = 1e-2;
    uint32_t warmup_steps = 2000;
    double clip_norm = 1.0;
    uint32_t checkpoint_every = 2000;
    double cf_weight = 1.0;
    uint64_t seed = 1;

    uint32_t controls_per_batch() const;   // C = round(control_fraction * N)
    uint32_t pairs_per_batch() const;      // T = (N - C) / 2
    void validate() const;                 // throws ConfigError
    std::map<std::string, std::string> to_map() const;
    static HyperParams from_map(const std::map<std::string, std::string>& kv);
};

// All trainable blocks.  Every method uses the same initialization for the
// shared blocks so ablations differ only by the loss actually applied.
struct ModelParams {
    size_t feature_dim = 0;
    HyperParams hp;
    math::Mlp image_encoder;   // feature_dim -> image_embed (BN + ReLU hidden)
    math::Mlp projection;      // image_embed -> proj_dim (leaky-ReLU hidden)
    math::Mlp compound_encoder;// fp_bits -> 2048 (BN + ReLU hidden)
    math::Mlp fusion;          // proj_dim + 2048 -> proj_dim (leaky-ReLU hidden)
    math::Mlp clip_head;       // 2048 -> proj_dim, single affine

    static ModelParams build(size_t feature_dim, const HyperParams& hp);

    std::vector<math::ParamRef> params_for(Method m);
    std::vector<math::ParamRef> all_params();
    void zero_grad();

    // t = g(h_img(x)); rows in, rows out, no L2 normalization
    math::Matrix encode_and_project(const math::Matrix& fovs, math::Mode mode);
    math::Matrix encode_compound(const math::Matrix& fps, math::Mode mode);
    // t~ = F(concat(projected control rep, compound embedding))
    math::Matrix fuse_counterfactual(const math::Matrix& control_reps, const math::Matrix& comp_emb,
                                     math::Mode mode);
};

math::Matrix fingerprint_rows(const data::Dataset& ds, const std::vector<std::string>& compound_ids);

}  // namespace micon::model
