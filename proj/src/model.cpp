#include "micon/model.hpp"

#include <cmath>

#include "micon/errors.hpp"

namespace micon::model {

using math::LayerKind;
using math::Matrix;
using math::Mlp;
using math::mlp_spec;

Method method_from_string(const std::string& s) {
    if (s == "micon") return Method::micon;
    if (s == "paclr_only") return Method::paclr_only;
    if (s == "simclr") return Method::simclr;
    if (s == "clip") return Method::clip;
    throw ConfigError("train.method must be one of micon|paclr_only|simclr|clip, got '" + s + "'");
}

std::string method_to_string(Method m) {
    switch (m) {
        case Method::micon: return "micon";
        case Method::paclr_only: return "paclr_only";
        case Method::simclr: return "simclr";
        case Method::clip: return "clip";
    }
    return "?";
}

uint32_t HyperParams::controls_per_batch() const {
    return static_cast<uint32_t>(std::floor(control_fraction * batch_size + 0.5));
}

uint32_t HyperParams::pairs_per_batch() const {
    const uint32_t c = controls_per_batch();
    return (batch_size - c) / 2;
}

void HyperParams::validate() const {
    if (tau <= 0.0) throw ConfigError("train.tau must be > 0");
    if (batch_size < 4) throw ConfigError("train.batch_size must be >= 4");
    if (control_fraction <= 0.0 || control_fraction >= 1.0)
        throw ConfigError("train.control_fraction must be in (0,1)");
    const uint32_t c = controls_per_batch();
    if (c < 1 || c >= batch_size) throw ConfigError("train.control_fraction leaves no room for pairs");
    if ((batch_size - c) % 2 != 0)
        throw ConfigError("train.batch_size minus controls must be even (N = 2T + C)");
    if (proj_dim == 0) throw ConfigError("train.proj_dim must be > 0");
    if (lr < 0.0) throw ConfigError("train.lr must be >= 0");
    if (clip_norm <= 0.0) throw ConfigError("train.clip_norm must be > 0");
    if (cf_weight < 0.0) throw ConfigError("train.cf_weight must be >= 0");
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
}

namespace {

std::string join_dims(const std::vector<size_t>& dims) {
    std::string out;
    for (size_t i = 0; i < dims.size(); ++i) out += (i ? "," : "") + std::to_string(dims[i]);
    return out;
}

std::vector<size_t> parse_dims(const std::string& s) {
    std::vector<size_t> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoul(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

std::map<std::string, std::string> HyperParams::to_map() const {
    std::map<std::string, std::string> kv;
    char buf[40];
    auto put_f = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        kv[k] = buf;
    };
    put_f("tau", tau);
    kv["batch_size"] = std::to_string(batch_size);
    put_f("control_fraction", control_fraction);
    kv["epochs"] = std::to_string(epochs);
    kv["fp_bits"] = std::to_string(fp_bits);
    kv["image_embed"] = std::to_string(image_embed);
    kv["image_hidden"] = join_dims(image_hidden);
    kv["compound_hidden"] = join_dims(compound_hidden);
    kv["fusion_hidden"] = join_dims(fusion_hidden);
    kv["proj_hidden"] = join_dims(proj_hidden);
    kv["proj_dim"] = std::to_string(proj_dim);
    put_f("lr", lr);
    put_f("weight_decay", weight_decay);
    kv["warmup_steps"] = std::to_string(warmup_steps);
    put_f("clip_norm", clip_norm);
    kv["checkpoint_every"] = std::to_string(checkpoint_every);
    put_f("cf_weight", cf_weight);
    kv["seed"] = std::to_string(seed);
    return kv;
}

HyperParams HyperParams::from_map(const std::map<std::string, std::string>& kv) {
    HyperParams hp;
    auto get = [&](const char* k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("tau")) hp.tau = std::stod(*v);
    if (auto* v = get("batch_size")) hp.batch_size = std::stoul(*v);
    if (auto* v = get("control_fraction")) hp.control_fraction = std::stod(*v);
    if (auto* v = get("epochs")) hp.epochs = std::stoul(*v);
    if (auto* v = get("fp_bits")) hp.fp_bits = std::stoul(*v);
    if (auto* v = get("image_embed")) hp.image_embed = std::stoul(*v);
    if (auto* v = get("image_hidden")) hp.image_hidden = parse_dims(*v);
    if (auto* v = get("compound_hidden")) hp.compound_hidden = parse_dims(*v);
    if (auto* v = get("fusion_hidden")) hp.fusion_hidden = parse_dims(*v);
    if (auto* v = get("proj_hidden")) hp.proj_hidden = parse_dims(*v);
    if (auto* v = get("proj_dim")) hp.proj_dim = std::stoul(*v);
    if (auto* v = get("lr")) hp.lr = std::stod(*v);
    if (auto* v = get("weight_decay")) hp.weight_decay = std::stod(*v);
    if (auto* v = get("warmup_steps")) hp.warmup_steps = std::stoul(*v);
    if (auto* v = get("clip_norm")) hp.clip_norm = std::stod(*v);
    if (auto* v = get("checkpoint_every")) hp.checkpoint_every = std::stoul(*v);
    if (auto* v = get("cf_weight")) hp.cf_weight = std::stod(*v);
    if (auto* v = get("seed")) hp.seed = std::stoull(*v);
    return hp;
}

ModelParams ModelParams::build(size_t feature_dim, const HyperParams& hp) {
    hp.validate();
    ModelParams mp;
    mp.feature_dim = feature_dim;
    mp.hp = hp;
    mp.image_encoder =
        Mlp("image_encoder", mlp_spec(feature_dim, hp.image_hidden, hp.image_embed, LayerKind::relu, true));
    mp.projection =
        Mlp("projection", mlp_spec(hp.image_embed, hp.proj_hidden, hp.proj_dim, LayerKind::leaky_relu, false));
    const size_t comp_out = hp.compound_hidden.empty() ? hp.fp_bits : hp.compound_hidden.back();
    std::vector<size_t> comp_hidden = hp.compound_hidden;
    if (!comp_hidden.empty()) comp_hidden.pop_back();
    mp.compound_encoder =
        Mlp("compound_encoder", mlp_spec(hp.fp_bits, comp_hidden, comp_out, LayerKind::relu, true));
    mp.fusion = Mlp("fusion", mlp_spec(hp.proj_dim + comp_out, hp.fusion_hidden, hp.proj_dim,
                                       LayerKind::leaky_relu, false));
    mp.clip_head = Mlp("clip_head", {{LayerKind::affine, comp_out, hp.proj_dim}});

    math::SplitRng root(hp.seed);
    math::SplitRng init = root.split("init");
    for (auto* net : {&mp.image_encoder, &mp.projection, &mp.compound_encoder, &mp.fusion, &mp.clip_head}) {
        math::SplitRng nrng = init.split(net->name());
        net->init(nrng);
    }
    return mp;
}

std::vector<math::ParamRef> ModelParams::params_for(Method m) {
    std::vector<math::ParamRef> out;
    auto add = [&](Mlp& net) {
        auto ps = net.params();
        out.insert(out.end(), ps.begin(), ps.end());
    };
    add(image_encoder);
    add(projection);
    switch (m) {
        case Method::micon:
        case Method::paclr_only:
            add(compound_encoder);
            add(fusion);
            break;
        case Method::simclr:
            break;
        case Method::clip:
            add(compound_encoder);
            add(clip_head);
            break;
    }
    return out;
}

std::vector<math::ParamRef> ModelParams::all_params() {
    std::vector<math::ParamRef> out;
    for (auto* net : {&image_encoder, &projection, &compound_encoder, &fusion, &clip_head}) {
        auto ps = net->params();
        out.insert(out.end(), ps.begin(), ps.end());
    }
    return out;
}

void ModelParams::zero_grad() {
    for (auto* net : {&image_encoder, &projection, &compound_encoder, &fusion, &clip_head})
        net->zero_grad();
}

Matrix ModelParams::encode_and_project(const Matrix& fovs, math::Mode mode) {
    return projection.forward(image_encoder.forward(fovs, mode), mode);
}

Matrix ModelParams::encode_compound(const Matrix& fps, math::Mode mode) {
    return compound_encoder.forward(fps, mode);
}

Matrix ModelParams::fuse_counterfactual(const Matrix& control_reps, const Matrix& comp_emb,
                                        math::Mode mode) {
    if (control_reps.rows != comp_emb.rows)
        throw std::invalid_argument("fuse_counterfactual: row count mismatch");
    Matrix cat(control_reps.rows, control_reps.cols + comp_emb.cols);
    for (size_t i = 0; i < cat.rows; ++i) {
        for (size_t j = 0; j < control_reps.cols; ++j) cat(i, j) = control_reps(i, j);
        for (size_t j = 0; j < comp_emb.cols; ++j) cat(i, control_reps.cols + j) = comp_emb(i, j);
    }
    return fusion.forward(cat, mode);
}

Matrix fingerprint_rows(const data::Dataset& ds, const std::vector<std::string>& compound_ids) {
    if (compound_ids.empty()) throw std::invalid_argument("fingerprint_rows: empty id list");
    const uint32_t bits = ds.compounds.begin()->second.fp.n_bits;
    Matrix out(compound_ids.size(), bits);
    for (size_t r = 0; r < compound_ids.size(); ++r) {
        auto it = ds.compounds.find(compound_ids[r]);
        if (it == ds.compounds.end())
            throw ArtifactError("unknown compound in batch: " + compound_ids[r]);
        for (uint32_t b : it->second.fp.on_bits()) out(r, b) = 1.0;
    }
    return out;
}

}  // namespace micon::model
