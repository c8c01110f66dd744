#include "micon/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <utility>
#include <vector>

#include "micon/errors.hpp"

namespace micon::model {

namespace {

constexpr char kMagic[4] = {'M', 'I', 'C', 'N'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

void put_u32(std::ostream& os, uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t get_u32(std::istream& is, const std::string& what) {
    uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw ArtifactError("checkpoint truncated while reading " + what);
    return v;
}

void put_str(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& is, const std::string& what) {
    const uint32_t n = get_u32(is, what);
    if (n > (1u << 20)) throw ArtifactError("checkpoint: unreasonable string length in " + what);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw ArtifactError("checkpoint truncated while reading " + what);
    return s;
}

struct NamedTensor {
    std::string name;
    uint32_t rows = 0, cols = 0;
    std::vector<double>* data = nullptr;
};

// Every persisted tensor of a model, in a fixed deterministic order.
std::vector<NamedTensor> tensor_table(ModelParams& mp) {
    std::vector<NamedTensor> out;
    auto add = [&out](const std::string& name, uint32_t rows, uint32_t cols,
                      std::vector<double>* vec) {
        out.push_back(NamedTensor{name, rows, cols, vec});
    };
    auto walk = [&add](auto& net) {
        size_t idx = 0;
        for (auto& layer : net.layers()) {
            const std::string base = net.name() + ".layer" + std::to_string(idx);
            if (layer.spec.kind == math::LayerKind::affine) {
                add(base + ".w", static_cast<uint32_t>(layer.spec.out),
                    static_cast<uint32_t>(layer.spec.in), &layer.w);
                add(base + ".b", 1, static_cast<uint32_t>(layer.spec.out), &layer.b);
            } else if (layer.spec.kind == math::LayerKind::batch_norm) {
                const auto d = static_cast<uint32_t>(layer.w.size());
                add(base + ".gamma", 1, d, &layer.w);
                add(base + ".beta", 1, d, &layer.b);
                add(base + ".running_mean", 1, d, &layer.running_mean);
                add(base + ".running_var", 1, d, &layer.running_var);
            }
            ++idx;
        }
    };
    walk(mp.image_encoder);
    walk(mp.projection);
    walk(mp.compound_encoder);
    walk(mp.fusion);
    walk(mp.clip_head);
    return out;
}

}  // namespace

void save_checkpoint(const ModelParams& mp, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");

    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ArtifactError("cannot open checkpoint for writing: " + tmp.string());
        os.write(kMagic, 4);
        put_u32(os, kVersion);

        auto kv = mp.hp.to_map();
        kv["feature_dim"] = std::to_string(mp.feature_dim);
        put_u32(os, static_cast<uint32_t>(kv.size()));
        for (const auto& [k, v] : kv) {
            put_str(os, k);
            put_str(os, v);
        }

        auto tensors = tensor_table(const_cast<ModelParams&>(mp));
        put_u32(os, static_cast<uint32_t>(tensors.size()));
        for (const auto& t : tensors) {
            put_str(os, t.name);
            put_u32(os, t.rows);
            put_u32(os, t.cols);
            const size_t n = static_cast<size_t>(t.rows) * t.cols;
            if (t.data->size() != n)
                throw ArtifactError("checkpoint: tensor size mismatch for " + t.name);
            std::vector<float> buf(n);
            for (size_t i = 0; i < n; ++i) buf[i] = static_cast<float>((*t.data)[i]);
            os.write(reinterpret_cast<const char*>(buf.data()),
                     static_cast<std::streamsize>(n * sizeof(float)));
        }
        if (!os) throw ArtifactError("checkpoint write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw ArtifactError("checkpoint rename failed: " + ec.message());
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("checkpoint not found: " + path);

    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw ArtifactError("not a model checkpoint (bad magic): " + path);
    const uint32_t version = get_u32(is, "version");
    if (version != kVersion)
        throw ArtifactError("unsupported checkpoint version " + std::to_string(version));

    const uint32_t n_kv = get_u32(is, "hyperparameter count");
    std::map<std::string, std::string> kv;
    for (uint32_t i = 0; i < n_kv; ++i) {
        std::string k = get_str(is, "hyperparameter key");
        kv[k] = get_str(is, "hyperparameter value");
    }
    auto fit = kv.find("feature_dim");
    if (fit == kv.end()) throw ArtifactError("checkpoint missing feature_dim");
    const size_t feature_dim = std::stoul(fit->second);
    kv.erase(fit);

    HyperParams hp = HyperParams::from_map(kv);
    ModelParams mp = ModelParams::build(feature_dim, hp);

    std::map<std::string, NamedTensor> want;
    for (auto& t : tensor_table(mp)) want[t.name] = t;

    const uint32_t n_tensors = get_u32(is, "tensor count");
    if (n_tensors != want.size())
        throw ArtifactError("checkpoint tensor count mismatch: file has " +
                            std::to_string(n_tensors) + ", model expects " +
                            std::to_string(want.size()));
    for (uint32_t i = 0; i < n_tensors; ++i) {
        const std::string name = get_str(is, "tensor name");
        const uint32_t rows = get_u32(is, name + " rows");
        const uint32_t cols = get_u32(is, name + " cols");
        auto it = want.find(name);
        if (it == want.end()) throw ArtifactError("checkpoint has unknown tensor " + name);
        if (rows != it->second.rows || cols != it->second.cols)
            throw ArtifactError("checkpoint shape mismatch for " + name);
        const size_t n = static_cast<size_t>(rows) * cols;
        std::vector<float> buf(n);
        is.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!is) throw ArtifactError("checkpoint truncated while reading tensor " + name);
        auto& dst = *it->second.data;
        for (size_t j = 0; j < n; ++j) dst[j] = static_cast<double>(buf[j]);
        want.erase(it);
    }
    return mp;
}

}  // namespace micon::model
