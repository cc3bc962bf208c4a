#include "io/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

using nlohmann::json;

namespace tamp {

namespace {
constexpr char kMagic[8] = {'T', 'A', 'M', 'P', 'C', 'K', 'P', '1'};
constexpr int kVersion = 1;
}  // namespace

void Checkpoint::save(const std::string& path) const {
    json header;
    header["version"] = kVersion;
    header["meta"] = meta;
    json index = json::array();
    uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        index.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += static_cast<uint64_t>(t.data.size()) * sizeof(float);
    }
    header["tensors"] = std::move(index);
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: failed to open for write: " + path);
    f.write(kMagic, sizeof(kMagic));
    const uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : tensors)
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!f) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: failed to open: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    f.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!f) throw std::runtime_error("checkpoint: truncated header in " + path);
    const json header = json::parse(hs);
    if (header.at("version").get<int>() > kVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);

    Checkpoint ckpt;
    ckpt.meta = header.at("meta");
    for (const auto& e : header.at("tensors")) {
        Tensor t(e.at("shape").get<std::vector<int>>());
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!f) throw std::runtime_error("checkpoint: truncated data in " + path);
        ckpt.tensors.emplace(e.at("name").get<std::string>(), std::move(t));
    }
    return ckpt;
}

void Checkpoint::put_params(const nn::ParamRegistry& reg, const std::string& ns) {
    for (const auto& [name, p] : reg.items()) tensors[ns + name] = p->value();
}

void Checkpoint::get_params(nn::ParamRegistry& reg, const std::string& ns) const {
    for (auto& [name, p] : reg.items()) {
        const auto it = tensors.find(ns + name);
        if (it == tensors.end())
            throw std::runtime_error("checkpoint: missing tensor " + ns + name);
        if (it->second.shape != p->value().shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + ns + name);
        p->value() = it->second;
    }
}

}  // namespace tamp
