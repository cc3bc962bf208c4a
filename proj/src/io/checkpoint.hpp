#pragma once

#include <json.hpp>

#include <map>
#include <string>

#include "core/nn.hpp"

namespace tamp {

// Versioned weight container: magic + JSON header (meta, shapes, offsets)
// followed by a raw little-endian float32 blob. Stable across releases; the
// version gate rejects anything newer than the reader.
struct Checkpoint {
    nlohmann::json meta;  // config snapshot, epoch, val_psnr, rng_state, ...
    std::map<std::string, Tensor> tensors;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    void put_params(const nn::ParamRegistry& reg, const std::string& ns = "");
    // strict by-name, by-shape assignment
    void get_params(nn::ParamRegistry& reg, const std::string& ns = "") const;
};

}  // namespace tamp
