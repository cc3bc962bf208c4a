#include "train/features.hpp"

#include <stdexcept>

namespace tamp {

RandomPyramidExtractor::RandomPyramidExtractor(uint64_t seed, int levels, int base_channels) {
    if (levels < 1) throw std::invalid_argument("RandomPyramidExtractor: levels must be >= 1");
    Rng rng(seed);
    int in_ch = 3;
    int out_ch = base_channels;
    for (int l = 0; l < levels; ++l) {
        convs_.emplace_back(in_ch, out_ch, 3, 2, 1, rng, /*trainable=*/false);
        in_ch = out_ch;
        out_ch *= 2;
    }
}

std::vector<Var> RandomPyramidExtractor::features(const Var& img) const {
    if (img.value().rank() != 3 || img.value().channels() != 3)
        throw std::invalid_argument("FeatureExtractor: expected (3,H,W) input, got " +
                                    img.value().shape_str());
    std::vector<Var> out;
    Var x = img;
    for (const auto& conv : convs_) {
        if (x.value().height() < 2 || x.value().width() < 2)
            throw std::invalid_argument("FeatureExtractor: input too small for pyramid depth");
        x = leaky_relu(conv(x), 0.2f);
        out.push_back(x);
    }
    return out;
}

std::shared_ptr<FeatureExtractor> make_default_extractor(uint64_t seed) {
    return std::make_shared<RandomPyramidExtractor>(seed);
}

}  // namespace tamp
