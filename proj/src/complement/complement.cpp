#include "complement/complement.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tamp {

void validate_image(const Tensor& img, const char* what) {
    check_rank3(img, what);
    if (!img.all_finite())
        throw std::invalid_argument(std::string(what) + ": non-finite values");
    if (img.min_value() < -1.0f || img.max_value() > 1.0f)
        throw std::invalid_argument(std::string(what) + ": values outside [-1,1]");
}

void validate_mask(const Tensor& m, const char* what) {
    check_rank3(m, what);
    if (m.channels() != 1)
        throw std::invalid_argument(std::string(what) + ": mask must be single-channel, got " +
                                    m.shape_str());
    if (m.data.empty()) throw std::invalid_argument(std::string(what) + ": empty mask");
    for (float v : m.data)
        if (v != 0.0f && v != 1.0f)
            throw std::invalid_argument(std::string(what) + ": mask values must be exactly 0 or 1");
}

void validate_scene_pair(const ScenePair& p) {
    validate_image(p.gt_1, "ScenePair.gt_1");
    validate_image(p.gt_2, "ScenePair.gt_2");
    validate_image(p.damaged_1, "ScenePair.damaged_1");
    validate_image(p.damaged_2, "ScenePair.damaged_2");
    validate_mask(p.mask_1, "ScenePair.mask_1");
    validate_mask(p.mask_2, "ScenePair.mask_2");
    check_same_shape(p.gt_1, p.gt_2, "ScenePair images");
    check_same_shape(p.gt_1, p.damaged_1, "ScenePair images");
    check_same_shape(p.gt_1, p.damaged_2, "ScenePair images");
    if (p.mask_1.height() != p.gt_1.height() || p.mask_1.width() != p.gt_1.width() ||
        !p.mask_1.same_shape(p.mask_2))
        throw std::invalid_argument("ScenePair: mask/image spatial mismatch");
    // damaged_i must equal gt_i with holes zero-filled
    const int hw = p.gt_1.height() * p.gt_1.width();
    for (int c = 0; c < p.gt_1.channels(); ++c)
        for (int i = 0; i < hw; ++i) {
            const float d1 = p.damaged_1.data[c * hw + i];
            const float d2 = p.damaged_2.data[c * hw + i];
            if (d1 != p.gt_1.data[c * hw + i] * p.mask_1.data[i] ||
                d2 != p.gt_2.data[c * hw + i] * p.mask_2.data[i])
                throw std::invalid_argument("ScenePair: damaged image inconsistent with mask");
        }
}

Tensor invert_mask(const Tensor& m) {
    validate_mask(m, "invert_mask");
    Tensor out = m;
    for (auto& v : out.data) v = 1.0f - v;
    return out;
}

double mask_ratio(const Tensor& m) {
    validate_mask(m, "mask_ratio");
    size_t zeros = 0;
    for (float v : m.data)
        if (v == 0.0f) ++zeros;
    return static_cast<double>(zeros) / static_cast<double>(m.data.size());
}

NaiveComplementResult naive_complement(const Tensor& damaged_1, const Tensor& mask_1,
                                       const Tensor& damaged_2, const Tensor& mask_2) {
    check_rank3(damaged_1, "naive_complement");
    check_same_shape(damaged_1, damaged_2, "naive_complement");
    validate_mask(mask_1, "naive_complement.mask_1");
    validate_mask(mask_2, "naive_complement.mask_2");
    check_same_shape(mask_1, mask_2, "naive_complement masks");
    if (mask_1.height() != damaged_1.height() || mask_1.width() != damaged_1.width())
        throw std::invalid_argument("naive_complement: mask/image spatial mismatch");

    NaiveComplementResult r{damaged_1, damaged_2};
    const int ch = damaged_1.channels();
    const int hw = damaged_1.height() * damaged_1.width();
    for (int c = 0; c < ch; ++c)
        for (int i = 0; i < hw; ++i) {
            r.complemented_1.data[c * hw + i] += damaged_2.data[c * hw + i] * (1.0f - mask_1.data[i]);
            r.complemented_2.data[c * hw + i] += damaged_1.data[c * hw + i] * (1.0f - mask_2.data[i]);
        }
    return r;
}

Tensor apply_confidence(const Tensor& img, const Tensor& confidence) {
    check_rank3(img, "apply_confidence");
    check_rank3(confidence, "apply_confidence");
    if (confidence.height() != img.height() || confidence.width() != img.width() ||
        (confidence.channels() != 1 && confidence.channels() != img.channels()))
        throw std::invalid_argument("apply_confidence: shape mismatch " + img.shape_str() + " vs " +
                                    confidence.shape_str());
    Tensor out = img;
    const int hw = img.height() * img.width();
    if (confidence.channels() == 1) {
        for (int c = 0; c < img.channels(); ++c)
            for (int i = 0; i < hw; ++i) out.data[c * hw + i] *= confidence.data[i];
    } else {
        for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= confidence.data[i];
    }
    return out;
}

Tensor mask_intersection(const Tensor& m1, const Tensor& m2) {
    validate_mask(m1, "mask_intersection");
    validate_mask(m2, "mask_intersection");
    check_same_shape(m1, m2, "mask_intersection");
    Tensor out = m1;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= m2.data[i];
    return out;
}

}  // namespace tamp
