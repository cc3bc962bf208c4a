#include <doctest.h>

#include "metrics/metrics.hpp"
#include "test_helpers.hpp"

using namespace tamp;
using namespace tamp::testing;

TEST_CASE("psnr: identical images hit the cap") {
    Rng rng(1);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    CHECK(psnr(a, a) == 100.0);
}

TEST_CASE("psnr: 0.5 constant offset on range 2 is 12.0412 dB") {
    const Tensor a({3, 8, 8}, 0.1f);
    const Tensor b({3, 8, 8}, 0.6f);
    // 10*log10(2^2 / 0.25) = 10*log10(16)
    CHECK(std::fabs(psnr(a, b) - 12.0412) < 1e-4);
}

TEST_CASE("psnr decreases monotonically with noise amplitude") {
    Rng rng(2);
    const Tensor base = random_tensor({3, 8, 8}, rng, -0.5f, 0.5f);
    Tensor noise({3, 8, 8});
    for (auto& v : noise.data) v = rng.normalf();

    double prev = 1e9;
    for (float amp : {0.01f, 0.05f, 0.1f, 0.2f, 0.4f}) {
        Tensor noisy = base;
        for (size_t i = 0; i < noisy.data.size(); ++i) noisy.data[i] += amp * noise.data[i];
        const double p = psnr(noisy, base);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("psnr is shift invariant") {
    Rng rng(3);
    const Tensor a = random_tensor({3, 8, 8}, rng, -0.4f, 0.4f);
    const Tensor b = random_tensor({3, 8, 8}, rng, -0.4f, 0.4f);
    Tensor a2 = a, b2 = b;
    for (auto& v : a2.data) v += 0.3f;
    for (auto& v : b2.data) v += 0.3f;
    // float32 storage rounds the shifted values, so compare at float precision
    CHECK(psnr(a, b) == doctest::Approx(psnr(a2, b2)).epsilon(1e-4));
}

TEST_CASE("ssim: identical images score 1") {
    Rng rng(4);
    const Tensor a = random_tensor({3, 16, 16}, rng);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim: opposite constants match the closed-form constant-patch value") {
    const Tensor black({1, 16, 16}, -1.0f);  // maps to 0
    const Tensor white({1, 16, 16}, 1.0f);   // maps to 1
    // constant patches: variance terms vanish, luminance term = c1/(1+c1)
    const double c1 = 0.01 * 0.01;
    const double expect = c1 / (1.0 + c1);
    CHECK(ssim(black, white) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("ssim is symmetric and rejects tiny images") {
    Rng rng(5);
    const Tensor a = random_tensor({3, 16, 16}, rng);
    const Tensor b = random_tensor({3, 16, 16}, rng);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    const Tensor tiny({1, 4, 4}, 0.0f);
    CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
}

TEST_CASE("l1_metric matches the elementwise oracle") {
    Rng rng(6);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    CHECK(l1_metric(a, a) == 0.0);
    Tensor b = a;
    for (auto& v : b.data) v += 0.5f;
    CHECK(l1_metric(a, b) == doctest::Approx(0.5).epsilon(1e-6));

    const Tensor c = random_tensor({3, 8, 8}, rng);
    double expect = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) expect += std::fabs(a.data[i] - c.data[i]);
    CHECK(l1_metric(a, c) == doctest::Approx(expect / a.data.size()).epsilon(1e-5));
}

TEST_CASE("perceptual_distance basics") {
    Rng rng(7);
    const RandomPyramidExtractor extractor(5);
    const Tensor a = random_tensor({3, 16, 16}, rng);
    const Tensor b = random_tensor({3, 16, 16}, rng);
    CHECK(perceptual_distance(a, a, extractor) == 0.0);
    CHECK(perceptual_distance(a, b, extractor) >= 0.0);
    CHECK(perceptual_distance(a, b, extractor) ==
          doctest::Approx(perceptual_distance(b, a, extractor)).epsilon(1e-9));
}

TEST_CASE("metric means are permutation invariant") {
    Rng rng(8);
    std::vector<Tensor> preds, gts;
    for (int i = 0; i < 5; ++i) {
        preds.push_back(random_tensor({3, 16, 16}, rng));
        gts.push_back(random_tensor({3, 16, 16}, rng));
    }
    double forward_sum = 0.0, reverse_sum = 0.0;
    for (int i = 0; i < 5; ++i) forward_sum += psnr(preds[i], gts[i]);
    for (int i = 4; i >= 0; --i) reverse_sum += psnr(preds[i], gts[i]);
    CHECK(forward_sum == doctest::Approx(reverse_sum).epsilon(1e-12));
}
