#include <doctest.h>

#include "complement/complement.hpp"
#include "test_helpers.hpp"

using namespace tamp;
using namespace tamp::testing;

TEST_CASE("invert_mask basics") {
    Tensor ones({1, 4, 4}, 1.0f);
    const Tensor inv = invert_mask(ones);
    for (float v : inv.data) CHECK(v == 0.0f);

    Rng rng(1);
    const Tensor m = random_binary_mask(4, 4, rng);
    CHECK(bitwise_equal(invert_mask(invert_mask(m)), m));
}

TEST_CASE("invert_mask counts complement by elementwise oracle") {
    Tensor m({1, 4, 4}, 0.0f);
    for (int i = 0; i < 5; ++i) m.data[i * 3] = 1.0f;  // 5 ones
    const Tensor inv = invert_mask(m);
    int ones = 0;
    for (float v : inv.data)
        if (v == 1.0f) ++ones;
    CHECK(ones == 11);
    for (size_t i = 0; i < m.data.size(); ++i) CHECK(inv.data[i] == 1.0f - m.data[i]);
}

TEST_CASE("invert_mask rejects non-binary input") {
    Tensor m({1, 2, 2}, 0.5f);
    CHECK_THROWS_AS(invert_mask(m), std::invalid_argument);
}

TEST_CASE("mask_ratio counts missing pixels") {
    CHECK(mask_ratio(Tensor({1, 4, 4}, 1.0f)) == 0.0);
    CHECK(mask_ratio(Tensor({1, 4, 4}, 0.0f)) == 1.0);

    Tensor m({1, 4, 4}, 1.0f);
    m.data[0] = m.data[5] = m.data[9] = m.data[15] = 0.0f;
    CHECK(mask_ratio(m) == doctest::Approx(0.25));
}

TEST_CASE("mask_ratio of the inverse is the complement") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor m = random_binary_mask(6, 6, rng, rng.uniform());
        CHECK(mask_ratio(invert_mask(m)) == doctest::Approx(1.0 - mask_ratio(m)));
    }
}

TEST_CASE("naive_complement trivial masks") {
    Rng rng(3);
    const Tensor ones({1, 4, 4}, 1.0f);
    const Tensor zeros({1, 4, 4}, 0.0f);
    const Tensor gt1 = random_tensor({3, 4, 4}, rng);
    const Tensor gt2 = random_tensor({3, 4, 4}, rng);

    // intact target: result unchanged
    const Tensor d2 = apply_confidence(gt2, ones);
    auto r = naive_complement(gt1, ones, d2, ones);
    CHECK(bitwise_equal(r.complemented_1, gt1));

    // fully missing target, intact counterpart: full substitution
    const Tensor d1 = apply_confidence(gt1, zeros);
    r = naive_complement(d1, zeros, gt2, ones);
    CHECK(bitwise_equal(r.complemented_1, gt2));
}

TEST_CASE("naive_complement matches the per-pixel selection oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor m1 = random_binary_mask(2, 2, rng);
        const Tensor m2 = random_binary_mask(2, 2, rng);
        const Tensor gt1 = random_tensor({1, 2, 2}, rng);
        const Tensor gt2 = random_tensor({1, 2, 2}, rng);
        const Tensor d1 = apply_confidence(gt1, m1);
        const Tensor d2 = apply_confidence(gt2, m2);

        const auto r = naive_complement(d1, m1, d2, m2);
        for (int i = 0; i < 4; ++i) {
            // take own pixel if known, else counterpart's if known, else 0
            const float expect_1 = m1.data[i] == 1.0f   ? d1.data[i]
                                   : m2.data[i] == 1.0f ? d2.data[i]
                                                        : 0.0f;
            const float expect_2 = m2.data[i] == 1.0f   ? d2.data[i]
                                   : m1.data[i] == 1.0f ? d1.data[i]
                                                        : 0.0f;
            CHECK(r.complemented_1.data[i] == expect_1);
            CHECK(r.complemented_2.data[i] == expect_2);
        }
    }
}

TEST_CASE("naive_complement output pixels come from a closed set") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor m1 = random_binary_mask(4, 4, rng);
        const Tensor m2 = random_binary_mask(4, 4, rng);
        const Tensor d1 = apply_confidence(random_tensor({1, 4, 4}, rng), m1);
        const Tensor d2 = apply_confidence(random_tensor({1, 4, 4}, rng), m2);
        const auto r = naive_complement(d1, m1, d2, m2);
        for (int i = 0; i < 16; ++i) {
            const float v = r.complemented_1.data[i];
            CHECK((v == d1.data[i] || v == d2.data[i] || v == 0.0f));
        }
    }
}

TEST_CASE("naive_complement rejects shape mismatch") {
    const Tensor a({3, 4, 4});
    const Tensor b({3, 8, 8});
    const Tensor m4({1, 4, 4}, 1.0f);
    const Tensor m8({1, 8, 8}, 1.0f);
    CHECK_THROWS_AS(naive_complement(a, m4, b, m8), std::invalid_argument);
}

TEST_CASE("apply_confidence identity, annihilation, oracle") {
    Rng rng(6);
    const Tensor img = random_tensor({3, 4, 4}, rng);
    CHECK(bitwise_equal(apply_confidence(img, Tensor({1, 4, 4}, 1.0f)), img));

    const Tensor zeroed = apply_confidence(img, Tensor({1, 4, 4}, 0.0f));
    for (float v : zeroed.data) CHECK(v == 0.0f);

    const Tensor c = random_tensor({1, 4, 4}, rng, 0.0f, 1.0f);
    const Tensor out = apply_confidence(img, c);
    for (int ch = 0; ch < 3; ++ch)
        for (int i = 0; i < 16; ++i)
            CHECK(out.data[ch * 16 + i] == img.data[ch * 16 + i] * c.data[i]);
}

TEST_CASE("apply_confidence is a projection when the map is binary") {
    Rng rng(7);
    const Tensor img = random_tensor({3, 4, 4}, rng);
    const Tensor c = random_binary_mask(4, 4, rng);
    const Tensor once = apply_confidence(img, c);
    CHECK(bitwise_equal(apply_confidence(once, c), once));
}

TEST_CASE("mask_intersection is elementwise AND") {
    Rng rng(8);
    const Tensor m = random_binary_mask(4, 4, rng);
    CHECK(bitwise_equal(mask_intersection(m, Tensor({1, 4, 4}, 1.0f)), m));
    const Tensor z = mask_intersection(m, Tensor({1, 4, 4}, 0.0f));
    for (float v : z.data) CHECK(v == 0.0f);

    const Tensor m2 = random_binary_mask(4, 4, rng);
    const Tensor both = mask_intersection(m, m2);
    for (int i = 0; i < 16; ++i)
        CHECK(both.data[i] == ((m.data[i] == 1.0f && m2.data[i] == 1.0f) ? 1.0f : 0.0f));
}

TEST_CASE("scene pair validation catches missing zero fill") {
    Rng rng(9);
    ScenePair p;
    p.gt_1 = random_tensor({3, 4, 4}, rng);
    p.gt_2 = random_tensor({3, 4, 4}, rng);
    p.mask_1 = random_binary_mask(4, 4, rng);
    p.mask_2 = random_binary_mask(4, 4, rng);
    p.mask_1.data[0] = 0.0f;  // guarantee at least one hole
    p.damaged_1 = apply_confidence(p.gt_1, p.mask_1);
    p.damaged_2 = apply_confidence(p.gt_2, p.mask_2);
    CHECK_NOTHROW(validate_scene_pair(p));

    p.damaged_1 = p.gt_1;  // holes not zero-filled
    p.gt_1.data[0] = 0.5f;
    p.damaged_1.data[0] = 0.5f;
    CHECK_THROWS_AS(validate_scene_pair(p), std::invalid_argument);
}
