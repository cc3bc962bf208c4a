#include <doctest.h>

#include "train/losses.hpp"
#include "test_helpers.hpp"

using namespace tamp;
using namespace tamp::testing;

TEST_CASE("l1_loss basics and oracle") {
    Rng rng(1);
    const Tensor a = random_tensor({3, 4, 4}, rng);
    CHECK(l1_loss(Var(a), Var(a)).value().data[0] == 0.0f);

    Tensor b = a;
    for (auto& v : b.data) v += 0.5f;
    CHECK(l1_loss(Var(a), Var(b)).value().data[0] == doctest::Approx(0.5).epsilon(1e-6));

    const Tensor c = random_tensor({3, 4, 4}, rng);
    double expect = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) expect += std::fabs(a.data[i] - c.data[i]);
    expect /= a.data.size();
    CHECK(l1_loss(Var(a), Var(c)).value().data[0] == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("hinge adversarial pair degenerate and gradient cases") {
    Rng rng(2);
    const PatchDiscriminator disc(77);
    const Tensor img = random_tensor({3, 8, 8}, rng);

    // identical real/fake: critic emits one score map s for both, so
    // disc_loss = mean(relu(1-s)) + mean(relu(1+s)) and gen_loss = -mean(s)
    const auto losses = adversarial_losses(Var(img), Var(img), disc);
    const Tensor s = disc.score(Var(img)).value();
    double relu_lo = 0.0, relu_hi = 0.0, mean_s = 0.0;
    for (float v : s.data) {
        relu_lo += std::max(0.0f, 1.0f - v);
        relu_hi += std::max(0.0f, 1.0f + v);
        mean_s += v;
    }
    relu_lo /= s.data.size();
    relu_hi /= s.data.size();
    mean_s /= s.data.size();
    CHECK(losses.disc_loss.value().data[0] == doctest::Approx(relu_lo + relu_hi).epsilon(1e-5));
    CHECK(losses.gen_loss.value().data[0] == doctest::Approx(-mean_s).epsilon(1e-5));
    // scores inside (-1,1) sit at the 50/50 fixed point: relu(1-s)+relu(1+s) = 2
    if (s.max_value() < 1.0f && s.min_value() > -1.0f)
        CHECK(losses.disc_loss.value().data[0] == doctest::Approx(2.0).epsilon(1e-5));

    // generator loss moves the prediction: gradient is nonzero
    Var pred(img, true);
    backward(adversarial_losses(pred, Var(random_tensor({3, 8, 8}, rng)), disc).gen_loss);
    double gnorm = 0.0;
    for (float g : pred.grad().data) gnorm += static_cast<double>(g) * g;
    CHECK(gnorm > 0.0);
}

TEST_CASE("perceptual_loss identity, symmetry, oracle") {
    Rng rng(3);
    const RandomPyramidExtractor extractor(5);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    const Tensor b = random_tensor({3, 8, 8}, rng);

    CHECK(perceptual_loss(Var(a), Var(a), extractor).value().data[0] == 0.0f);
    CHECK(perceptual_loss(Var(a), Var(b), extractor).value().data[0] ==
          doctest::Approx(perceptual_loss(Var(b), Var(a), extractor).value().data[0]));

    // per-level oracle
    const auto fa = extractor.features(Var(a));
    const auto fb = extractor.features(Var(b));
    double expect = 0.0;
    for (size_t l = 0; l < fa.size(); ++l) {
        double level = 0.0;
        for (size_t i = 0; i < fa[l].value().data.size(); ++i)
            level += std::fabs(fa[l].value().data[i] - fb[l].value().data[i]);
        expect += level / fa[l].value().data.size();
    }
    CHECK(perceptual_loss(Var(a), Var(b), extractor).value().data[0] ==
          doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("style_loss identity, zero features, hand-computed gram") {
    Rng rng(4);
    const RandomPyramidExtractor extractor(5);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    CHECK(style_loss(Var(a), Var(a), extractor).value().data[0] == 0.0f);

    // zero feature maps produce a zero Gram matrix
    const Tensor z({2, 2, 2}, 0.0f);
    const Tensor gz = gram_matrix(Var(z)).value();
    for (float v : gz.data) CHECK(v == 0.0f);

    // 2-channel 2x2 synthetic features vs a double-loop oracle
    Tensor f({2, 2, 2});
    f.data = {1.0f, 2.0f, 3.0f, 4.0f, -1.0f, 0.5f, 2.0f, -2.0f};
    const Tensor g = gram_matrix(Var(f)).value();
    const int hw = 4, ch = 2;
    for (int i = 0; i < ch; ++i)
        for (int j = 0; j < ch; ++j) {
            double acc = 0.0;
            for (int k = 0; k < hw; ++k) acc += f.data[i * hw + k] * f.data[j * hw + k];
            acc /= (ch * hw);
            CHECK(g.data[i * ch + j] == doctest::Approx(acc).epsilon(1e-6));
        }
}

TEST_CASE("complement_loss weighting behavior") {
    Rng rng(5);
    const PatchDiscriminator disc(11);
    const RandomPyramidExtractor extractor(5);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    const Tensor b = random_tensor({3, 8, 8}, rng);

    LossWeights w{0.0f, 0.0f, 0.0f, 0.0f};
    CHECK(complement_loss(Var(a), Var(b), w, disc, extractor).value().data[0] == 0.0f);

    w = LossWeights{1.0f, 0.0f, 0.0f, 0.0f};
    CHECK(complement_loss(Var(a), Var(b), w, disc, extractor).value().data[0] ==
          doctest::Approx(l1_loss(Var(a), Var(b)).value().data[0]));

    // defaults equal the hand-assembled weighted sum
    w = LossWeights{};
    const double expect =
        w.l1 * l1_loss(Var(a), Var(b)).value().data[0] +
        w.gan * adversarial_losses(Var(a), Var(b), disc).gen_loss.value().data[0] +
        w.perceptual * perceptual_loss(Var(a), Var(b), extractor).value().data[0] +
        w.style * style_loss(Var(a), Var(b), extractor).value().data[0];
    CHECK(complement_loss(Var(a), Var(b), w, disc, extractor).value().data[0] ==
          doctest::Approx(expect).epsilon(1e-4));

    // linear in each weight holding the others fixed
    LossWeights w2{};
    w2.perceptual = 2.0f * w.perceptual;
    const double base = complement_loss(Var(a), Var(b), LossWeights{w.l1, w.gan, 0.0f, w.style},
                                        disc, extractor).value().data[0];
    const double with_w = complement_loss(Var(a), Var(b), w, disc, extractor).value().data[0];
    const double with_2w = complement_loss(Var(a), Var(b), w2, disc, extractor).value().data[0];
    CHECK(with_2w - base == doctest::Approx(2.0 * (with_w - base)).epsilon(1e-3));

    LossWeights bad{-1.0f, 0.0f, 0.0f, 0.0f};
    CHECK_THROWS_AS(complement_loss(Var(a), Var(b), bad, disc, extractor), std::invalid_argument);
}

TEST_CASE("confidence_target maps residual to trust") {
    Rng rng(6);
    const Tensor gt = random_tensor({3, 4, 4}, rng);
    CHECK(confidence_target(gt, gt).min_value() == 1.0f);

    // saturated residual -> zero trust
    Tensor far = gt;
    for (auto& v : far.data) v = v > 0.0f ? v - 2.0f : v + 2.0f;
    const Tensor sat = confidence_target(gt, far);
    CHECK(sat.max_value() == 0.0f);

    // residual 0.25 with rho=1 -> target 0.75
    Tensor off = gt;
    for (auto& v : off.data) v += 0.25f;
    const Tensor t = confidence_target(gt, off);
    for (float v : t.data) CHECK(v == doctest::Approx(0.75f).epsilon(1e-6));
}

TEST_CASE("confidence_target is antitone in the residual") {
    Rng rng(7);
    const Tensor gt = random_tensor({3, 4, 4}, rng, -0.2f, 0.2f);
    Tensor near = gt, far = gt;
    for (size_t i = 0; i < gt.data.size(); ++i) {
        near.data[i] += 0.1f;
        far.data[i] += 0.4f;
    }
    const Tensor t_near = confidence_target(gt, near);
    const Tensor t_far = confidence_target(gt, far);
    for (size_t i = 0; i < t_near.data.size(); ++i) CHECK(t_near.data[i] >= t_far.data[i]);
}

TEST_CASE("confidence_loss mirrors the four-term structure") {
    Rng rng(8);
    const PatchDiscriminator disc(13);
    const RandomPyramidExtractor extractor(5);
    const Tensor pred = random_tensor({1, 8, 8}, rng, 0.0f, 1.0f);
    const Tensor target = random_tensor({1, 8, 8}, rng, 0.0f, 1.0f);

    // perfect prediction: L1 term vanishes
    LossWeights only_l1{1.0f, 0.0f, 0.0f, 0.0f};
    CHECK(confidence_loss(Var(pred), pred, only_l1, disc, extractor).value().data[0] == 0.0f);

    // lambda reduction matches complement_loss on the replicated maps
    LossWeights w{};
    const Var p3 = repeat_channels(Var(pred), 3);
    const Var t3 = repeat_channels(Var(target), 3);
    CHECK(confidence_loss(Var(pred), target, w, disc, extractor).value().data[0] ==
          doctest::Approx(complement_loss(p3, t3, w, disc, extractor).value().data[0]));
}

TEST_CASE("complement_loss gradient (critic excluded) matches finite differences") {
    // the objective is piecewise smooth; the test point keeps every absolute
    // residual away from its kink so central differences converge
    Rng rng(101);
    const PatchDiscriminator disc(17);
    const RandomPyramidExtractor extractor(5);
    const LossWeights w{1.0f, 0.0f, 0.1f, 250.0f};
    const Tensor pred = random_tensor({3, 8, 8}, rng, -0.5f, 0.5f);
    Tensor target = pred;
    for (auto& v : target.data) {
        const float off = rng.uniformf(0.1f, 0.3f) * (rng.uniform() < 0.5 ? -1.0f : 1.0f);
        v += off;
    }

    Var leaf(pred, true);
    backward(complement_loss(leaf, Var(target), w, disc, extractor));
    const Tensor analytic = leaf.grad();
    const Tensor numeric = numeric_gradient(
        [&](const Tensor& t) {
            return complement_loss(Var(t), Var(target), w, disc, extractor).value().data[0];
        },
        pred, 2e-3f);
    CHECK(relative_max_error(analytic, numeric) < 1e-3);
}

TEST_CASE("losses are nonnegative and vanish on identical inputs") {
    Rng rng(10);
    const RandomPyramidExtractor extractor(5);
    const Tensor a = random_tensor({3, 8, 8}, rng);
    const Tensor b = random_tensor({3, 8, 8}, rng);
    CHECK(l1_loss(Var(a), Var(b)).value().data[0] >= 0.0f);
    CHECK(perceptual_loss(Var(a), Var(b), extractor).value().data[0] >= 0.0f);
    CHECK(style_loss(Var(a), Var(b), extractor).value().data[0] >= 0.0f);
    CHECK(l1_loss(Var(a), Var(a)).value().data[0] == 0.0f);
    CHECK(perceptual_loss(Var(b), Var(b), extractor).value().data[0] == 0.0f);
    CHECK(style_loss(Var(b), Var(b), extractor).value().data[0] == 0.0f);
}
