#include "gaitstrip/errors.hpp"
#include "gaitstrip/random.hpp"
#include "gaitstrip/reparam.hpp"

#include "oracles.hpp"
#include "small_config.hpp"

#include <gtest/gtest.h>

using namespace gaitstrip;

TEST(EmbedKernel, FrameKernelLandsOnCentralPlane) {
    Tensor w{Shape{1, 1, 1, 3, 3}};
    for (std::size_t i = 0; i < 9; ++i)
        w[i] = static_cast<float>(i + 1);
    const ConvKernel e = embed_kernel(ConvKernel(w, Tensor(Shape{1}, {0.5f})));
    ASSERT_EQ(e.weights.shape(), (Shape{1, 1, 3, 3, 3}));
    EXPECT_EQ(e.bias[0], 0.5f);
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t h = 0; h < 3; ++h)
            for (std::size_t x = 0; x < 3; ++x)
                EXPECT_EQ(e.weights.at({0, 0, t, h, x}), t == 1 ? static_cast<float>(h * 3 + x + 1) : 0.0f);
}

TEST(EmbedKernel, StripKernels) {
    std::mt19937_64 rng(1);
    const ConvKernel h = random_kernel(2, 3, kStripHExtent, rng);
    const ConvKernel eh = embed_kernel(h);
    const ConvKernel v = random_kernel(2, 3, kStripVExtent, rng);
    const ConvKernel ev = embed_kernel(v);
    for (std::size_t co = 0; co < 2; ++co)
        for (std::size_t ci = 0; ci < 3; ++ci)
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b)
                    for (std::size_t c = 0; c < 3; ++c) {
                        EXPECT_EQ(eh.weights.at({co, ci, a, b, c}), b == 1 ? h.weights.at({co, ci, a, 0, c}) : 0.0f);
                        EXPECT_EQ(ev.weights.at({co, ci, a, b, c}), c == 1 ? v.weights.at({co, ci, a, b, 0}) : 0.0f);
                    }
}

TEST(EmbedKernel, PreservesConvolution) {
    std::mt19937_64 rng(2);
    const Tensor x = random_uniform(Shape{1, 2, 4, 5, 6}, rng);
    for (Extent3 e : {kFlExtent, kStripHExtent, kStripVExtent, kStExtent}) {
        const ConvKernel k = random_kernel(3, 2, e, rng);
        EXPECT_LE(max_abs_diff(conv3d(x, embed_kernel(k)), oracle::conv3d(x, k)), 1e-5);
    }
}

TEST(EmbedKernel, RejectsOtherExtents) {
    EXPECT_THROW(embed_kernel(zero_kernel(1, 1, {1, 1, 1})), ShapeError);
    EXPECT_THROW(embed_kernel(zero_kernel(1, 1, {5, 3, 3})), ShapeError);
}

TEST(FuseEcm, ZeroAndStOnly) {
    const ConvKernel z = fuse_ecm(zero_ecm_params(2, 3, BlockKind::FullEcm));
    for (float v : z.weights.data())
        EXPECT_EQ(v, 0.0f);
    std::mt19937_64 rng(3);
    const EcmParams st = random_ecm_params(2, 3, BlockKind::StOnly, rng);
    const ConvKernel f = fuse_ecm(st);
    EXPECT_TRUE(f.weights.bit_equal(st.st.weights));
    EXPECT_TRUE(f.bias.bit_equal(st.st.bias));
}

TEST(FuseEcm, BiasIsSumOfBranchBiases) {
    std::mt19937_64 rng(4);
    const EcmParams p = random_ecm_params(2, 3, BlockKind::FullEcm, rng);
    const ConvKernel f = fuse_ecm(p);
    for (std::size_t c = 0; c < 3; ++c)
        EXPECT_FLOAT_EQ(f.bias[c], p.st.bias[c] + p.fl->bias[c] + p.spb_h->bias[c] + p.spb_v->bias[c]);
}

TEST(FuseEcm, MatchesMultiBranchForward) {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ci = 1 + rng() % 4, co = 1 + rng() % 5;
        const Shape s{1, ci, 1 + rng() % 5, 1 + rng() % 7, 1 + rng() % 9};
        const EcmParams p = random_ecm_params(ci, co, trial % 2 ? BlockKind::FullEcm : BlockKind::StFl, rng);
        const Tensor x = random_uniform(s, rng, -1.0f, 1.0f);
        const Tensor multi = ecm_forward(x, p, trial % 2 ? BlockKind::FullEcm : BlockKind::StFl);
        const Tensor fused = ecm_forward(x, EcmParams{fuse_ecm(p), {}, {}, {}}, BlockKind::Fused);
        worst = std::max(worst, max_abs_diff(multi, fused));
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(FuseEcm, Linearity) {
    std::mt19937_64 rng(6);
    EcmParams a = random_ecm_params(2, 2, BlockKind::FullEcm, rng);
    const EcmParams b = random_ecm_params(2, 2, BlockKind::FullEcm, rng);
    const ConvKernel fa = fuse_ecm(a), fb = fuse_ecm(b);
    EcmParams sum = a;
    sum.st.weights = elementwise_add(a.st.weights, b.st.weights);
    sum.fl->weights = elementwise_add(a.fl->weights, b.fl->weights);
    sum.spb_h->weights = elementwise_add(a.spb_h->weights, b.spb_h->weights);
    sum.spb_v->weights = elementwise_add(a.spb_v->weights, b.spb_v->weights);
    EXPECT_LE(max_abs_diff(fuse_ecm(sum).weights, elementwise_add(fa.weights, fb.weights)), 1e-5);
}

TEST(FuseModel, StructureAndParity) {
    const ModelWeights w = build_model(small_config(), 7);
    const ModelWeights f = fuse_model(w);
    EXPECT_TRUE(f.fused());
    EXPECT_EQ(f.fingerprint(), w.fingerprint());
    EXPECT_EQ(f.stem.front().kind, BlockKind::StOnly);
    for (const Block& b : f.low)
        EXPECT_EQ(b.kind, BlockKind::Fused);
    EXPECT_EQ(f.param_count(), build_model(small_config(BlockKind::StOnly), 7).param_count());
    EXPECT_THROW(fuse_model(f), ModelError);
}

TEST(FuseModel, CasiaParity) {
    const ModelConfig cfg = ModelConfig::casia_b();
    const ModelWeights fused = fuse_model(zero_model(cfg));
    EXPECT_EQ(zero_model(cfg).param_count(), 4464000u);
    EXPECT_EQ(fused.param_count(), 3024384u);
    EXPECT_EQ(fused.param_count(), zero_model(cfg.with_kind(BlockKind::StOnly)).param_count());
}

TEST(FuseModel, EndToEndAgreement) {
    for (BlockKind kind : {BlockKind::FullEcm, BlockKind::StFl, BlockKind::StOnly}) {
        const ModelWeights w = build_model(small_config(kind), 8);
        const FusionReport r = verify_fusion(w, fuse_model(w), 4, 9);
        EXPECT_LE(r.max_abs_divergence, 1e-5) << to_string(kind);
        EXPECT_EQ(r.probes_run, 4u);
    }
}

TEST(VerifyFusion, DetectsPerturbation) {
    const ModelWeights w = build_model(small_config(), 10);
    ModelWeights f = fuse_model(w);
    f.low.back().params.st.bias[0] += 1.0f;
    EXPECT_GT(verify_fusion(w, f, 2, 11).max_abs_divergence, 1e-3);
}

TEST(VerifyFusion, ZeroModels) {
    const ModelWeights z = zero_model(small_config());
    const FusionReport r = verify_fusion(z, fuse_model(z), 3, 12);
    EXPECT_EQ(r.max_abs_divergence, 0.0);
}

TEST(VerifyFusion, Errors) {
    const ModelWeights w = build_model(small_config(), 13);
    EXPECT_THROW(verify_fusion(w, fuse_model(w), 0, 1), ParameterError);
    EXPECT_THROW(verify_fusion(w, fuse_model(w), 1, 1, 0), ParameterError);
    ModelConfig other = small_config();
    other.embedding_dim = 4;
    EXPECT_THROW(verify_fusion(w, fuse_model(build_model(other, 13)), 1, 1), ModelError);
}
