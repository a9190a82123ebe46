#include "gaitstrip/errors.hpp"
#include "gaitstrip/model.hpp"
#include "gaitstrip/random.hpp"

#include "small_config.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gaitstrip;

namespace {

Tensor sequence(const ModelConfig& cfg, std::size_t frames, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_uniform(Shape{1, cfg.in_channels, frames, cfg.input_height, cfg.input_width}, rng);
}

} // namespace

TEST(ModelConfig, Presets) {
    const ModelConfig c = ModelConfig::preset("casiab");
    EXPECT_EQ(c.block_channels, (std::vector<std::size_t>{32, 64, 128, 128}));
    EXPECT_EQ(c.ecm_from_block, 1u);
    EXPECT_EQ(c.bin_count(), 96u);
    EXPECT_EQ(c.low_bins(), 64u);
    EXPECT_EQ(c.high_bins(), 32u);
    const ModelConfig o = ModelConfig::preset("oumvlp");
    EXPECT_EQ(o.block_channels, (std::vector<std::size_t>{64, 128, 196, 256, 256}));
    EXPECT_EQ(o.ecm_from_block, 3u);
    EXPECT_EQ(o.kind_of_block(2), BlockKind::StOnly);
    EXPECT_EQ(o.kind_of_block(3), BlockKind::FullEcm);
    EXPECT_THROW(ModelConfig::preset("gait3d"), ParameterError);
}

TEST(ModelConfig, ValidationRejectsBadPlans) {
    ModelConfig c = small_config();
    c.split_after_block = 0;
    EXPECT_THROW(c.validate(), ModelError);
    c = small_config();
    c.gem_p = 0.5;
    EXPECT_THROW(c.validate(), ModelError);
    c = small_config();
    c.block_channels = {};
    EXPECT_THROW(c.validate(), ModelError);
    c = small_config();
    c.highlevel_pool_window = {2, 2, 2};
    EXPECT_THROW(c.validate(), ModelError);
}

TEST(ModelConfig, FingerprintIgnoresKindOnly) {
    const ModelConfig c = ModelConfig::casia_b();
    EXPECT_EQ(c.fingerprint().size(), 16u);
    EXPECT_EQ(c.fingerprint(), c.with_kind(BlockKind::Fused).fingerprint());
    EXPECT_NE(c.fingerprint(), ModelConfig::oumvlp().fingerprint());
    ModelConfig d = c;
    d.gem_p = 3.0;
    EXPECT_NE(c.fingerprint(), d.fingerprint());
}

TEST(BuildModel, Deterministic) {
    const ModelWeights a = build_model(small_config(), 42);
    const ModelWeights b = build_model(small_config(), 42);
    const ModelWeights c = build_model(small_config(), 43);
    EXPECT_TRUE(a.low.back().params.spb_v->weights.bit_equal(b.low.back().params.spb_v->weights));
    EXPECT_TRUE(a.bins[5].weights.bit_equal(b.bins[5].weights));
    EXPECT_FALSE(a.stem[0].params.st.weights.bit_equal(c.stem[0].params.st.weights));
}

TEST(BuildModel, InitBoundsAndZeroBias) {
    const ModelWeights w = build_model(small_config(), 1);
    const double bound = std::sqrt(1.0 / (4 * 27));
    for (float v : w.low.front().params.st.weights.data())
        EXPECT_LE(std::abs(v), bound);
    for (float v : w.low.front().params.st.bias.data())
        EXPECT_EQ(v, 0.0f);
    EXPECT_NO_THROW(w.validate());
}

TEST(BuildModel, Structure) {
    const ModelWeights w = build_model(small_config(), 2);
    EXPECT_EQ(w.stem.size(), 1u);
    EXPECT_EQ(w.low.size(), 2u);
    EXPECT_EQ(w.high.size(), 2u);
    EXPECT_EQ(w.bins.size(), 24u);
    EXPECT_EQ(w.stem[0].kind, BlockKind::StOnly);
    EXPECT_EQ(w.low[0].kind, BlockKind::FullEcm);
    EXPECT_TRUE(w.low[0].params.spb_h.has_value());
}

TEST(ModelWeights, ValidateCatchesWrongKind) {
    ModelWeights w = build_model(small_config(), 3);
    w.low[0].kind = BlockKind::StFl;
    EXPECT_THROW(w.validate(), Error);
    w = build_model(small_config(), 3);
    w.bins.pop_back();
    EXPECT_THROW(w.validate(), ModelError);
}

TEST(Aggregation, TemporalMaxIsPermutationInvariant) {
    std::mt19937_64 rng(4);
    const Tensor x = random_normal(Shape{1, 3, 6, 4, 5}, rng);
    std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
    Tensor y{x.shape()};
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 6; ++t)
            for (std::size_t h = 0; h < 4; ++h)
                for (std::size_t w = 0; w < 5; ++w)
                    y.at({0, c, t, h, w}) = x.at({0, c, order[t], h, w});
    const Tensor a = temporal_aggregate(x);
    EXPECT_EQ(a.shape(), (Shape{1, 3, 1, 4, 5}));
    EXPECT_TRUE(a.bit_equal(temporal_aggregate(y)));
}

TEST(Aggregation, GemRowsShapeAndConstantRow) {
    const Tensor g = gem_rows(Tensor(Shape{1, 2, 1, 3, 4}, 2.5f), 6.5);
    EXPECT_EQ(g.shape(), (Shape{1, 2, 3}));
    for (float v : g.data())
        EXPECT_NEAR(v, 2.5f, 1e-6);
    EXPECT_THROW(gem_rows(Tensor::ones(Shape{1, 2, 2, 3, 4}), 6.5), ShapeError);
}

TEST(Forward, ShapeForAnyLength) {
    const ModelWeights w = build_model(small_config(), 5);
    for (std::size_t t : {1u, 2u, 15u, 30u}) {
        const Embedding e = forward(sequence(w.config, t, t), w);
        EXPECT_EQ(e.values.shape(), (Shape{24, 8}));
        EXPECT_TRUE(all_finite(e.values));
    }
}

TEST(Forward, LevelsAreIndependent) {
    const ModelWeights base = build_model(small_config(), 7);
    const Tensor x = sequence(base.config, 3, 7);
    const Embedding e0 = forward(x, base);

    ModelWeights w = base;
    w.high.back().params.st.bias[0] += 1.0f;
    const Embedding e1 = forward(x, w);
    const std::size_t low_rows = base.config.low_bins(), d = base.config.embedding_dim;
    double low_change = 0.0, high_change = 0.0;
    for (std::size_t i = 0; i < e0.values.numel(); ++i) {
        double& slot = i < low_rows * d ? low_change : high_change;
        slot = std::max(slot, static_cast<double>(std::abs(e0.values[i] - e1.values[i])));
    }
    EXPECT_EQ(low_change, 0.0);
    EXPECT_GT(high_change, 0.0);

    w = base;
    w.bins[3].bias[2] += 1.0f;
    const Embedding e2 = forward(x, w);
    for (std::size_t r = 0; r < base.config.bin_count(); ++r)
        for (std::size_t j = 0; j < d; ++j)
            EXPECT_EQ(e2.values.at({r, j}) - e0.values.at({r, j}), r == 3 && j == 2 ? 1.0f : 0.0f);
}

TEST(Forward, Deterministic) {
    const ModelWeights w = build_model(small_config(), 8);
    const Tensor x = sequence(w.config, 4, 8);
    EXPECT_TRUE(forward(x, w).values.bit_equal(forward(x, w).values));
}

TEST(Forward, RejectsWrongInput) {
    const ModelWeights w = build_model(small_config(), 9);
    EXPECT_THROW(forward(Tensor::ones(Shape{1, 1, 2, 15, 12}), w), ShapeError);
    EXPECT_THROW(forward(Tensor::ones(Shape{1, 2, 2, 16, 12}), w), ShapeError);
    EXPECT_THROW(forward(Tensor::ones(Shape{1, 16, 12}), w), ShapeError);
}

TEST(ForwardBatch, MatchesSingleAndNamesFailingIndex) {
    const ModelWeights w = build_model(small_config(), 10);
    const std::vector<Tensor> xs{sequence(w.config, 2, 1), sequence(w.config, 3, 2)};
    const auto out = forward_batch(xs, w);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_TRUE(out[1].values.bit_equal(forward(xs[1], w).values));

    const std::vector<Tensor> bad{xs[0], Tensor::ones(Shape{1, 1, 2, 8, 8})};
    try {
        forward_batch(bad, w);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("sequence 1"), std::string::npos);
    }
}

TEST(Forward, CasiaShape) {
    const ModelWeights w = build_model(ModelConfig::casia_b(), 11);
    const Embedding e = forward(sequence(w.config, 2, 11), w);
    EXPECT_EQ(e.values.shape(), (Shape{96, 128}));
}
