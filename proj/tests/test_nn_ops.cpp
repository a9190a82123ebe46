#include "gaitstrip/errors.hpp"
#include "gaitstrip/nn_ops.hpp"
#include "gaitstrip/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace gaitstrip;

namespace {

ConvKernel delta_kernel(std::size_t channels, Extent3 e) {
    ConvKernel k = zero_kernel(channels, channels, e);
    for (std::size_t c = 0; c < channels; ++c)
        k.weights.at({c, c, e[0] / 2, e[1] / 2, e[2] / 2}) = 1.0f;
    return k;
}

const Extent3 kAllExtents[] = {{3, 3, 3}, {1, 3, 3}, {3, 1, 3}, {3, 3, 1}, {1, 1, 1}, {5, 3, 1}};

} // namespace

TEST(Conv3d, DeltaKernelIsBitExactIdentity) {
    std::mt19937_64 rng(1);
    const Tensor x = random_normal(Shape{2, 3, 4, 5, 19}, rng);
    for (Extent3 e : kAllExtents)
        EXPECT_TRUE(conv3d(x, delta_kernel(3, e)).bit_equal(x));
}

TEST(Conv3d, ZeroKernelGivesBiasPerChannel) {
    ConvKernel k = zero_kernel(2, 1, {3, 3, 3});
    k.bias = Tensor(Shape{2}, {0.5f, -2.0f});
    std::mt19937_64 rng(2);
    const Tensor y = conv3d(random_normal(Shape{1, 1, 3, 4, 5}, rng), k);
    for (std::size_t i = 0; i < 60; ++i) {
        EXPECT_EQ(y[i], 0.5f);
        EXPECT_EQ(y[60 + i], -2.0f);
    }
}

TEST(Conv3d, OnesCubeCenterAndCorner) {
    const ConvKernel k(Tensor::ones(Shape{1, 1, 3, 3, 3}), Tensor::zeros(Shape{1}));
    const Tensor y = conv3d(Tensor::ones(Shape{1, 1, 3, 3, 3}), k);
    EXPECT_EQ(y.at({0, 0, 1, 1, 1}), 27.0f);
    EXPECT_EQ(y.at({0, 0, 0, 0, 0}), 8.0f);
    const Tensor ref = oracle::conv3d(Tensor::ones(Shape{1, 1, 3, 3, 3}), k);
    EXPECT_TRUE(y.bit_equal(ref));
}

TEST(Conv3d, ChannelMismatchNamesCounts) {
    try {
        conv3d(Tensor::ones(Shape{1, 2, 3, 3, 3}), zero_kernel(1, 3, {3, 3, 3}));
        FAIL();
    } catch (const ShapeError& e) {
        EXPECT_NE(std::string(e.what()).find("3 input channels"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("has 2"), std::string::npos);
    }
}

TEST(Conv3d, RejectsNonCanonicalPadding) {
    ConvKernel k = zero_kernel(1, 1, {3, 3, 3});
    k.padding = {0, 1, 1};
    EXPECT_THROW(conv3d(Tensor::ones(Shape{1, 1, 3, 3, 3}), k), ShapeError);
}

TEST(Conv3d, MatchesDirectSummationOracle) {
    std::mt19937_64 rng(3);
    // Widths straddle the 16-wide tile; channel counts straddle the 12-channel block.
    const std::size_t widths[] = {1, 7, 16, 17, 33};
    const std::size_t couts[] = {1, 5, 12, 13};
    int i = 0;
    for (Extent3 e : kAllExtents)
        for (std::size_t w : widths) {
            const std::size_t co = couts[i++ % 4];
            const Tensor x = random_uniform(Shape{2, 3, 2, 4, w}, rng);
            const ConvKernel k = random_kernel(co, 3, e, rng);
            const Tensor got = conv3d(x, k);
            EXPECT_LE(max_abs_diff(got, oracle::conv3d(x, k)), 1e-5) << "w=" << w;
        }
}

TEST(Conv3d, ShortSequencesKeepShape) {
    std::mt19937_64 rng(4);
    const Tensor x = random_uniform(Shape{1, 2, 1, 5, 6}, rng);
    const ConvKernel k = random_kernel(3, 2, {3, 3, 3}, rng);
    const Tensor y = conv3d(x, k);
    EXPECT_EQ(y.shape(), (Shape{1, 3, 1, 5, 6}));
    EXPECT_LE(max_abs_diff(y, oracle::conv3d(x, k)), 1e-5);
}

TEST(Conv3d, SamePaddingPreservesExtents) {
    std::mt19937_64 rng(5);
    const Tensor x = random_uniform(Shape{1, 2, 4, 6, 5}, rng);
    for (Extent3 e : {Extent3{3, 3, 3}, Extent3{1, 3, 3}, Extent3{3, 1, 3}, Extent3{3, 3, 1}})
        EXPECT_EQ(conv3d(x, random_kernel(4, 2, e, rng)).shape(), (Shape{1, 4, 4, 6, 5}));
}

TEST(Conv3d, LinearInInput) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor x = random_uniform(Shape{1, 3, 3, 5, 6}, rng);
        const Tensor y = random_uniform(Shape{1, 3, 3, 5, 6}, rng);
        const ConvKernel k = random_kernel(4, 3, {3, 3, 3}, rng, 1.0f, false);
        const float a = 1.7f, b = -0.6f;
        const Tensor lhs = conv3d(elementwise_add(scale(x, a), scale(y, b)), k);
        const Tensor rhs = elementwise_add(scale(conv3d(x, k), a), scale(conv3d(y, k), b));
        EXPECT_LE(max_abs_diff(lhs, rhs), 1e-4);
    }
}

TEST(Conv3d, ZeroEmbeddedKernelMatchesOriginal) {
    std::mt19937_64 rng(7);
    for (Extent3 e : {Extent3{1, 3, 3}, Extent3{3, 1, 3}, Extent3{3, 3, 1}}) {
        const ConvKernel k = random_kernel(3, 2, e, rng);
        PadSpec pads{{0, 0}, {0, 0}};
        for (std::size_t a = 0; a < 3; ++a)
            pads.emplace_back((3 - e[a]) / 2, (3 - e[a]) / 2);
        const ConvKernel big(pad_zero(k.weights, pads), k.bias);
        const Tensor x = random_uniform(Shape{1, 2, 4, 5, 6}, rng);
        EXPECT_LE(max_abs_diff(conv3d(x, big), conv3d(x, k)), 1e-5);
    }
}

TEST(Conv3dSum, EqualsSumOfSeparateConvolutions) {
    std::mt19937_64 rng(8);
    const Tensor x = random_uniform(Shape{1, 3, 3, 5, 7}, rng);
    const ConvKernel a = random_kernel(4, 3, {3, 3, 3}, rng);
    const ConvKernel b = random_kernel(4, 3, {1, 3, 3}, rng);
    const ConvKernel* both[] = {&a, &b};
    const Tensor ref = elementwise_add(oracle::conv3d(x, a), oracle::conv3d(x, b));
    EXPECT_LE(max_abs_diff(conv3d_sum(x, both), ref), 1e-5);
}

TEST(Maxpool3d, ShapeArithmetic) {
    const Tensor y = maxpool3d(Tensor::ones(Shape{1, 2, 3, 4, 4}), {1, 2, 2}, {1, 2, 2});
    EXPECT_EQ(y.shape(), (Shape{1, 2, 3, 2, 2}));
    EXPECT_EQ(maxpool3d(Tensor::ones(Shape{1, 1, 1, 5, 7}), {1, 2, 2}, {1, 2, 2}).shape(), (Shape{1, 1, 1, 2, 3}));
}

TEST(Maxpool3d, UnitWindowIsIdentity) {
    std::mt19937_64 rng(9);
    const Tensor x = random_normal(Shape{2, 2, 3, 4, 5}, rng);
    EXPECT_TRUE(maxpool3d(x, {1, 1, 1}, {1, 1, 1}).bit_equal(x));
}

TEST(Maxpool3d, WindowMax) {
    const Tensor x(Shape{1, 1, 1, 2, 2}, {1, 2, 3, 4});
    EXPECT_EQ(maxpool3d(x, {1, 2, 2}, {1, 2, 2})[0], 4.0f);
}

TEST(Maxpool3d, WindowLargerThanExtent) {
    EXPECT_THROW(maxpool3d(Tensor::ones(Shape{1, 1, 1, 1, 4}), {1, 2, 2}, {1, 2, 2}), ShapeError);
}

TEST(Maxpool3d, BoundedByGlobalMax) {
    std::mt19937_64 rng(10);
    const Tensor x = random_normal(Shape{1, 3, 4, 8, 6}, rng);
    const float global = *std::max_element(x.data().begin(), x.data().end());
    const Tensor y = maxpool3d(x, {2, 2, 2}, {1, 2, 2});
    for (float v : y.data())
        EXPECT_LE(v, global);
}

TEST(LeakyRelu, Definition) {
    EXPECT_FLOAT_EQ(leaky_relu(Tensor(Shape{1}, {-1.0f}), 0.01f)[0], -0.01f);
    const Tensor relu = leaky_relu(Tensor(Shape{2}, {-2, 3}), 0.0f);
    EXPECT_EQ(relu[0], 0.0f);
    EXPECT_EQ(relu[1], 3.0f);
    std::mt19937_64 rng(11);
    const Tensor x = random_uniform(Shape{5, 5}, rng);
    EXPECT_TRUE(leaky_relu(x, 0.01f).bit_equal(x));
    EXPECT_TRUE(leaky_relu(leaky_relu(x, 0.3f), 0.3f).bit_equal(x));
}

TEST(LeakyRelu, SlopeOutOfRange) { EXPECT_THROW(leaky_relu(Tensor::ones(Shape{1}), 1.0f), ParameterError); }

TEST(LinearApply, IdentityAndBias) {
    std::mt19937_64 rng(12);
    const Tensor v = random_normal(Shape{4}, rng);
    Tensor eye = Tensor::zeros(Shape{4, 4});
    for (std::size_t i = 0; i < 4; ++i)
        eye.at({i, i}) = 1.0f;
    EXPECT_TRUE(linear_apply(v, {eye, Tensor::zeros(Shape{4})}).bit_equal(v));
    const Tensor b(Shape{3}, {1, 2, 3});
    EXPECT_TRUE(linear_apply(v, {Tensor::zeros(Shape{3, 4}), b}).bit_equal(b));
}

TEST(LinearApply, HandComputedProduct) {
    const LinearMap m{Tensor(Shape{2, 2}, {1, 1, 1, -1}), Tensor::zeros(Shape{2})};
    EXPECT_TRUE(linear_apply(Tensor(Shape{2}, {2, 3}), m).bit_equal(Tensor(Shape{2}, {5, -1})));
}

TEST(LinearApply, DimensionMismatch) {
    const LinearMap m{Tensor::zeros(Shape{2, 3}), Tensor::zeros(Shape{2})};
    EXPECT_THROW(linear_apply(Tensor::ones(Shape{2}), m), ShapeError);
}
