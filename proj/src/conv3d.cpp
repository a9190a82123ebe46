#include "gaitstrip/errors.hpp"
#include "gaitstrip/nn_ops.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

// Direct same-padded 3-D convolution. The input is copied once into a
// zero-padded buffer wide enough that every output tile can read full vectors
// without bounds checks; each tile keeps kBlock output channels x kTile
// positions of 64-bit accumulators in registers across all taps.

namespace gaitstrip {

namespace {

using v8d = double __attribute__((vector_size(64)));
using v8f = float __attribute__((vector_size(32)));

constexpr std::size_t kLanes = 8;
constexpr std::size_t kVecs = 2;
constexpr std::size_t kTile = kLanes * kVecs; // output positions along W per tile
constexpr std::size_t kBlock = 12;            // output channels per tile

inline v8d load_widen(const float* p) {
    v8f f;
    std::memcpy(&f, p, sizeof(f));
    return __builtin_convertvector(f, v8d);
}

inline v8d splat(double v) { return v8d{v, v, v, v, v, v, v, v}; }

struct PackedKernel {
    std::vector<std::ptrdiff_t> tap_offsets; // into the padded buffer, per tap
    std::vector<double> weights;             // [ci][tap][kBlock] for the current channel block
    std::vector<double> bias;                // [kBlock]
};

void check_kernel_set(const Tensor& x, std::span<const ConvKernel* const> kernels) {
    if (x.rank() != 5)
        throw ShapeError("conv3d: input must be rank 5 (N,C,T,H,W), got " + x.shape().str());
    if (kernels.empty())
        throw ShapeError("conv3d: no kernels given");
    const ConvKernel& first = *kernels.front();
    for (const ConvKernel* k : kernels) {
        k->validate();
        if (k->in_channels() != x.dim(1))
            throw ShapeError("conv3d: kernel expects " + std::to_string(k->in_channels()) +
                             " input channels, input has " + std::to_string(x.dim(1)));
        if (k->out_channels() != first.out_channels())
            throw ShapeError("conv3d: kernels disagree on output channels");
    }
}

} // namespace

ConvKernel::ConvKernel(Tensor w, Tensor b) : weights(std::move(w)), bias(std::move(b)) {
    if (weights.rank() != 5)
        throw ShapeError("ConvKernel: weights must be rank 5, got " + weights.shape().str());
    padding = {(weights.dim(2) - 1) / 2, (weights.dim(3) - 1) / 2, (weights.dim(4) - 1) / 2};
    validate();
}

void ConvKernel::validate() const {
    if (weights.rank() != 5)
        throw ShapeError("ConvKernel: weights must be rank 5, got " + weights.shape().str());
    if (bias.rank() != 1 || bias.dim(0) != weights.dim(0))
        throw ShapeError("ConvKernel: bias " + bias.shape().str() + " does not match weights " +
                         weights.shape().str());
    for (std::size_t a = 0; a < 3; ++a) {
        const std::size_t k = weights.dim(2 + a);
        if (k % 2 == 0)
            throw ShapeError("ConvKernel: kernel extents must be odd, got " + weights.shape().str());
        if (padding[a] != (k - 1) / 2)
            throw ShapeError("ConvKernel: padding must be (k-1)/2 on every axis");
    }
}

ConvKernel zero_kernel(std::size_t c_out, std::size_t c_in, Extent3 e) {
    return ConvKernel(Tensor::zeros(Shape{c_out, c_in, e[0], e[1], e[2]}), Tensor::zeros(Shape{c_out}));
}

Tensor conv3d(const Tensor& x, const ConvKernel& k) {
    const ConvKernel* one[] = {&k};
    return conv3d_sum(x, one);
}

Tensor conv3d_sum(const Tensor& x, std::span<const ConvKernel* const> kernels) {
    check_kernel_set(x, kernels);

    const std::size_t N = x.dim(0), C_in = x.dim(1), T = x.dim(2), H = x.dim(3), W = x.dim(4);
    const std::size_t C_out = kernels.front()->out_channels();

    Extent3 pad{0, 0, 0};
    for (const ConvKernel* k : kernels)
        for (std::size_t a = 0; a < 3; ++a)
            pad[a] = std::max(pad[a], k->padding[a]);

    const std::size_t W_round = (W + kTile - 1) / kTile * kTile;
    const std::size_t Tp = T + 2 * pad[0], Hp = H + 2 * pad[1], Wp = W_round + 2 * pad[2];
    const std::size_t plane = Tp * Hp * Wp;

    std::vector<PackedKernel> packed(kernels.size());
    for (std::size_t b = 0; b < kernels.size(); ++b) {
        const ConvKernel& k = *kernels[b];
        const auto [kt, kh, kw] = k.extents();
        for (std::size_t i = 0; i < kt; ++i)
            for (std::size_t j = 0; j < kh; ++j)
                for (std::size_t l = 0; l < kw; ++l) {
                    const std::size_t ot = i + pad[0] - k.padding[0];
                    const std::size_t oh = j + pad[1] - k.padding[1];
                    const std::size_t ow = l + pad[2] - k.padding[2];
                    packed[b].tap_offsets.push_back(static_cast<std::ptrdiff_t>((ot * Hp + oh) * Wp + ow));
                }
        packed[b].weights.resize(C_in * packed[b].tap_offsets.size() * kBlock);
        packed[b].bias.resize(kBlock);
    }

    std::vector<float> padded(plane * C_in + kTile, 0.0f);
    Tensor out{Shape{N, C_out, T, H, W}};

    for (std::size_t n = 0; n < N; ++n) {
        const float* src = x.data().data() + n * C_in * T * H * W;
        for (std::size_t c = 0; c < C_in; ++c)
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t h = 0; h < H; ++h)
                    std::memcpy(&padded[c * plane + ((t + pad[0]) * Hp + h + pad[1]) * Wp + pad[2]],
                                src + ((c * T + t) * H + h) * W, W * sizeof(float));

        for (std::size_t co0 = 0; co0 < C_out; co0 += kBlock) {
            const std::size_t cb = std::min(kBlock, C_out - co0);

            for (std::size_t b = 0; b < kernels.size(); ++b) {
                const ConvKernel& k = *kernels[b];
                const std::size_t taps = packed[b].tap_offsets.size();
                std::fill(packed[b].weights.begin(), packed[b].weights.end(), 0.0);
                std::fill(packed[b].bias.begin(), packed[b].bias.end(), 0.0);
                for (std::size_t c = 0; c < cb; ++c) {
                    const float* w = k.weights.data().data() + (co0 + c) * C_in * taps;
                    for (std::size_t ci = 0; ci < C_in; ++ci)
                        for (std::size_t tap = 0; tap < taps; ++tap)
                            packed[b].weights[(ci * taps + tap) * kBlock + c] = w[ci * taps + tap];
                    packed[b].bias[c] = k.bias[co0 + c];
                }
            }

            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t h = 0; h < H; ++h)
                    for (std::size_t w0 = 0; w0 < W; w0 += kTile) {
                        v8d acc[kBlock][kVecs] = {};
                        const float* origin = padded.data() + (t * Hp + h) * Wp + w0;

                        for (const PackedKernel& pk : packed) {
                            const std::size_t taps = pk.tap_offsets.size();
                            const double* wp = pk.weights.data();
                            for (std::size_t ci = 0; ci < C_in; ++ci) {
                                const float* base = origin + ci * plane;
                                for (std::size_t tap = 0; tap < taps; ++tap, wp += kBlock) {
                                    const float* p = base + pk.tap_offsets[tap];
                                    v8d xv[kVecs];
                                    for (std::size_t v = 0; v < kVecs; ++v)
                                        xv[v] = load_widen(p + v * kLanes);
                                    for (std::size_t c = 0; c < kBlock; ++c) {
                                        const v8d wv = splat(wp[c]);
                                        for (std::size_t v = 0; v < kVecs; ++v)
                                            acc[c][v] += wv * xv[v];
                                    }
                                }
                            }
                            for (std::size_t c = 0; c < kBlock; ++c)
                                for (std::size_t v = 0; v < kVecs; ++v)
                                    acc[c][v] += splat(pk.bias[c]);
                        }

                        const std::size_t valid = std::min(kTile, W - w0);
                        for (std::size_t c = 0; c < cb; ++c) {
                            float* dst = out.data().data() + (((n * C_out + co0 + c) * T + t) * H + h) * W + w0;
                            for (std::size_t j = 0; j < valid; ++j)
                                dst[j] = static_cast<float>(acc[c][j / kLanes][j % kLanes]);
                        }
                    }
        }
    }
    return out;
}

} // namespace gaitstrip
