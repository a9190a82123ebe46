#pragma once

#include "gaitstrip/tensor.hpp"

#include <array>
#include <cstddef>
#include <span>

namespace gaitstrip {

using Extent3 = std::array<std::size_t, 3>; // (t, h, w)

// 3-D convolution weights (C_out, C_in, k_t, k_h, k_w), per-output-channel bias
// and "same" padding (k - 1) / 2 on each axis. Kernel extents must be odd.
struct ConvKernel {
    Tensor weights;
    Tensor bias;
    Extent3 padding{0, 0, 0};

    ConvKernel() = default;
    ConvKernel(Tensor weights, Tensor bias);

    std::size_t out_channels() const { return weights.dim(0); }
    std::size_t in_channels() const { return weights.dim(1); }
    Extent3 extents() const { return {weights.dim(2), weights.dim(3), weights.dim(4)}; }
    std::size_t param_count() const { return weights.numel() + bias.numel(); }

    bool empty() const { return weights.empty(); }

    // Throws ShapeError unless the layout invariants above hold.
    void validate() const;
};

// Zero-weight kernel with the given extents.
ConvKernel zero_kernel(std::size_t c_out, std::size_t c_in, Extent3 extents);

struct LinearMap {
    Tensor weights; // (d_out, d_in)
    Tensor bias;    // (d_out)

    std::size_t in_dim() const { return weights.dim(1); }
    std::size_t out_dim() const { return weights.dim(0); }
    std::size_t param_count() const { return weights.numel() + bias.numel(); }
};

// Stride-1 same-padded cross-correlation plus bias.
// x: (N, C_in, T, H, W) -> (N, C_out, T, H, W).
Tensor conv3d(const Tensor& x, const ConvKernel& k);

// Sum of several same-padded convolutions over one input, accumulated in a
// single 64-bit pass and rounded once. Kernels must agree on C_in and C_out;
// their contributions (taps then bias) are added in span order.
Tensor conv3d_sum(const Tensor& x, std::span<const ConvKernel* const> kernels);

// Windowed max, no padding. Output extent floor((n - window) / stride) + 1.
Tensor maxpool3d(const Tensor& x, Extent3 window, Extent3 stride);

Tensor leaky_relu(const Tensor& x, float slope);

// weights * v + bias, 64-bit accumulation.
Tensor linear_apply(const Tensor& v, const LinearMap& m);

} // namespace gaitstrip
