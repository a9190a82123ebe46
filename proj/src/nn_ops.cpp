#include "gaitstrip/errors.hpp"
#include "gaitstrip/nn_ops.hpp"

#include <algorithm>
#include <limits>

namespace gaitstrip {

Tensor maxpool3d(const Tensor& x, Extent3 window, Extent3 stride) {
    if (x.rank() != 5)
        throw ShapeError("maxpool3d: input must be rank 5 (N,C,T,H,W), got " + x.shape().str());
    Extent3 out_ext{};
    for (std::size_t a = 0; a < 3; ++a) {
        if (window[a] == 0 || stride[a] == 0)
            throw ParameterError("maxpool3d: window and stride must be >= 1");
        if (window[a] > x.dim(2 + a))
            throw ShapeError("maxpool3d: window " + std::to_string(window[a]) + " larger than extent " +
                             std::to_string(x.dim(2 + a)) + " of " + x.shape().str());
        out_ext[a] = (x.dim(2 + a) - window[a]) / stride[a] + 1;
    }
    const std::size_t NC = x.dim(0) * x.dim(1);
    const std::size_t T = x.dim(2), H = x.dim(3), W = x.dim(4);
    const auto [To, Ho, Wo] = out_ext;
    Tensor out{Shape{x.dim(0), x.dim(1), To, Ho, Wo}};

    for (std::size_t nc = 0; nc < NC; ++nc) {
        const float* src = x.data().data() + nc * T * H * W;
        float* dst = out.data().data() + nc * To * Ho * Wo;
        for (std::size_t t = 0; t < To; ++t)
            for (std::size_t h = 0; h < Ho; ++h)
                for (std::size_t w = 0; w < Wo; ++w) {
                    float m = -std::numeric_limits<float>::infinity();
                    for (std::size_t i = 0; i < window[0]; ++i)
                        for (std::size_t j = 0; j < window[1]; ++j)
                            for (std::size_t l = 0; l < window[2]; ++l)
                                m = std::max(m, src[((t * stride[0] + i) * H + h * stride[1] + j) * W +
                                                    w * stride[2] + l]);
                    dst[(t * Ho + h) * Wo + w] = m;
                }
    }
    return out;
}

Tensor leaky_relu(const Tensor& x, float slope) {
    if (!(slope >= 0.0f && slope < 1.0f))
        throw ParameterError("leaky_relu: slope must lie in [0, 1)");
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i)
        out[i] = x[i] >= 0.0f ? x[i] : slope * x[i];
    return out;
}

Tensor linear_apply(const Tensor& v, const LinearMap& m) {
    if (m.weights.rank() != 2 || m.bias.rank() != 1 || m.bias.dim(0) != m.weights.dim(0))
        throw ShapeError("linear_apply: malformed map, weights " + m.weights.shape().str() + " bias " +
                         m.bias.shape().str());
    if (v.numel() != m.in_dim())
        throw ShapeError("linear_apply: input length " + std::to_string(v.numel()) + " but map expects " +
                         std::to_string(m.in_dim()));
    const std::size_t d_out = m.out_dim(), d_in = m.in_dim();
    Tensor out{Shape{d_out}};
    for (std::size_t o = 0; o < d_out; ++o) {
        const float* row = m.weights.data().data() + o * d_in;
        double acc = 0.0;
        for (std::size_t i = 0; i < d_in; ++i)
            acc += static_cast<double>(row[i]) * v[i];
        out[o] = static_cast<float>(acc + m.bias[o]);
    }
    return out;
}

} // namespace gaitstrip
