#include "gaitstrip/random.hpp"

namespace gaitstrip {

Tensor random_uniform(const Shape& shape, std::mt19937_64& rng, float lo, float hi) {
    std::uniform_real_distribution<float> dist(lo, hi);
    Tensor t(shape);
    for (float& v : t.data())
        v = dist(rng);
    return t;
}

Tensor random_normal(const Shape& shape, std::mt19937_64& rng, float stddev) {
    std::normal_distribution<float> dist(0.0f, stddev);
    Tensor t(shape);
    for (float& v : t.data())
        v = dist(rng);
    return t;
}

ConvKernel random_kernel(std::size_t c_out, std::size_t c_in, Extent3 e, std::mt19937_64& rng, float stddev,
                         bool with_bias) {
    Tensor w = random_normal(Shape{c_out, c_in, e[0], e[1], e[2]}, rng, stddev);
    Tensor b = with_bias ? random_normal(Shape{c_out}, rng, stddev) : Tensor::zeros(Shape{c_out});
    return ConvKernel(std::move(w), std::move(b));
}

EcmParams random_ecm_params(std::size_t c_in, std::size_t c_out, BlockKind kind, std::mt19937_64& rng, float stddev,
                            bool with_bias) {
    EcmParams p;
    p.st = random_kernel(c_out, c_in, kStExtent, rng, stddev, with_bias);
    if (kind == BlockKind::StFl || kind == BlockKind::FullEcm)
        p.fl = random_kernel(c_out, c_in, kFlExtent, rng, stddev, with_bias);
    if (kind == BlockKind::FullEcm) {
        p.spb_h = random_kernel(c_out, c_in, kStripHExtent, rng, stddev, with_bias);
        p.spb_v = random_kernel(c_out, c_in, kStripVExtent, rng, stddev, with_bias);
    }
    return p;
}

} // namespace gaitstrip
