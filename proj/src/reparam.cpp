#include "gaitstrip/reparam.hpp"

#include "gaitstrip/errors.hpp"

#include <algorithm>
#include <random>

namespace gaitstrip {

ConvKernel embed_kernel(const ConvKernel& k) {
    k.validate();
    const Extent3 e = k.extents();
    if (e != kStExtent && e != kFlExtent && e != kStripHExtent && e != kStripVExtent)
        throw ShapeError("embed_kernel: unsupported kernel extents " + k.weights.shape().str());
    if (e == kStExtent)
        return k;

    // Size-1 axes sit at index 1 of the 3-tap axis, so pad by one on each side.
    PadSpec pads{{0, 0}, {0, 0}};
    for (std::size_t a = 0; a < 3; ++a)
        pads.emplace_back(e[a] == 1 ? 1 : 0, e[a] == 1 ? 1 : 0);
    return ConvKernel(pad_zero(k.weights, pads), k.bias);
}

ConvKernel fuse_ecm(const EcmParams& p) {
    p.st.validate();
    ConvKernel fused = embed_kernel(p.st);
    for (const auto* branch : {&p.fl, &p.spb_h, &p.spb_v}) {
        if (!branch->has_value())
            continue;
        const ConvKernel e = embed_kernel(**branch);
        if (e.weights.shape() != fused.weights.shape())
            throw ShapeError("fuse_ecm: branch channel plans disagree");
        fused.weights = elementwise_add(fused.weights, e.weights);
        fused.bias = elementwise_add(fused.bias, e.bias);
    }
    return fused;
}

ModelWeights fuse_model(const ModelWeights& w) {
    if (w.fused())
        throw ModelError("fuse_model: weights are already fused");
    w.validate();

    ModelWeights out;
    out.config = w.config.with_kind(BlockKind::Fused);
    out.seed = w.seed;
    out.bins = w.bins;
    auto fuse_path = [&](const std::vector<Block>& blocks, std::size_t first_index) {
        std::vector<Block> fused;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (out.config.kind_of_block(first_index + i) != BlockKind::Fused)
                fused.push_back(blocks[i]); // plain convolution ahead of the ECM stage
            else
                fused.push_back(Block{BlockKind::Fused, EcmParams{fuse_ecm(blocks[i].params), {}, {}, {}}});
        }
        return fused;
    };
    const std::size_t split = w.config.split_after_block;
    out.stem = fuse_path(w.stem, 0);
    out.low = fuse_path(w.low, split);
    out.high = fuse_path(w.high, split);
    out.validate();
    return out;
}

FusionReport verify_fusion(const ModelWeights& w_multi, const ModelWeights& w_fused, std::size_t probes,
                           std::uint64_t seed, std::size_t frames) {
    if (probes == 0)
        throw ParameterError("verify_fusion: probes must be >= 1");
    if (frames == 0)
        throw ParameterError("verify_fusion: frames must be >= 1");
    if (w_multi.fingerprint() != w_fused.fingerprint())
        throw ModelError("verify_fusion: config mismatch (" + w_multi.fingerprint() + " vs " +
                         w_fused.fingerprint() + ")");

    const ModelConfig& cfg = w_multi.config;
    std::mt19937_64 rng(seed);
    FusionReport r;
    for (std::size_t i = 0; i < probes; ++i) {
        Tensor x{Shape{1, cfg.in_channels, frames, cfg.input_height, cfg.input_width}};
        for (float& v : x.data())
            v = static_cast<float>(static_cast<double>(rng() >> 40) * 0x1p-24);
        const Embedding a = forward(x, w_multi);
        const Embedding b = forward(x, w_fused);
        r.max_abs_divergence = std::max(r.max_abs_divergence, max_abs_diff(a.values, b.values));
        ++r.probes_run;
    }
    r.param_count_before = w_multi.param_count();
    r.param_count_after = w_fused.param_count();
    return r;
}

} // namespace gaitstrip
