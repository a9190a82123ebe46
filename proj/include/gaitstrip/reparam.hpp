#pragma once

#include "gaitstrip/ecm.hpp"
#include "gaitstrip/model.hpp"

#include <cstdint>

namespace gaitstrip {

struct FusionReport {
    double max_abs_divergence = 0.0;
    std::size_t probes_run = 0;
    std::size_t param_count_before = 0;
    std::size_t param_count_after = 0;
};

// Zero-embeds a (1,3,3), (3,1,3), (3,3,1) or (3,3,3) kernel into 3x3x3: the
// original taps land on the central plane of each size-1 axis. Bias is kept.
ConvKernel embed_kernel(const ConvKernel& k);

// One 3x3x3 kernel equal to the sum of the embedded branch kernels; the bias
// is the sum of the branch biases. Accepts any multi-branch kind (ST-only
// params fuse to themselves).
ConvKernel fuse_ecm(const EcmParams& p);

// Rewrites every ECM block of a multi-branch model into a single fused
// convolution. Throws ModelError when `w` is already fused.
ModelWeights fuse_model(const ModelWeights& w);

inline constexpr std::size_t kDefaultProbeFrames = 8;

// Runs both models on `probes` seeded uniform [0, 1) sequences of
// `frames` frames and reports the largest embedding divergence.
FusionReport verify_fusion(const ModelWeights& w_multi, const ModelWeights& w_fused, std::size_t probes,
                           std::uint64_t seed, std::size_t frames = kDefaultProbeFrames);

} // namespace gaitstrip
