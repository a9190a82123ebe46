#pragma once

#include "gaitstrip/ecm.hpp"
#include "gaitstrip/nn_ops.hpp"
#include "gaitstrip/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gaitstrip {

// Architecture plan. Blocks [0, split_after_block) form the shared stem; the
// remaining blocks exist twice, once on the full-resolution (low-level) path
// and once on the max-pooled (high-level) path. Blocks with index >=
// ecm_from_block use `block_kind`, earlier ones are plain 3x3x3 convolutions.
struct ModelConfig {
    std::vector<std::size_t> block_channels;
    std::size_t ecm_from_block = 1;
    BlockKind block_kind = BlockKind::FullEcm;
    std::size_t split_after_block = 1;
    Extent3 highlevel_pool_window{1, 2, 2};
    Extent3 highlevel_pool_stride{1, 2, 2};
    std::size_t embedding_dim = 128;
    double gem_p = 6.5;
    std::size_t input_height = 64;
    std::size_t input_width = 44;
    std::size_t in_channels = 1;
    float leaky_slope = 0.01f;

    static ModelConfig casia_b();
    static ModelConfig oumvlp();
    // Named preset: "casiab" or "oumvlp".
    static ModelConfig preset(std::string_view name);

    void validate() const;

    std::size_t block_count() const { return block_channels.size(); }
    BlockKind kind_of_block(std::size_t index) const;
    std::size_t low_bins() const { return input_height; }
    std::size_t high_bins() const;
    std::size_t bin_count() const { return low_bins() + high_bins(); }

    // Architecture description as key=value lines. The block kind is left out:
    // multi-branch and fused weights of one architecture share a fingerprint.
    std::string canonical() const;
    // 16 hex digits of the 64-bit FNV-1a hash of canonical().
    std::string fingerprint() const;

    // Same architecture with a different block kind.
    ModelConfig with_kind(BlockKind kind) const;
};

struct Block {
    BlockKind kind = BlockKind::StOnly;
    EcmParams params;
};

struct ModelWeights {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::vector<Block> stem; // shared blocks before the split
    std::vector<Block> low;  // full-resolution path
    std::vector<Block> high; // pooled path
    std::vector<LinearMap> bins; // low-level rows first, then high-level rows

    bool fused() const { return config.block_kind == BlockKind::Fused; }
    std::string fingerprint() const { return config.fingerprint(); }
    std::size_t param_count() const;

    // Checks every tensor shape against the config.
    void validate() const;
};

struct Embedding {
    Tensor values; // (bins, embedding_dim)
    std::string id;
    std::optional<std::uint32_t> label;
    std::string view;
};

// Deterministic init: kernel and linear weights ~ U(-b, b), b = sqrt(1 / fan_in),
// biases zero. Bit-identical for equal (cfg, seed) on every platform.
ModelWeights build_model(const ModelConfig& cfg, std::uint64_t seed);

// All-zero weights for `cfg`.
ModelWeights zero_model(const ModelConfig& cfg);

// Elementwise max over frames: (N, C, T, H, W) -> (N, C, 1, H, W).
Tensor temporal_aggregate(const Tensor& x);

// GeM over the width of each (channel, row): (N, C, 1, H, W) -> (N, C, H).
Tensor gem_rows(const Tensor& aggregated, double p);

// Silhouette sequence (1, C, T, H, W) -> embedding with bin_count() rows.
Embedding forward(const Tensor& x, const ModelWeights& w);

std::vector<Embedding> forward_batch(const std::vector<Tensor>& xs, const ModelWeights& w);

} // namespace gaitstrip
