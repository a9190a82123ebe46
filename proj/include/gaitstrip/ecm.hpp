#pragma once

#include "gaitstrip/nn_ops.hpp"

#include <optional>
#include <string_view>

namespace gaitstrip {

// Which extractors a block sums. Fused carries one 3x3x3 kernel obtained by
// re-parameterizing a multi-branch block.
enum class BlockKind { StOnly, StFl, FullEcm, Fused };

std::string_view to_string(BlockKind kind);
BlockKind parse_block_kind(std::string_view name);

inline constexpr Extent3 kStExtent{3, 3, 3};
inline constexpr Extent3 kFlExtent{1, 3, 3};
inline constexpr Extent3 kStripHExtent{3, 1, 3};
inline constexpr Extent3 kStripVExtent{3, 3, 1};

// Branch kernels of one block. `st` is always present (for Fused it holds the
// merged kernel); the others are present exactly when the kind uses them.
struct EcmParams {
    ConvKernel st;
    std::optional<ConvKernel> fl;
    std::optional<ConvKernel> spb_h;
    std::optional<ConvKernel> spb_v;

    std::size_t in_channels() const { return st.in_channels(); }
    std::size_t out_channels() const { return st.out_channels(); }
    std::size_t param_count() const;

    // Checks branch presence for `kind`, kernel extents and channel agreement.
    void validate(BlockKind kind) const;
};

// Zero-initialized parameters with the branches `kind` requires.
EcmParams zero_ecm_params(std::size_t c_in, std::size_t c_out, BlockKind kind);

// Individual extractors. Each checks its kernel extents before convolving.
Tensor frame_level(const Tensor& x, const ConvKernel& fl);
Tensor spatial_temporal(const Tensor& x, const ConvKernel& st);
Tensor strip_horizontal(const Tensor& x, const ConvKernel& k);
Tensor strip_vertical(const Tensor& x, const ConvKernel& k);

// Sum of the branches selected by `kind`, accumulated in the order
// ST, FL, SPB-H, SPB-V. No activation is applied.
Tensor ecm_forward(const Tensor& x, const EcmParams& p, BlockKind kind);

} // namespace gaitstrip
