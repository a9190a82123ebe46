#include "gaitstrip/ecm.hpp"

#include "gaitstrip/errors.hpp"

#include <string>
#include <vector>

namespace gaitstrip {

namespace {

std::string extent_str(Extent3 e) {
    return std::to_string(e[0]) + "x" + std::to_string(e[1]) + "x" + std::to_string(e[2]);
}

void require_extent(const ConvKernel& k, Extent3 expected, const char* branch) {
    k.validate();
    if (k.extents() != expected)
        throw ShapeError(std::string(branch) + ": expected " + extent_str(expected) + " kernel, got " +
                         extent_str(k.extents()));
}

void require_branch(const std::optional<ConvKernel>& k, bool wanted, Extent3 extent, const char* branch,
                    BlockKind kind, std::size_t c_in, std::size_t c_out) {
    if (k.has_value() != wanted)
        throw ModelError(std::string(to_string(kind)) + " block " + (wanted ? "requires" : "must not carry") +
                         " a " + branch + " branch");
    if (!wanted)
        return;
    require_extent(*k, extent, branch);
    if (k->in_channels() != c_in || k->out_channels() != c_out)
        throw ShapeError(std::string(branch) + ": channel plan disagrees with the ST branch");
}

} // namespace

std::string_view to_string(BlockKind kind) {
    switch (kind) {
    case BlockKind::StOnly: return "st_only";
    case BlockKind::StFl: return "st_fl";
    case BlockKind::FullEcm: return "full_ecm";
    case BlockKind::Fused: return "fused";
    }
    return "unknown";
}

BlockKind parse_block_kind(std::string_view name) {
    for (BlockKind k : {BlockKind::StOnly, BlockKind::StFl, BlockKind::FullEcm, BlockKind::Fused})
        if (to_string(k) == name)
            return k;
    throw ParameterError("unknown block kind '" + std::string(name) + "'");
}

std::size_t EcmParams::param_count() const {
    std::size_t n = st.param_count();
    for (const auto* k : {&fl, &spb_h, &spb_v})
        if (k->has_value())
            n += (*k)->param_count();
    return n;
}

void EcmParams::validate(BlockKind kind) const {
    require_extent(st, kStExtent, "ST");
    const bool uses_fl = kind == BlockKind::StFl || kind == BlockKind::FullEcm;
    const bool uses_strips = kind == BlockKind::FullEcm;
    require_branch(fl, uses_fl, kFlExtent, "FL", kind, in_channels(), out_channels());
    require_branch(spb_h, uses_strips, kStripHExtent, "SPB-H", kind, in_channels(), out_channels());
    require_branch(spb_v, uses_strips, kStripVExtent, "SPB-V", kind, in_channels(), out_channels());
}

EcmParams zero_ecm_params(std::size_t c_in, std::size_t c_out, BlockKind kind) {
    EcmParams p;
    p.st = zero_kernel(c_out, c_in, kStExtent);
    if (kind == BlockKind::StFl || kind == BlockKind::FullEcm)
        p.fl = zero_kernel(c_out, c_in, kFlExtent);
    if (kind == BlockKind::FullEcm) {
        p.spb_h = zero_kernel(c_out, c_in, kStripHExtent);
        p.spb_v = zero_kernel(c_out, c_in, kStripVExtent);
    }
    return p;
}

Tensor frame_level(const Tensor& x, const ConvKernel& fl) {
    require_extent(fl, kFlExtent, "FL");
    return conv3d(x, fl);
}

Tensor spatial_temporal(const Tensor& x, const ConvKernel& st) {
    require_extent(st, kStExtent, "ST");
    return conv3d(x, st);
}

Tensor strip_horizontal(const Tensor& x, const ConvKernel& k) {
    require_extent(k, kStripHExtent, "SPB-H");
    return conv3d(x, k);
}

Tensor strip_vertical(const Tensor& x, const ConvKernel& k) {
    require_extent(k, kStripVExtent, "SPB-V");
    return conv3d(x, k);
}

Tensor ecm_forward(const Tensor& x, const EcmParams& p, BlockKind kind) {
    if (kind == BlockKind::Fused && (p.fl || p.spb_h || p.spb_v))
        throw ModelError("fused block given multi-branch parameters");
    p.validate(kind);
    if (x.rank() != 5 || x.dim(1) != p.in_channels())
        throw ShapeError("ecm_forward: block expects " + std::to_string(p.in_channels()) +
                         " input channels, input is " + x.shape().str());

    std::vector<const ConvKernel*> branches{&p.st};
    for (const auto* k : {&p.fl, &p.spb_h, &p.spb_v})
        if (k->has_value())
            branches.push_back(&**k);
    return conv3d_sum(x, branches);
}

} // namespace gaitstrip
