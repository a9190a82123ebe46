#include "gaitstrip/model.hpp"

#include "gaitstrip/errors.hpp"
#include "gaitstrip/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

namespace gaitstrip {

namespace {

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join(Extent3 e) { return join(std::vector<std::size_t>(e.begin(), e.end())); }

std::string float_str(float v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : rng_(seed) {}

    void fill_uniform(Tensor& t, std::size_t fan_in) {
        const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (float& v : t.data()) {
            const double u = static_cast<double>(rng_() >> 11) * 0x1p-53; // [0, 1)
            v = static_cast<float>((2.0 * u - 1.0) * bound);
        }
    }

    ConvKernel kernel(std::size_t c_out, std::size_t c_in, Extent3 e) {
        ConvKernel k = zero_kernel(c_out, c_in, e);
        fill_uniform(k.weights, c_in * e[0] * e[1] * e[2]);
        return k;
    }

private:
    std::mt19937_64 rng_; // sequence fixed by the standard
};

template <typename MakeKernel>
Block make_block(BlockKind kind, std::size_t c_in, std::size_t c_out, MakeKernel&& make) {
    Block b{kind, {}};
    b.params.st = make(c_out, c_in, kStExtent);
    if (kind == BlockKind::StFl || kind == BlockKind::FullEcm)
        b.params.fl = make(c_out, c_in, kFlExtent);
    if (kind == BlockKind::FullEcm) {
        b.params.spb_h = make(c_out, c_in, kStripHExtent);
        b.params.spb_v = make(c_out, c_in, kStripVExtent);
    }
    return b;
}

template <typename MakeKernel, typename MakeLinear>
ModelWeights assemble(const ModelConfig& cfg, MakeKernel&& make, MakeLinear&& make_linear) {
    cfg.validate();
    ModelWeights w;
    w.config = cfg;
    const auto& ch = cfg.block_channels;
    auto c_in_of = [&](std::size_t i) { return i == 0 ? cfg.in_channels : ch[i - 1]; };
    for (std::size_t i = 0; i < cfg.split_after_block; ++i)
        w.stem.push_back(make_block(cfg.kind_of_block(i), c_in_of(i), ch[i], make));
    for (std::size_t i = cfg.split_after_block; i < cfg.block_count(); ++i)
        w.low.push_back(make_block(cfg.kind_of_block(i), c_in_of(i), ch[i], make));
    for (std::size_t i = cfg.split_after_block; i < cfg.block_count(); ++i)
        w.high.push_back(make_block(cfg.kind_of_block(i), c_in_of(i), ch[i], make));
    for (std::size_t b = 0; b < cfg.bin_count(); ++b)
        w.bins.push_back(make_linear(cfg.embedding_dim, ch.back()));
    return w;
}

Tensor run_blocks(Tensor h, const std::vector<Block>& blocks, float slope) {
    for (const Block& b : blocks)
        h = leaky_relu(ecm_forward(h, b.params, b.kind), slope);
    return h;
}

// Temporal aggregation, GeM over width, then one linear map per row.
void map_level(const Tensor& features, const std::vector<LinearMap>& bins, std::size_t first_bin, double p,
               Tensor& out) {
    const Tensor pooled = gem_rows(temporal_aggregate(features), p); // (1, C, H)
    const std::size_t C = pooled.dim(1), H = pooled.dim(2);
    const std::size_t d_out = out.dim(1);
    Tensor row{Shape{C}};
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t c = 0; c < C; ++c)
            row[c] = pooled[c * H + h];
        const Tensor y = linear_apply(row, bins[first_bin + h]);
        std::copy(y.data().begin(), y.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>((first_bin + h) * d_out));
    }
}

} // namespace

ModelConfig ModelConfig::casia_b() {
    ModelConfig c;
    c.block_channels = {32, 64, 128, 128};
    c.ecm_from_block = 1;
    return c;
}

ModelConfig ModelConfig::oumvlp() {
    ModelConfig c;
    c.block_channels = {64, 128, 196, 256, 256};
    c.ecm_from_block = 3;
    return c;
}

ModelConfig ModelConfig::preset(std::string_view name) {
    if (name == "casiab")
        return casia_b();
    if (name == "oumvlp")
        return oumvlp();
    throw ParameterError("unknown preset '" + std::string(name) + "' (expected casiab or oumvlp)");
}

void ModelConfig::validate() const {
    if (block_channels.empty())
        throw ModelError("config: at least one block required");
    for (std::size_t c : block_channels)
        if (c == 0)
            throw ModelError("config: block channel counts must be >= 1");
    if (ecm_from_block > block_count())
        throw ModelError("config: ecm_from_block beyond the last block");
    if (split_after_block < 1 || split_after_block > block_count())
        throw ModelError("config: split_after_block must lie in [1, block count]");
    if (embedding_dim == 0 || in_channels == 0)
        throw ModelError("config: embedding_dim and in_channels must be >= 1");
    if (!(gem_p >= 1.0) || !std::isfinite(gem_p))
        throw ModelError("config: gem_p must be finite and >= 1");
    if (!(leaky_slope >= 0.0f && leaky_slope < 1.0f))
        throw ModelError("config: leaky_slope must lie in [0, 1)");
    for (std::size_t a = 0; a < 3; ++a)
        if (highlevel_pool_window[a] == 0 || highlevel_pool_stride[a] == 0)
            throw ModelError("config: pooling window and stride must be >= 1");
    if (highlevel_pool_window[0] != 1)
        throw ModelError("config: the high-level pool must not shrink the temporal axis");
    if (input_height < highlevel_pool_window[1] || input_width < highlevel_pool_window[2])
        throw ModelError("config: input smaller than the high-level pooling window");
}

BlockKind ModelConfig::kind_of_block(std::size_t index) const {
    return index >= ecm_from_block ? block_kind : BlockKind::StOnly;
}

std::size_t ModelConfig::high_bins() const {
    return (input_height - highlevel_pool_window[1]) / highlevel_pool_stride[1] + 1;
}

std::string ModelConfig::canonical() const {
    std::string s;
    s += "block_channels=" + join(block_channels) + "\n";
    s += "ecm_from_block=" + std::to_string(ecm_from_block) + "\n";
    s += "split_after_block=" + std::to_string(split_after_block) + "\n";
    s += "pool_window=" + join(highlevel_pool_window) + "\n";
    s += "pool_stride=" + join(highlevel_pool_stride) + "\n";
    s += "embedding_dim=" + std::to_string(embedding_dim) + "\n";
    s += "gem_p=" + format_double(gem_p) + "\n";
    s += "input_size=" + std::to_string(input_height) + "," + std::to_string(input_width) + "\n";
    s += "in_channels=" + std::to_string(in_channels) + "\n";
    s += "leaky_slope=" + float_str(leaky_slope) + "\n";
    return s;
}

std::string ModelConfig::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ModelConfig ModelConfig::with_kind(BlockKind kind) const {
    ModelConfig c = *this;
    c.block_kind = kind;
    return c;
}

std::size_t ModelWeights::param_count() const {
    std::size_t n = 0;
    for (const auto* path : {&stem, &low, &high})
        for (const Block& b : *path)
            n += b.params.param_count();
    for (const LinearMap& m : bins)
        n += m.param_count();
    return n;
}

void ModelWeights::validate() const {
    config.validate();
    const ModelWeights expected = zero_model(config);
    auto check_path = [](const std::vector<Block>& got, const std::vector<Block>& want, const char* name) {
        if (got.size() != want.size())
            throw ModelError(std::string("weights: ") + name + " path has " + std::to_string(got.size()) +
                             " blocks, config needs " + std::to_string(want.size()));
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].kind != want[i].kind)
                throw ModelError(std::string("weights: ") + name + " block " + std::to_string(i) + " is " +
                                 std::string(to_string(got[i].kind)) + ", config needs " +
                                 std::string(to_string(want[i].kind)));
            got[i].params.validate(got[i].kind);
            if (got[i].params.in_channels() != want[i].params.in_channels() ||
                got[i].params.out_channels() != want[i].params.out_channels())
                throw ModelError(std::string("weights: ") + name + " block " + std::to_string(i) +
                                 " channel plan disagrees with config");
        }
    };
    check_path(stem, expected.stem, "stem");
    check_path(low, expected.low, "low");
    check_path(high, expected.high, "high");
    if (bins.size() != expected.bins.size())
        throw ModelError("weights: " + std::to_string(bins.size()) + " bin maps, config needs " +
                         std::to_string(expected.bins.size()));
    for (const LinearMap& m : bins)
        if (m.weights.shape() != expected.bins.front().weights.shape() ||
            m.bias.shape() != expected.bins.front().bias.shape())
            throw ModelError("weights: bin map shape disagrees with config");
}

ModelWeights build_model(const ModelConfig& cfg, std::uint64_t seed) {
    Initializer init(seed);
    ModelWeights w = assemble(
        cfg, [&](std::size_t c_out, std::size_t c_in, Extent3 e) { return init.kernel(c_out, c_in, e); },
        [&](std::size_t d_out, std::size_t d_in) {
            LinearMap m{Tensor::zeros(Shape{d_out, d_in}), Tensor::zeros(Shape{d_out})};
            init.fill_uniform(m.weights, d_in);
            return m;
        });
    w.seed = seed;
    return w;
}

ModelWeights zero_model(const ModelConfig& cfg) {
    return assemble(
        cfg, [](std::size_t c_out, std::size_t c_in, Extent3 e) { return zero_kernel(c_out, c_in, e); },
        [](std::size_t d_out, std::size_t d_in) {
            return LinearMap{Tensor::zeros(Shape{d_out, d_in}), Tensor::zeros(Shape{d_out})};
        });
}

Tensor temporal_aggregate(const Tensor& x) {
    if (x.rank() != 5)
        throw ShapeError("temporal_aggregate: expected (N,C,T,H,W), got " + x.shape().str());
    return reduce_max(x, 2, /*keep_dim=*/true);
}

Tensor gem_rows(const Tensor& aggregated, double p) {
    if (aggregated.rank() != 5 || aggregated.dim(2) != 1)
        throw ShapeError("gem_rows: expected (N,C,1,H,W), got " + aggregated.shape().str());
    const Tensor pooled = power_mean(aggregated, 4, p); // (N, C, 1, H)
    return pooled.reshaped(Shape{pooled.dim(0), pooled.dim(1), pooled.dim(3)});
}

Embedding forward(const Tensor& x, const ModelWeights& w) {
    const ModelConfig& cfg = w.config;
    if (x.rank() != 5 || x.dim(0) != 1 || x.dim(1) != cfg.in_channels)
        throw ShapeError("forward: expected (1," + std::to_string(cfg.in_channels) + ",T,H,W), got " +
                         x.shape().str());
    if (x.dim(3) != cfg.input_height || x.dim(4) != cfg.input_width)
        throw ShapeError("forward: frames must be " + std::to_string(cfg.input_height) + "x" +
                         std::to_string(cfg.input_width) + ", got " + std::to_string(x.dim(3)) + "x" +
                         std::to_string(x.dim(4)));

    const Tensor shared = run_blocks(x, w.stem, cfg.leaky_slope);
    const Tensor low = run_blocks(shared, w.low, cfg.leaky_slope);
    const Tensor high = run_blocks(maxpool3d(shared, cfg.highlevel_pool_window, cfg.highlevel_pool_stride), w.high,
                                   cfg.leaky_slope);

    Embedding e;
    e.values = Tensor{Shape{cfg.bin_count(), cfg.embedding_dim}};
    map_level(low, w.bins, 0, cfg.gem_p, e.values);
    map_level(high, w.bins, cfg.low_bins(), cfg.gem_p, e.values);
    return e;
}

std::vector<Embedding> forward_batch(const std::vector<Tensor>& xs, const ModelWeights& w) {
    std::vector<Embedding> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        try {
            out.push_back(forward(xs[i], w));
        } catch (const Error& e) {
            throw Error("forward_batch: sequence " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

} // namespace gaitstrip
