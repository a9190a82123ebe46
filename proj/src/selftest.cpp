#include "gaitstrip/selftest.hpp"

#include "gaitstrip/ecm.hpp"
#include "gaitstrip/errors.hpp"
#include "gaitstrip/format.hpp"
#include "gaitstrip/io.hpp"
#include "gaitstrip/metric.hpp"
#include "gaitstrip/model.hpp"
#include "gaitstrip/random.hpp"
#include "gaitstrip/reparam.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace gaitstrip {

namespace {

struct Check {
    const char* name;
    std::function<std::string()> run; // empty string on success, reason otherwise
};

ModelConfig tiny_config() {
    ModelConfig c;
    c.block_channels = {4, 6, 6};
    c.ecm_from_block = 1;
    c.embedding_dim = 8;
    c.input_height = 12;
    c.input_width = 10;
    return c;
}

std::string fusion_per_block() {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const EcmParams p = random_ecm_params(3, 5, BlockKind::FullEcm, rng);
        const Tensor x = random_uniform(Shape{1, 3, 4, 6, 5}, rng);
        worst = std::max(worst, max_abs_diff(ecm_forward(x, p, BlockKind::FullEcm), conv3d(x, fuse_ecm(p))));
    }
    return worst <= 1e-5 ? "" : "divergence " + format_double(worst);
}

std::string fusion_end_to_end() {
    const ModelWeights w = build_model(tiny_config(), 5);
    const FusionReport r = verify_fusion(w, fuse_model(w), 2, 9, 4);
    return r.max_abs_divergence <= 1e-3 ? "" : "divergence " + format_double(r.max_abs_divergence);
}

std::string parameter_parity() {
    const ModelConfig cfg = ModelConfig::casia_b();
    const std::size_t fused = fuse_model(zero_model(cfg)).param_count();
    const std::size_t st_only = zero_model(cfg.with_kind(BlockKind::StOnly)).param_count();
    return fused == st_only ? "" : std::to_string(fused) + " != " + std::to_string(st_only);
}

std::string locality() {
    std::mt19937_64 rng(3);
    const Tensor x = random_uniform(Shape{1, 2, 5, 6, 7}, rng);
    const ConvKernel h = random_kernel(3, 2, kStripHExtent, rng, 1.0f, false);
    const ConvKernel v = random_kernel(3, 2, kStripVExtent, rng, 1.0f, false);
    const ConvKernel f = random_kernel(3, 2, kFlExtent, rng, 1.0f, false);
    Tensor xr = x, xc = x, xt = x;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t i = 0; i < 7; ++i) {
                xr.at({0, c, t, 2, i}) = 0.0f;
                if (i < 6)
                    xc.at({0, c, t, i, 3}) = 0.0f;
            }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 7; ++j)
                xt.at({0, c, 1, i, j}) = 0.0f;
    const Tensor dh = elementwise_add(strip_horizontal(xr, h), scale(strip_horizontal(x, h), -1.0f));
    const Tensor dv = elementwise_add(strip_vertical(xc, v), scale(strip_vertical(x, v), -1.0f));
    const Tensor df = elementwise_add(frame_level(xt, f), scale(frame_level(x, f), -1.0f));
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t i = 0; i < 6; ++i)
                for (std::size_t j = 0; j < 7; ++j) {
                    if (i != 2 && dh.at({0, c, t, i, j}) != 0.0f)
                        return "SPB-H leaked across rows";
                    if (j != 3 && dv.at({0, c, t, i, j}) != 0.0f)
                        return "SPB-V leaked across columns";
                    if (t != 1 && df.at({0, c, t, i, j}) != 0.0f)
                        return "FL leaked across frames";
                }
    return "";
}

std::string gem_properties() {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor x = random_uniform(Shape{16}, rng, 0.0f, 10.0f);
        if (std::abs(power_mean(x, 0, 1.0)[0] - reduce_mean(x, 0)[0]) > 1e-6)
            return "p=1 differs from the mean";
        float prev = 0.0f;
        for (double p : {1.0, 2.0, 4.0, 8.0}) {
            const float v = power_mean(x, 0, p)[0];
            if (v < prev)
                return "not monotone in p";
            prev = v;
        }
        // max * n^(-1/p) <= M_p <= max
        const double mx = reduce_max(x, 0)[0];
        const double m64 = power_mean(x, 0, 64.0)[0];
        if (m64 > mx * (1 + 1e-6) || m64 < mx * std::pow(16.0, -1.0 / 64.0) * (1 - 1e-6))
            return "p=64 outside [max * n^(-1/64), max]";
    }
    return "";
}

std::string aggregation_permutation() {
    std::mt19937_64 rng(8);
    const Tensor x = random_normal(Shape{1, 3, 6, 4, 5}, rng);
    Tensor y(x.shape());
    const std::size_t order[] = {5, 2, 0, 4, 1, 3};
    const std::size_t plane = 4 * 5;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t t = 0; t < 6; ++t)
            for (std::size_t i = 0; i < plane; ++i)
                y[(c * 6 + t) * plane + i] = x[(c * 6 + order[t]) * plane + i];
    return temporal_aggregate(x).bit_equal(temporal_aggregate(y)) ? "" : "aggregation depends on frame order";
}

std::string losses() {
    if (triplet_loss(0.1, 0.5, 0.2) != 0.0 || triplet_loss(0.7, 0.7, 0.2) != 0.2)
        return "triplet loss";
    const Tensor logits = Tensor::zeros(Shape{1, 2});
    const std::uint32_t label[] = {0};
    if (std::abs(cross_entropy(logits, label) - std::log(2.0)) > 1e-6)
        return "uniform cross-entropy";
    return "";
}

std::string sampler() {
    std::vector<std::uint32_t> pool;
    for (std::uint32_t c = 0; c < 12; ++c)
        for (std::uint32_t k = 0; k < 9; ++k)
            pool.push_back(c);
    const SamplerConfig cfg;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto batch = sample_batch(pool, cfg, seed);
        if (batch.size() != cfg.P * cfg.K || batch != sample_batch(pool, cfg, seed))
            return "batch shape or determinism";
    }
    return "";
}

std::string retrieval() {
    std::mt19937_64 rng(4);
    const Tensor g = random_normal(Shape{10, 6}, rng);
    EmbeddingSet s{g, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {}};
    return rank1_accuracy(s, s, false) == 1.0 ? "" : "self retrieval below 1.0";
}

std::string round_trip() {
    const ModelWeights w = build_model(tiny_config(), 77);
    const auto bytes = io::encode_weights(w);
    if (io::encode_weights(io::decode_weights(bytes)) != bytes)
        return "weight file round trip";
    io::EmbeddingFile f{2, 3, {}};
    std::mt19937_64 rng(1);
    f.records.push_back(Embedding{random_normal(Shape{2, 3}, rng), "seq", 4u, ""});
    const auto eb = io::encode_embeddings(f);
    if (io::encode_embeddings(io::decode_embeddings(eb)) != eb)
        return "embedding file round trip";
    return "";
}

} // namespace

bool run_selftest(std::ostream& out) {
    const std::vector<Check> checks = {
        {"fusion_per_block", fusion_per_block},
        {"fusion_end_to_end", fusion_end_to_end},
        {"parameter_parity", parameter_parity},
        {"extractor_locality", locality},
        {"gem_properties", gem_properties},
        {"aggregation_permutation", aggregation_permutation},
        {"loss_values", losses},
        {"sampler_structure", sampler},
        {"self_retrieval", retrieval},
        {"file_round_trip", round_trip},
    };
    bool ok = true;
    for (const Check& c : checks) {
        std::string why;
        try {
            why = c.run();
        } catch (const std::exception& e) {
            why = std::string("threw: ") + e.what();
        }
        out << (why.empty() ? "PASS " : "FAIL ") << c.name << (why.empty() ? "" : ": " + why) << "\n";
        ok = ok && why.empty();
    }
    out << (ok ? "selftest: all checks passed" : "selftest: FAILED") << "\n";
    return ok;
}

} // namespace gaitstrip
