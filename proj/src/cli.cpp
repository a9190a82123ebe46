#include "gaitstrip/cli.hpp"

#include "gaitstrip/errors.hpp"
#include "gaitstrip/format.hpp"
#include "gaitstrip/io.hpp"
#include "gaitstrip/metric.hpp"
#include "gaitstrip/model.hpp"
#include "gaitstrip/reparam.hpp"
#include "gaitstrip/selftest.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <optional>

namespace gaitstrip {

namespace {

struct Options {
    std::string preset = "casiab";
    std::string kind = "full_ecm";
    std::uint64_t seed = 0;
    std::size_t dim = 128;
    std::string in, out, weights, seq, gallery, probe, id, view;
    std::optional<std::uint32_t> label;
    bool verify = false;
    std::size_t probes = 1;
    std::size_t frames = kDefaultProbeFrames;
    bool binarize = false;
    bool exclude_same_view = false;
    std::size_t repeat = 10;
};

int cmd_init(const Options& o, std::ostream& out) {
    ModelConfig cfg = ModelConfig::preset(o.preset).with_kind(parse_block_kind(o.kind));
    if (cfg.block_kind == BlockKind::Fused)
        throw ParameterError("init builds multi-branch weights; use 'fuse' to obtain fused ones");
    cfg.embedding_dim = o.dim;
    const ModelWeights w = build_model(cfg, o.seed);
    io::save_weights(w, o.out);
    out << "fingerprint=" << w.fingerprint() << " params=" << w.param_count() << "\n";
    return 0;
}

int cmd_fuse(const Options& o, std::ostream& out) {
    const ModelWeights w = io::load_weights(o.in);
    const ModelWeights fused = fuse_model(w);
    io::save_weights(fused, o.out);
    if (o.verify) {
        const FusionReport r = verify_fusion(w, fused, o.probes, o.seed, o.frames);
        out << "max_abs_divergence=" << format_double(r.max_abs_divergence) << " probes=" << r.probes_run
            << " params_before=" << r.param_count_before << " params_after=" << r.param_count_after << "\n";
    } else {
        out << "params_before=" << w.param_count() << " params_after=" << fused.param_count() << "\n";
    }
    return 0;
}

int cmd_infer(const Options& o, std::ostream& out) {
    const ModelWeights w = io::load_weights(o.weights);
    const Tensor x = io::load_sequence(o.seq, o.binarize, w.config.input_height, w.config.input_width);
    Embedding e = forward(x, w);
    e.id = o.id.empty() ? std::filesystem::path(o.seq).lexically_normal().filename().string() : o.id;
    if (e.id.empty())
        e.id = std::filesystem::path(o.seq).lexically_normal().parent_path().filename().string();
    e.label = o.label;
    e.view = o.view;
    io::append_embedding(e, o.out);
    out << "id=" << e.id << " frames=" << x.dim(2) << " bins=" << e.values.dim(0) << " dim=" << e.values.dim(1)
        << "\n";
    return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
    const io::EmbeddingFile g = io::load_embeddings(o.gallery);
    const io::EmbeddingFile p = io::load_embeddings(o.probe);
    const double r1 = rank1_accuracy(make_embedding_set(g.records), make_embedding_set(p.records),
                                     o.exclude_same_view);
    out << "rank1=" << format_double(r1) << "\n";
    return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
    if (o.repeat == 0)
        throw ParameterError("--repeat must be >= 1");
    const ModelWeights w = io::load_weights(o.weights);
    if (w.fused())
        throw ModelError("bench needs multi-branch weights to compare against their fused form");
    const ModelWeights fused = fuse_model(w);
    const Tensor x = io::load_sequence(o.seq, o.binarize, w.config.input_height, w.config.input_width);

    auto mean_seconds = [&](const ModelWeights& weights) {
        double total = 0.0;
        for (std::size_t i = 0; i < o.repeat; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            const Embedding e = forward(x, weights);
            total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
        return total / static_cast<double>(o.repeat);
    };
    const double unfused_s = mean_seconds(w);
    const double fused_s = mean_seconds(fused);
    out << "unfused_s=" << format_double(unfused_s) << " fused_s=" << format_double(fused_s)
        << " speedup=" << format_double(unfused_s / fused_s) << " frames=" << x.dim(2) << " repeat=" << o.repeat
        << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GaitStrip gait-recognition network: inference, re-parameterization and evaluation", "gaitstrip"};
    app.require_subcommand(1);
    Options o;

    auto* init = app.add_subcommand("init", "Build seeded multi-branch weights");
    init->add_option("--config", o.preset, "Architecture preset")->check(CLI::IsMember({"casiab", "oumvlp"}))->required();
    init->add_option("--seed", o.seed, "Initialization seed")->required();
    init->add_option("--out", o.out, "Output weight file")->required();
    init->add_option("--kind", o.kind, "ECM block kind")->check(CLI::IsMember({"st_only", "st_fl", "full_ecm"}));
    init->add_option("--dim", o.dim, "Embedding dimension per bin")->check(CLI::PositiveNumber);

    auto* fuse = app.add_subcommand("fuse", "Re-parameterize multi-branch weights into single convolutions");
    fuse->add_option("--in", o.in, "Multi-branch weight file")->required();
    fuse->add_option("--out", o.out, "Fused weight file")->required();
    fuse->add_flag("--verify", o.verify, "Compare both forms on random probe sequences");
    fuse->add_option("--probes", o.probes, "Number of probe sequences")->check(CLI::PositiveNumber);
    fuse->add_option("--frames", o.frames, "Frames per probe sequence")->check(CLI::PositiveNumber);
    fuse->add_option("--seed", o.seed, "Probe seed");

    auto* infer = app.add_subcommand("infer", "Embed one silhouette sequence and append it to an embedding file");
    infer->add_option("--weights", o.weights, "Weight file")->required();
    infer->add_option("--seq", o.seq, "Directory of P5 PGM frames")->required();
    infer->add_option("--out", o.out, "Embedding file (created or appended)")->required();
    infer->add_option("--id", o.id, "Record id (default: directory name)");
    infer->add_option("--label", o.label, "Subject label");
    infer->add_option("--view", o.view, "View tag");
    infer->add_flag("--binarize", o.binarize, "Threshold pixels at 0.5");

    auto* eval = app.add_subcommand("eval", "Rank-1 accuracy of probe embeddings against a gallery");
    eval->add_option("--gallery", o.gallery, "Gallery embedding file")->required();
    eval->add_option("--probe", o.probe, "Probe embedding file")->required();
    eval->add_flag("--exclude-same-view", o.exclude_same_view, "Skip gallery entries sharing the probe view");

    auto* bench = app.add_subcommand("bench", "Time multi-branch vs fused inference");
    bench->add_option("--weights", o.weights, "Multi-branch weight file")->required();
    bench->add_option("--seq", o.seq, "Directory of P5 PGM frames")->required();
    bench->add_option("--repeat", o.repeat, "Timed forwards per form")->check(CLI::PositiveNumber);
    bench->add_flag("--binarize", o.binarize, "Threshold pixels at 0.5");

    auto* selftest = app.add_subcommand("selftest", "Run the invariant self-test");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 2;
    }

    try {
        if (init->parsed())
            return cmd_init(o, out);
        if (fuse->parsed())
            return cmd_fuse(o, out);
        if (infer->parsed())
            return cmd_infer(o, out);
        if (eval->parsed())
            return cmd_eval(o, out);
        if (bench->parsed())
            return cmd_bench(o, out);
        if (selftest->parsed())
            return run_selftest(out) ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace gaitstrip
