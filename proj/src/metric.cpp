#include "gaitstrip/metric.hpp"

#include "gaitstrip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace gaitstrip {

namespace {

double squared_distance(const float* a, const float* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += diff * diff;
    }
    return acc;
}

const float* row_of(const EmbeddingSet& s, std::size_t i) { return s.vectors.data().data() + i * s.dim(); }

// Unbiased integer in [0, n) by rejection.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return static_cast<std::size_t>(r % range);
}

} // namespace

void EmbeddingSet::validate() const {
    if (vectors.rank() != 2)
        throw ShapeError("EmbeddingSet: vectors must be (n, D), got " + vectors.shape().str());
    if (vectors.dim(0) != labels.size())
        throw ShapeError("EmbeddingSet: " + std::to_string(vectors.dim(0)) + " rows but " +
                         std::to_string(labels.size()) + " labels");
    if (!views.empty() && views.size() != labels.size())
        throw ShapeError("EmbeddingSet: view tags do not match row count");
}

EmbeddingSet make_embedding_set(std::span<const Embedding> embeddings) {
    if (embeddings.empty())
        throw ShapeError("make_embedding_set: no embeddings");
    const std::size_t D = embeddings.front().values.numel();
    EmbeddingSet s;
    std::vector<float> data;
    data.reserve(D * embeddings.size());
    for (const Embedding& e : embeddings) {
        if (e.values.numel() != D)
            throw ShapeError("make_embedding_set: embedding '" + e.id + "' has a different size");
        if (!e.label)
            throw ParameterError("make_embedding_set: embedding '" + e.id + "' has no label");
        data.insert(data.end(), e.values.data().begin(), e.values.data().end());
        s.labels.push_back(*e.label);
        s.views.push_back(e.view);
    }
    s.vectors = Tensor(Shape{embeddings.size(), D}, std::move(data));
    return s;
}

void SamplerConfig::validate() const {
    if (P == 0 || K == 0 || T == 0)
        throw ParameterError("SamplerConfig: P, K and T must be >= 1");
    if (!(margin > 0.0))
        throw ParameterError("SamplerConfig: margin must be > 0");
}

Tensor euclidean_distance_matrix(const EmbeddingSet& a, const EmbeddingSet& b) {
    a.validate();
    b.validate();
    if (a.dim() != b.dim())
        throw ShapeError("euclidean_distance_matrix: dimension " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
    Tensor d{Shape{a.size(), b.size()}};
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            d[i * b.size() + j] = static_cast<float>(std::sqrt(squared_distance(row_of(a, i), row_of(b, j), a.dim())));
    return d;
}

double triplet_loss(double d_pos, double d_neg, double margin) {
    if (margin < 0.0)
        throw ParameterError("triplet_loss: margin must be >= 0");
    if (d_pos < 0.0 || d_neg < 0.0)
        throw ParameterError("triplet_loss: distances must be >= 0");
    return std::max(d_pos - d_neg + margin, 0.0);
}

BatchAllResult batch_all_triplet_loss(const EmbeddingSet& e, double margin) {
    e.validate();
    const std::size_t n = e.size();
    std::vector<double> dist(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            dist[i * n + j] = std::sqrt(squared_distance(row_of(e, i), row_of(e, j), e.dim()));

    BatchAllResult r;
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t p = 0; p < n; ++p) {
            if (p == a || e.labels[p] != e.labels[a])
                continue;
            for (std::size_t q = 0; q < n; ++q) {
                if (e.labels[q] == e.labels[a])
                    continue;
                const double l = triplet_loss(dist[a * n + p], dist[a * n + q], margin);
                ++r.triples;
                if (l > 0.0) {
                    ++r.active;
                    total += l;
                }
            }
        }
    if (r.triples == 0)
        throw ParameterError("batch_all_triplet_loss: no valid triple (need two classes and a repeated class)");
    r.mean_nonzero_loss = r.active ? total / static_cast<double>(r.active) : 0.0;
    r.active_fraction = static_cast<double>(r.active) / static_cast<double>(r.triples);
    return r;
}

double cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels) {
    if (logits.rank() != 2)
        throw ShapeError("cross_entropy: logits must be (n, classes), got " + logits.shape().str());
    const std::size_t n = logits.dim(0), classes = logits.dim(1);
    if (labels.size() != n)
        throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) +
                         " rows");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= classes)
            throw ParameterError("cross_entropy: label " + std::to_string(labels[i]) + " out of range [0, " +
                                 std::to_string(classes) + ")");
        const float* row = logits.data().data() + i * classes;
        const double peak = *std::max_element(row, row + classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c)
            sum += std::exp(static_cast<double>(row[c]) - peak);
        total += std::log(sum) - (static_cast<double>(row[labels[i]]) - peak);
    }
    return total / static_cast<double>(n);
}

double combined_loss(const EmbeddingSet& e, const Tensor& logits, double margin) {
    return batch_all_triplet_loss(e, margin).mean_nonzero_loss + cross_entropy(logits, e.labels);
}

std::vector<std::size_t> sample_batch(std::span<const std::uint32_t> labels_pool, const SamplerConfig& cfg,
                                      std::uint64_t seed) {
    cfg.validate();
    std::map<std::uint32_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels_pool.size(); ++i)
        members[labels_pool[i]].push_back(i);
    if (members.size() < cfg.P)
        throw ParameterError("sample_batch: need " + std::to_string(cfg.P) + " classes, pool has " +
                             std::to_string(members.size()));

    std::vector<const std::vector<std::size_t>*> classes;
    for (const auto& [label, idx] : members)
        classes.push_back(&idx);

    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first P entries become the chosen classes.
    for (std::size_t i = 0; i < cfg.P; ++i)
        std::swap(classes[i], classes[i + uniform_index(rng, classes.size() - i)]);

    std::vector<std::size_t> batch;
    batch.reserve(cfg.P * cfg.K);
    for (std::size_t c = 0; c < cfg.P; ++c) {
        std::vector<std::size_t> pool = *classes[c];
        if (pool.size() >= cfg.K) {
            for (std::size_t k = 0; k < cfg.K; ++k) {
                std::swap(pool[k], pool[k + uniform_index(rng, pool.size() - k)]);
                batch.push_back(pool[k]);
            }
        } else {
            for (std::size_t k = 0; k < cfg.K; ++k)
                batch.push_back(pool[uniform_index(rng, pool.size())]);
        }
    }
    return batch;
}

double rank1_accuracy(const EmbeddingSet& gallery, const EmbeddingSet& probe, bool exclude_same_view) {
    gallery.validate();
    probe.validate();
    if (gallery.size() == 0 || probe.size() == 0)
        throw ParameterError("rank1_accuracy: gallery and probe must be non-empty");
    if (gallery.dim() != probe.dim())
        throw ShapeError("rank1_accuracy: dimension " + std::to_string(gallery.dim()) + " vs " +
                         std::to_string(probe.dim()));
    if (exclude_same_view && (gallery.views.empty() || probe.views.empty()))
        throw ParameterError("rank1_accuracy: view exclusion needs view tags on both sets");

    std::size_t hits = 0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = gallery.size();
        for (std::size_t j = 0; j < gallery.size(); ++j) {
            if (exclude_same_view && gallery.views[j] == probe.views[i])
                continue;
            const double d = squared_distance(row_of(probe, i), row_of(gallery, j), probe.dim());
            if (d < best || best_j == gallery.size()) {
                best = d;
                best_j = j;
            }
        }
        if (best_j == gallery.size())
            throw ParameterError("rank1_accuracy: probe " + std::to_string(i) +
                                 " has no gallery candidate after view exclusion");
        if (gallery.labels[best_j] == probe.labels[i])
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(probe.size());
}

} // namespace gaitstrip
