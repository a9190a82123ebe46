#pragma once

#include "gaitstrip/model.hpp"
#include "gaitstrip/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gaitstrip {

// Flattened embeddings, one row per sequence.
struct EmbeddingSet {
    Tensor vectors; // (n, D)
    std::vector<std::uint32_t> labels;
    std::vector<std::string> views; // empty, or one tag per row

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return vectors.dim(1); }
    void validate() const;
};

// Stacks embeddings row-wise. Every embedding must carry a label.
EmbeddingSet make_embedding_set(std::span<const Embedding> embeddings);

struct SamplerConfig {
    std::size_t P = 8;   // classes per batch
    std::size_t K = 8;   // samples per class
    std::size_t T = 30;  // frames per training clip
    double margin = 0.2;

    void validate() const;
};

// d[i][j] = ||a_i - b_j||_2, computed in 64-bit.
Tensor euclidean_distance_matrix(const EmbeddingSet& a, const EmbeddingSet& b);

// max(d_pos - d_neg + m, 0)
double triplet_loss(double d_pos, double d_neg, double margin);

struct BatchAllResult {
    double mean_nonzero_loss = 0.0; // 0 when no triple is active
    double active_fraction = 0.0;
    std::size_t triples = 0;
    std::size_t active = 0;
};

// Every (anchor, positive, negative) triple: anchor != positive in one class,
// negative from another class.
BatchAllResult batch_all_triplet_loss(const EmbeddingSet& e, double margin);

// Mean of -log softmax(logits)[label] with max subtraction. logits: (n, classes).
double cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

// Batch-all triplet term plus cross-entropy over externally produced logits.
double combined_loss(const EmbeddingSet& e, const Tensor& logits, double margin);

// P classes x K indices into `labels_pool`, grouped by class. Classes with
// fewer than K members are sampled with replacement.
std::vector<std::size_t> sample_batch(std::span<const std::uint32_t> labels_pool, const SamplerConfig& cfg,
                                      std::uint64_t seed);

// Fraction of probes whose nearest gallery row carries the same label. Ties go
// to the lowest gallery index. With exclude_same_view, gallery rows sharing
// the probe's view tag are skipped.
double rank1_accuracy(const EmbeddingSet& gallery, const EmbeddingSet& probe, bool exclude_same_view);

} // namespace gaitstrip
