#pragma once

#include "gaitstrip/model.hpp"
#include "gaitstrip/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gaitstrip::io {

// Weight file layout (all integers little-endian):
//   "GSTRIPW1" | u32 header_len | header (UTF-8 key=value lines)
//   | u32 tensor_count | per tensor: u16 name_len, name, u8 rank, u32 dims[rank], f32 data
inline constexpr char kWeightMagic[] = "GSTRIPW1";
inline constexpr std::uint32_t kWeightFormatVersion = 1;

// Embedding file layout:
//   "GSTRIPE1" | u32 bins | u32 dim | u32 count
//   | per record: u16 id_len, id, u32 label, u16 view_len, view, f32 data[bins * dim]
inline constexpr char kEmbeddingMagic[] = "GSTRIPE1";
// Label value written for embeddings without a label.
inline constexpr std::uint32_t kNoLabel = 0xFFFFFFFFu;

std::vector<std::uint8_t> encode_weights(const ModelWeights& w);
ModelWeights decode_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelWeights& w, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);
// Also rejects files whose fingerprint differs from `expected`.
ModelWeights load_weights(const std::filesystem::path& path, const ModelConfig& expected);

struct EmbeddingFile {
    std::uint32_t bins = 0;
    std::uint32_t dim = 0;
    std::vector<Embedding> records;
};

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& f);
EmbeddingFile decode_embeddings(const std::vector<std::uint8_t>& bytes);

void save_embeddings(const EmbeddingFile& f, const std::filesystem::path& path);
EmbeddingFile load_embeddings(const std::filesystem::path& path);
// Creates the file when absent; otherwise the record must match its bins/dim.
void append_embedding(const Embedding& e, const std::filesystem::path& path);

// Binary (P5) PGM, 8-bit.
struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;
};

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

// Frames of `dir` in lexicographic filename order -> (1, 1, T, height, width),
// pixel p -> p / 255, optionally thresholded at 0.5.
Tensor load_sequence(const std::filesystem::path& dir, bool binarize, std::size_t height = 64,
                     std::size_t width = 44);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

} // namespace gaitstrip::io
