#include "gaitstrip/io.hpp"

#include "gaitstrip/errors.hpp"
#include "gaitstrip/format.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>

namespace gaitstrip::io {

namespace {

class ByteWriter {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        for (int i = 0; i < 2; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void str16(const std::string& s) {
        if (s.size() > 0xFFFF)
            throw FormatError("string longer than 65535 bytes cannot be stored");
        u16(static_cast<std::uint16_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void floats(std::span<const float> v) {
        for (float f : v)
            f32(f);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& b) : buf_(b) {}

    // Every read names what it was reading so truncation errors are specific.
    void need(std::size_t n, const std::string& what) const {
        if (buf_.size() - pos_ < n)
            throw TruncatedError("truncated file: " + what + " needs " + std::to_string(n) + " bytes, " +
                                 std::to_string(buf_.size() - pos_) + " left");
    }
    std::uint8_t u8(const std::string& what) {
        need(1, what);
        return buf_[pos_++];
    }
    std::uint16_t u16(const std::string& what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const std::string& what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::string str(std::size_t n, const std::string& what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::string str16(const std::string& what) { return str(u16(what + " length"), what); }
    void floats(std::span<float> dst, const std::string& what) {
        need(dst.size() * 4, what);
        for (float& f : dst) {
            std::uint32_t v = 0;
            for (int i = 0; i < 4; ++i)
                v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
            f = std::bit_cast<float>(v);
            pos_ += 4;
        }
    }
    void magic(const char* expected) {
        const std::size_t n = std::strlen(expected);
        const std::size_t have = std::min(n, buf_.size() - pos_);
        if (std::memcmp(buf_.data() + pos_, expected, have) != 0)
            throw BadMagicError(std::string("bad magic: expected \"") + expected + "\"");
        need(n, "magic");
        pos_ += n;
    }
    bool at_end() const { return pos_ == buf_.size(); }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

template <typename Kernel, typename Fn>
void visit_kernel(Kernel& k, const std::string& prefix, Fn&& fn) {
    fn(prefix + ".weight", k.weights);
    fn(prefix + ".bias", k.bias);
}

template <typename Blocks, typename Fn>
void visit_path(Blocks& blocks, const std::string& path, std::size_t first_index, Fn&& fn) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string prefix = path + "." + std::to_string(first_index + i);
        auto& p = blocks[i].params;
        visit_kernel(p.st, prefix + ".st", fn);
        if (p.fl)
            visit_kernel(*p.fl, prefix + ".fl", fn);
        if (p.spb_h)
            visit_kernel(*p.spb_h, prefix + ".spb_h", fn);
        if (p.spb_v)
            visit_kernel(*p.spb_v, prefix + ".spb_v", fn);
    }
}

// Stable tensor order shared by the writer and the reader.
template <typename Weights, typename Fn>
void visit_tensors(Weights& w, Fn&& fn) {
    visit_path(w.stem, "stem", 0, fn);
    visit_path(w.low, "low", w.config.split_after_block, fn);
    visit_path(w.high, "high", w.config.split_after_block, fn);
    for (std::size_t b = 0; b < w.bins.size(); ++b) {
        fn("bins." + std::to_string(b) + ".weight", w.bins[b].weights);
        fn("bins." + std::to_string(b) + ".bias", w.bins[b].bias);
    }
}

std::string header_text(const ModelWeights& w) {
    std::string h;
    h += "format_version=" + std::to_string(kWeightFormatVersion) + "\n";
    h += "fingerprint=" + w.fingerprint() + "\n";
    h += std::string("fused=") + (w.fused() ? "1" : "0") + "\n";
    h += "seed=" + std::to_string(w.seed) + "\n";
    h += "block_kind=" + std::string(to_string(w.config.block_kind)) + "\n";
    h += w.config.canonical();
    return h;
}

std::uint64_t parse_uint(std::string_view s, const std::string& key) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("header: malformed integer for '" + key + "': '" + std::string(s) + "'");
    return v;
}

std::vector<std::size_t> parse_list(std::string_view s, const std::string& key) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        out.push_back(parse_uint(s.substr(start, comma - start), key));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

Extent3 parse_extent(std::string_view s, const std::string& key) {
    const auto v = parse_list(s, key);
    if (v.size() != 3)
        throw FormatError("header: '" + key + "' needs three values");
    return {v[0], v[1], v[2]};
}

struct ParsedHeader {
    ModelConfig config;
    std::string fingerprint;
    bool fused = false;
    std::uint64_t seed = 0;
};

ParsedHeader parse_header(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos)
            end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("header: line without '=': '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw FormatError("header: missing key '" + key + "'");
        return it->second;
    };

    if (parse_uint(get("format_version"), "format_version") != kWeightFormatVersion)
        throw FormatError("unsupported weight format version " + get("format_version"));

    ParsedHeader h;
    h.fingerprint = get("fingerprint");
    h.fused = get("fused") == "1";
    h.seed = parse_uint(get("seed"), "seed");
    try {
        ModelConfig& c = h.config;
        c.block_kind = parse_block_kind(get("block_kind"));
        c.block_channels = parse_list(get("block_channels"), "block_channels");
        c.ecm_from_block = parse_uint(get("ecm_from_block"), "ecm_from_block");
        c.split_after_block = parse_uint(get("split_after_block"), "split_after_block");
        c.highlevel_pool_window = parse_extent(get("pool_window"), "pool_window");
        c.highlevel_pool_stride = parse_extent(get("pool_stride"), "pool_stride");
        c.embedding_dim = parse_uint(get("embedding_dim"), "embedding_dim");
        c.gem_p = parse_double(get("gem_p"));
        const auto size = parse_list(get("input_size"), "input_size");
        if (size.size() != 2)
            throw FormatError("header: 'input_size' needs two values");
        c.input_height = size[0];
        c.input_width = size[1];
        c.in_channels = parse_uint(get("in_channels"), "in_channels");
        c.leaky_slope = parse_float(get("leaky_slope"));
        c.validate();
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(std::string("header: ") + e.what());
    }
    if (h.fused != (h.config.block_kind == BlockKind::Fused))
        throw FormatError("header: fused flag disagrees with block_kind");
    return h;
}

} // namespace

std::vector<std::uint8_t> encode_weights(const ModelWeights& w) {
    w.validate();
    ByteWriter out;
    out.bytes(kWeightMagic, 8);
    const std::string header = header_text(w);
    out.u32(static_cast<std::uint32_t>(header.size()));
    out.bytes(header.data(), header.size());

    std::uint32_t count = 0;
    visit_tensors(w, [&](const std::string&, const Tensor&) { ++count; });
    out.u32(count);
    visit_tensors(w, [&](const std::string& name, const Tensor& t) {
        out.str16(name);
        out.u8(static_cast<std::uint8_t>(t.rank()));
        for (std::size_t d : t.shape().dims())
            out.u32(static_cast<std::uint32_t>(d));
        out.floats(t.data());
    });
    return out.take();
}

ModelWeights decode_weights(const std::vector<std::uint8_t>& bytes) {
    ByteReader in(bytes);
    in.magic(kWeightMagic);
    const std::uint32_t header_len = in.u32("header length");
    const ParsedHeader h = parse_header(in.str(header_len, "header"));
    if (h.config.fingerprint() != h.fingerprint)
        throw FingerprintMismatchError("fingerprint mismatch: header records " + h.fingerprint +
                                       ", config hashes to " + h.config.fingerprint());

    ModelWeights w = zero_model(h.config);
    w.seed = h.seed;
    std::vector<std::pair<std::string, Tensor*>> expected;
    visit_tensors(w, [&](const std::string& name, Tensor& t) { expected.emplace_back(name, &t); });

    const std::uint32_t count = in.u32("tensor count");
    if (count != expected.size())
        throw FormatError("file holds " + std::to_string(count) + " tensors, config needs " +
                          std::to_string(expected.size()));
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& [want_name, tensor] = expected[i];
        const std::string where = "tensor #" + std::to_string(i) + " ('" + want_name + "')";
        const std::string name = in.str16(where + " name");
        if (name != want_name)
            throw FormatError("unexpected tensor '" + name + "', expected '" + want_name + "'");
        const std::size_t rank = in.u8(where + " rank");
        std::vector<std::size_t> dims(rank);
        for (std::size_t& d : dims)
            d = in.u32(where + " dims");
        if (dims != tensor->shape().dims())
            throw FormatError("tensor '" + name + "' has shape " +
                              (rank ? Shape(dims).str() : std::string("()")) + ", expected " +
                              tensor->shape().str());
        in.floats(tensor->data(), "tensor '" + name + "' data");
    }
    if (!in.at_end())
        throw FormatError("trailing bytes after the last tensor");
    return w;
}

void save_weights(const ModelWeights& w, const std::filesystem::path& path) { write_file(path, encode_weights(w)); }

ModelWeights load_weights(const std::filesystem::path& path) { return decode_weights(read_file(path)); }

ModelWeights load_weights(const std::filesystem::path& path, const ModelConfig& expected) {
    ModelWeights w = load_weights(path);
    if (w.fingerprint() != expected.fingerprint())
        throw FingerprintMismatchError("fingerprint mismatch: " + path.string() + " was written for " +
                                       w.fingerprint() + ", loading config is " + expected.fingerprint());
    return w;
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& f) {
    ByteWriter out;
    out.bytes(kEmbeddingMagic, 8);
    out.u32(f.bins);
    out.u32(f.dim);
    out.u32(static_cast<std::uint32_t>(f.records.size()));
    for (const Embedding& e : f.records) {
        if (e.values.numel() != std::size_t{f.bins} * f.dim)
            throw ShapeError("embedding '" + e.id + "' does not match file shape " + std::to_string(f.bins) + "x" +
                             std::to_string(f.dim));
        if (e.label && *e.label == kNoLabel)
            throw ParameterError("label " + std::to_string(kNoLabel) + " is reserved for 'no label'");
        out.str16(e.id);
        out.u32(e.label.value_or(kNoLabel));
        out.str16(e.view);
        out.floats(e.values.data());
    }
    return out.take();
}

EmbeddingFile decode_embeddings(const std::vector<std::uint8_t>& bytes) {
    ByteReader in(bytes);
    in.magic(kEmbeddingMagic);
    EmbeddingFile f;
    f.bins = in.u32("bins");
    f.dim = in.u32("dim");
    const std::uint32_t count = in.u32("record count");
    if (f.bins == 0 || f.dim == 0)
        throw FormatError("embedding file declares an empty embedding shape");
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::string where = "record #" + std::to_string(r);
        Embedding e;
        e.id = in.str16(where + " id");
        const std::uint32_t label = in.u32(where + " label");
        if (label != kNoLabel)
            e.label = label;
        e.view = in.str16(where + " view");
        e.values = Tensor{Shape{f.bins, f.dim}};
        in.floats(e.values.data(), where + " ('" + e.id + "') data");
        f.records.push_back(std::move(e));
    }
    if (!in.at_end())
        throw FormatError("trailing bytes after the last embedding record");
    return f;
}

void save_embeddings(const EmbeddingFile& f, const std::filesystem::path& path) {
    write_file(path, encode_embeddings(f));
}

EmbeddingFile load_embeddings(const std::filesystem::path& path) { return decode_embeddings(read_file(path)); }

void append_embedding(const Embedding& e, const std::filesystem::path& path) {
    if (e.values.rank() != 2)
        throw ShapeError("append_embedding: values must be (bins, dim), got " + e.values.shape().str());
    EmbeddingFile f;
    if (std::filesystem::exists(path)) {
        f = load_embeddings(path);
        if (f.bins != e.values.dim(0) || f.dim != e.values.dim(1))
            throw ShapeError("append_embedding: " + path.string() + " holds " + std::to_string(f.bins) + "x" +
                             std::to_string(f.dim) + " embeddings, new one is " + e.values.shape().str());
    } else {
        f.bins = static_cast<std::uint32_t>(e.values.dim(0));
        f.dim = static_cast<std::uint32_t>(e.values.dim(1));
    }
    f.records.push_back(e);
    save_embeddings(f, path);
}

GrayImage read_pgm(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    const std::string name = path.string();
    std::size_t pos = 0;
    auto fail = [&](const std::string& why) -> FormatError { return FormatError(name + ": not a P5 PGM (" + why + ")"); };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw fail("missing P5 signature");
    pos = 2;
    auto next_int = [&](const char* what) {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n')
                    ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t v = 0;
        const std::size_t begin = pos;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9')
            v = v * 10 + (bytes[pos++] - '0');
        if (pos == begin)
            throw fail(std::string("bad ") + what);
        return v;
    };
    GrayImage img;
    img.width = next_int("width");
    img.height = next_int("height");
    const std::size_t maxval = next_int("maxval");
    if (maxval == 0 || maxval > 255)
        throw fail("only 8-bit images are supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw fail("header not terminated");
    ++pos;
    const std::size_t n = img.width * img.height;
    if (bytes.size() - pos < n)
        throw fail("pixel data truncated");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    if (img.pixels.size() != img.width * img.height)
        throw ShapeError("write_pgm: pixel count does not match dimensions");
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
    write_file(path, bytes);
}

Tensor load_sequence(const std::filesystem::path& dir, bool binarize, std::size_t height, std::size_t width) {
    if (!std::filesystem::is_directory(dir))
        throw Error("sequence directory not found: " + dir.string());
    std::vector<std::filesystem::path> frames;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        frames.push_back(entry.path());
    if (frames.empty())
        throw Error("sequence directory is empty: " + dir.string());
    std::sort(frames.begin(), frames.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

    Tensor x{Shape{1, 1, frames.size(), height, width}};
    float* dst = x.data().data();
    for (const auto& frame : frames) {
        if (!std::filesystem::is_regular_file(frame))
            throw FormatError(frame.string() + ": not a P5 PGM (not a regular file)");
        const GrayImage img = read_pgm(frame);
        if (img.height != height || img.width != width)
            throw ShapeError(frame.string() + ": frame is " + std::to_string(img.height) + "x" +
                             std::to_string(img.width) + " (HxW), expected " + std::to_string(height) + "x" +
                             std::to_string(width));
        for (std::uint8_t p : img.pixels) {
            const float v = static_cast<float>(p) / 255.0f;
            *dst++ = binarize ? (v >= 0.5f ? 1.0f : 0.0f) : v;
        }
    }
    return x;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f)
        throw Error("write failed: " + path.string());
}

} // namespace gaitstrip::io
