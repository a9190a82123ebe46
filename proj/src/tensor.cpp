#include "gaitstrip/tensor.hpp"

#include "gaitstrip/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace gaitstrip {

namespace {

void validate_dims(const std::vector<std::size_t>& dims) {
    if (dims.empty())
        throw ShapeError("shape must have rank >= 1");
    std::size_t count = 1;
    for (std::size_t d : dims) {
        if (d == 0)
            throw ShapeError("shape extents must be >= 1");
        if (count > std::numeric_limits<std::size_t>::max() / d)
            throw ShapeError("shape element count overflows");
        count *= d;
    }
}

// (outer, extent, inner) decomposition around one axis.
struct AxisSplit {
    std::size_t outer = 1;
    std::size_t extent = 1;
    std::size_t inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
    if (axis >= s.rank())
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + s.str());
    AxisSplit r;
    for (std::size_t i = 0; i < axis; ++i)
        r.outer *= s[i];
    r.extent = s[axis];
    for (std::size_t i = axis + 1; i < s.rank(); ++i)
        r.inner *= s[i];
    return r;
}

Shape reduced_shape(const Shape& s, std::size_t axis, bool keep_dim) {
    std::vector<std::size_t> dims = s.dims();
    if (keep_dim || dims.size() == 1)
        dims[axis] = 1;
    else
        dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(axis));
    return Shape(std::move(dims));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
}

} // namespace

Shape::Shape(std::initializer_list<std::size_t> dims) : dims_(dims) { validate_dims(dims_); }

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) { validate_dims(dims_); }

std::size_t Shape::numel() const {
    if (dims_.empty())
        return 0;
    std::size_t n = 1;
    for (std::size_t d : dims_)
        n *= d;
    return n;
}

std::string Shape::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(dims_[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(shape_.numel(), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel())
        throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_.str());
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
    if (index.size() != rank())
        throw ShapeError("index rank " + std::to_string(index.size()) + " vs tensor " + shape_.str());
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : index) {
        if (i >= shape_[axis])
            throw ShapeError("index out of range on axis " + std::to_string(axis) + " of " + shape_.str());
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const {
    if (shape.numel() != numel())
        throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
    return Tensor(std::move(shape), data_);
}

bool Tensor::bit_equal(const Tensor& other) const {
    return shape_ == other.shape_ &&
           (data_.empty() || std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

Tensor elementwise_add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "elementwise_add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i)
        out[i] = a[i] + b[i];
    return out;
}

Tensor scale(const Tensor& x, float factor) {
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i)
        out[i] = x[i] * factor;
    return out;
}

Tensor pad_zero(const Tensor& x, const PadSpec& pads) {
    const std::size_t rank = x.rank();
    if (pads.size() != rank)
        throw ShapeError("pad_zero: " + std::to_string(pads.size()) + " pad pairs for rank-" +
                         std::to_string(rank) + " tensor " + x.shape().str());
    std::vector<std::size_t> dims(rank);
    for (std::size_t d = 0; d < rank; ++d)
        dims[d] = x.dim(d) + pads[d].first + pads[d].second;
    Tensor out{Shape(dims)};

    // Walk source rows (last axis contiguous) and copy each into place.
    const std::size_t row = x.dim(rank - 1);
    const std::size_t rows = x.numel() / row;
    std::vector<std::size_t> idx(rank, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t dst = 0;
        for (std::size_t d = 0; d + 1 < rank; ++d)
            dst = dst * dims[d] + idx[d] + pads[d].first;
        dst = dst * dims[rank - 1] + pads[rank - 1].first;
        std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(r * row), row,
                    out.data().begin() + static_cast<std::ptrdiff_t>(dst));
        for (std::size_t d = rank - 1; d-- > 0;) {
            if (++idx[d] < x.dim(d))
                break;
            idx[d] = 0;
        }
    }
    return out;
}

Tensor slice(const Tensor& x, const SliceSpec& ranges) {
    const std::size_t rank = x.rank();
    if (ranges.size() != rank)
        throw ShapeError("slice: range count does not match rank of " + x.shape().str());
    std::vector<std::size_t> dims(rank);
    for (std::size_t d = 0; d < rank; ++d) {
        auto [b, e] = ranges[d];
        if (b >= e || e > x.dim(d))
            throw ShapeError("slice: invalid range on axis " + std::to_string(d) + " of " + x.shape().str());
        dims[d] = e - b;
    }
    Tensor out{Shape(dims)};
    const std::size_t row = dims[rank - 1];
    const std::size_t rows = out.numel() / row;
    std::vector<std::size_t> idx(rank, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t src = 0;
        for (std::size_t d = 0; d + 1 < rank; ++d)
            src = src * x.dim(d) + idx[d] + ranges[d].first;
        src = src * x.dim(rank - 1) + ranges[rank - 1].first;
        std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(src), row,
                    out.data().begin() + static_cast<std::ptrdiff_t>(r * row));
        for (std::size_t d = rank - 1; d-- > 0;) {
            if (++idx[d] < dims[d])
                break;
            idx[d] = 0;
        }
    }
    return out;
}

Tensor reduce_max(const Tensor& x, std::size_t axis, bool keep_dim) {
    const AxisSplit s = split_at(x.shape(), axis);
    Tensor out{reduced_shape(x.shape(), axis, keep_dim)};
    for (std::size_t o = 0; o < s.outer; ++o) {
        const float* src = x.data().data() + o * s.extent * s.inner;
        float* dst = out.data().data() + o * s.inner;
        std::copy_n(src, s.inner, dst);
        for (std::size_t e = 1; e < s.extent; ++e)
            for (std::size_t i = 0; i < s.inner; ++i)
                dst[i] = std::max(dst[i], src[e * s.inner + i]);
    }
    return out;
}

Tensor reduce_mean(const Tensor& x, std::size_t axis, bool keep_dim) {
    const AxisSplit s = split_at(x.shape(), axis);
    Tensor out{reduced_shape(x.shape(), axis, keep_dim)};
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.inner; ++i) {
            double acc = 0.0;
            for (std::size_t e = 0; e < s.extent; ++e)
                acc += x[(o * s.extent + e) * s.inner + i];
            out[o * s.inner + i] = static_cast<float>(acc / static_cast<double>(s.extent));
        }
    return out;
}

Tensor power_mean(const Tensor& x, std::size_t axis, double p, bool keep_dim) {
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ParameterError("power_mean: exponent must be finite and >= 1, got " + std::to_string(p));
    const AxisSplit s = split_at(x.shape(), axis);
    Tensor out{reduced_shape(x.shape(), axis, keep_dim)};
    const double n = static_cast<double>(s.extent);
    for (std::size_t o = 0; o < s.outer; ++o)
        for (std::size_t i = 0; i < s.inner; ++i) {
            // Factor out the maximum so x^p cannot overflow for large p.
            double peak = kPowerMeanEpsilon;
            for (std::size_t e = 0; e < s.extent; ++e)
                peak = std::max(peak, static_cast<double>(x[(o * s.extent + e) * s.inner + i]));
            double acc = 0.0;
            for (std::size_t e = 0; e < s.extent; ++e) {
                const double v = std::max(kPowerMeanEpsilon, static_cast<double>(x[(o * s.extent + e) * s.inner + i]));
                acc += std::pow(v / peak, p);
            }
            out[o * s.inner + i] = static_cast<float>(peak * std::pow(acc / n, 1.0 / p));
        }
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

bool all_finite(const Tensor& x) {
    return std::all_of(x.data().begin(), x.data().end(), [](float v) { return std::isfinite(v); });
}

} // namespace gaitstrip
