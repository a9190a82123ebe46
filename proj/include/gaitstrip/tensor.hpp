#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gaitstrip {

// Ordered list of positive extents. Activations use N, C, T, H, W.
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<std::size_t> dims);
    explicit Shape(std::vector<std::size_t> dims);

    std::size_t rank() const { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
    std::size_t numel() const;
    const std::vector<std::size_t>& dims() const { return dims_; }

    std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    std::vector<std::size_t> dims_;
};

// Dense row-major float32 tensor, last dimension fastest. No views, no strides.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, float fill = 0.0f);
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0f); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0f); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.rank(); }
    std::size_t dim(std::size_t axis) const { return shape_[axis]; }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<const float> data() const { return data_; }
    std::span<float> data() { return data_; }

    float operator[](std::size_t flat) const { return data_[flat]; }
    float& operator[](std::size_t flat) { return data_[flat]; }

    // Multi-index access; index count must equal rank.
    float at(std::initializer_list<std::size_t> index) const;
    float& at(std::initializer_list<std::size_t> index);

    // Same data, new shape with equal element count.
    Tensor reshaped(Shape shape) const;

    // Bitwise equality of shape and every element.
    bool bit_equal(const Tensor& other) const;

private:
    std::size_t offset(std::initializer_list<std::size_t> index) const;

    Shape shape_;
    std::vector<float> data_;
};

using PadSpec = std::vector<std::pair<std::size_t, std::size_t>>;
using SliceSpec = std::vector<std::pair<std::size_t, std::size_t>>; // [begin, end) per axis

Tensor elementwise_add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, float factor);

// Zero-pads every axis by (before, after).
Tensor pad_zero(const Tensor& x, const PadSpec& pads);

// Copies the half-open box [begin, end) per axis.
Tensor slice(const Tensor& x, const SliceSpec& ranges);

// Maximum along `axis`; the axis is dropped unless keep_dim is set.
Tensor reduce_max(const Tensor& x, std::size_t axis, bool keep_dim = false);

// Arithmetic mean along `axis`, 64-bit accumulation.
Tensor reduce_mean(const Tensor& x, std::size_t axis, bool keep_dim = false);

inline constexpr double kPowerMeanEpsilon = 1e-6;

// Generalized mean ((1/n) sum clamp(x)^p)^(1/p) along `axis`, values clamped
// to >= kPowerMeanEpsilon first. Requires p >= 1.
Tensor power_mean(const Tensor& x, std::size_t axis, double p, bool keep_dim = false);

// Largest |a[i] - b[i]|; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

bool all_finite(const Tensor& x);

} // namespace gaitstrip
