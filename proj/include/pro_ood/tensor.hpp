#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pro_ood {

/// Dense row-major tensor of 64-bit floats. Rank 0 is a scalar, rank 1 a
/// vector, rank 2 a matrix. Values are immutable by convention once a tensor
/// has been handed to a Tape.
class Tensor {
public:
    Tensor() = default;

    // Zero-filled tensor of the given shape.
    explicit Tensor(std::vector<std::size_t> shape);

    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor vector(std::vector<double> v);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::size_t rows() const;  // rank-2 only
    std::size_t cols() const;  // rank-2 only

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double at(std::size_t r, std::size_t c) const;
    double& at(std::size_t r, std::size_t c);

    // Value of a single-element tensor; throws DimensionError otherwise.
    double scalar_value() const;

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool all_finite() const;

    // Throws NumericError naming `what` if any entry is NaN/Inf.
    void require_finite(const char* what) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

}  // namespace pro_ood
