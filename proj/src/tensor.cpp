#include "pro_ood/tensor.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "pro_ood/errors.hpp"

namespace pro_ood {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != data_.size()) {
        throw DimensionError("tensor shape does not match data length (" +
                             std::to_string(shape_product(shape_)) + " vs " +
                             std::to_string(data_.size()) + ")");
    }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
    std::size_t n = v.size();
    return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    return Tensor({rows, cols}, std::move(v));
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw DimensionError("rows(): tensor is not rank 2");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw DimensionError("cols(): tensor is not rank 2");
    return shape_[1];
}

double Tensor::at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

double& Tensor::at(std::size_t r, std::size_t c) {
    std::size_t nc = cols();
    return data_[r * nc + c];
}

double Tensor::scalar_value() const {
    if (data_.size() != 1) throw DimensionError("scalar_value(): tensor is not a scalar");
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::require_finite(const char* what) const {
    if (!all_finite()) throw NumericError(std::string("non-finite values in ") + what);
}

}  // namespace pro_ood
