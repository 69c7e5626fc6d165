#pragma once

#include <cstddef>
#include <vector>

namespace spcvm {

// Dense row-major matrix of doubles. Rows are contiguous, which is what the
// SIMD kernels operate on.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), d_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

    double* row(std::size_t i) { return d_.data() + i * cols_; }
    const double* row(std::size_t i) const { return d_.data() + i * cols_; }

    double* data() { return d_.data(); }
    const double* data() const { return d_.data(); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return d_.size(); }

    bool operator==(const Mat& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> d_;
};

} // namespace spcvm
