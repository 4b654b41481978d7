#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "corrmc/errors.hpp"

namespace corrmc {

/// Dense row-major matrix of doubles.
///
/// A deliberately plain container: storage plus shape, bounds-unchecked
/// element access, and nothing else.  All arithmetic lives in the kernel
/// layer so that every numerical operation has exactly one serial reference
/// implementation and one parallel implementation.
class Dense {
public:
    Dense() = default;

    Dense(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Dense identity(std::size_t n) {
        Dense out(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            out(i, i) = 1.0;
        }
        return out;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept {
        return data_[i * cols_ + j];
    }
    const double& operator()(std::size_t i, std::size_t j) const noexcept {
        return data_[i * cols_ + j];
    }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }

    /// Exact element-wise equality (shape included).  Intended for
    /// determinism tests, not numeric comparison.
    friend bool operator==(const Dense& a, const Dense& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    bool all_finite() const noexcept {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    Dense transposed() const {
        Dense out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                out(j, i) = (*this)(i, j);
            }
        }
        return out;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline bool same_shape(const Dense& a, const Dense& b) noexcept {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

inline void require_same_shape(const Dense& a, const Dense& b, const char* where) {
    if (!same_shape(a, b)) {
        throw DimensionError(std::string(where) + ": operand shapes disagree");
    }
}

} // namespace corrmc
