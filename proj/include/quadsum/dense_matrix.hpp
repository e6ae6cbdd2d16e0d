#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "quadsum/scalar.hpp"

namespace quadsum {

/// Small dense matrix of exact scalars, row-major.
class DenseMatrix {
public:
    DenseMatrix(Field f, std::size_t rows, std::size_t cols);

    static DenseMatrix identity(Field f, std::size_t n);

    Field field() const noexcept { return field_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Scalar& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Scalar& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    DenseMatrix operator*(const DenseMatrix& rhs) const;
    DenseMatrix operator+(const DenseMatrix& rhs) const;
    DenseMatrix operator-(const DenseMatrix& rhs) const;
    DenseMatrix scaled(const Scalar& s) const;

    Scalar trace() const;
    bool is_zero() const;
    /// Equal to s * I (square matrices only).
    bool is_scalar_multiple_of_identity(const Scalar& s) const;

    /// Gauss-Jordan inverse; nullopt when singular.
    std::optional<DenseMatrix> inverse() const;

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b);

    std::string to_string() const;

private:
    Field field_;
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Scalar> data_;
};

} // namespace quadsum
