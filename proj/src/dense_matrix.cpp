#include "quadsum/dense_matrix.hpp"

#include <utility>

#include "quadsum/errors.hpp"

namespace quadsum {

DenseMatrix::DenseMatrix(Field f, std::size_t rows, std::size_t cols)
    : field_(f), rows_(rows), cols_(cols), data_(rows * cols, Scalar::zero(f)) {}

DenseMatrix DenseMatrix::identity(Field f, std::size_t n) {
    DenseMatrix m(f, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar::one(f);
    return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw Error("dense product: shape mismatch");
    if (!(field_ == rhs.field_)) throw FieldMismatch("dense product");
    DenseMatrix out(field_, rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const Scalar& a = (*this)(i, k);
            if (a.is_zero()) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) {
                if (!rhs(k, j).is_zero()) out(i, j) += a * rhs(k, j);
            }
        }
    }
    return out;
}

DenseMatrix DenseMatrix::operator+(const DenseMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error("dense sum: shape mismatch");
    DenseMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += rhs.data_[i];
    return out;
}

DenseMatrix DenseMatrix::operator-(const DenseMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw Error("dense difference: shape mismatch");
    DenseMatrix out = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= rhs.data_[i];
    return out;
}

DenseMatrix DenseMatrix::scaled(const Scalar& s) const {
    DenseMatrix out = *this;
    for (auto& v : out.data_) v *= s;
    return out;
}

Scalar DenseMatrix::trace() const {
    Scalar t = Scalar::zero(field_);
    for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
    return t;
}

bool DenseMatrix::is_zero() const {
    for (const auto& v : data_) {
        if (!v.is_zero()) return false;
    }
    return true;
}

bool DenseMatrix::is_scalar_multiple_of_identity(const Scalar& s) const {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const Scalar& v = (*this)(i, j);
            if (i == j ? !(v == s) : !v.is_zero()) return false;
        }
    }
    return true;
}

std::optional<DenseMatrix> DenseMatrix::inverse() const {
    if (rows_ != cols_) return std::nullopt;
    std::size_t n = rows_;
    DenseMatrix a = *this;
    DenseMatrix inv = identity(field_, n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a(pivot, col).is_zero()) ++pivot;
        if (pivot == n) return std::nullopt;
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(pivot, j), a(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        }
        Scalar scale = a(col, col).inv();
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) *= scale;
            inv(col, j) *= scale;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col).is_zero()) continue;
            Scalar factor = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= factor * a(col, j);
                inv(i, j) -= factor * inv(col, j);
            }
        }
    }
    return inv;
}

bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (std::size_t i = 0; i < a.data_.size(); ++i) {
        if (!(a.data_[i] == b.data_[i])) return false;
    }
    return true;
}

std::string DenseMatrix::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < rows_; ++i) {
        out += "[";
        for (std::size_t j = 0; j < cols_; ++j) {
            if (j > 0) out += ", ";
            out += (*this)(i, j).to_string();
        }
        out += "]\n";
    }
    return out;
}

} // namespace quadsum
