#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "quadsum/scalar.hpp"

namespace quadsum {

using Index = std::size_t;

/// Finitely supported vector over the ambient basis (e_n). Entries are kept
/// sorted by index with no stored zeros, so equality is structural.
class FinVector {
public:
    using Entry = std::pair<Index, Scalar>;

    explicit FinVector(Field f = Field::rationals()) : field_(f) {}
    FinVector(Field f, std::vector<Entry> entries);

    static FinVector unit(Field f, Index n) { return FinVector(f, {{n, Scalar::one(f)}}); }
    static FinVector unit(Index n, const Scalar& coeff) { return FinVector(coeff.field(), {{n, coeff}}); }

    Field field() const noexcept { return field_; }
    bool is_zero() const noexcept { return entries_.empty(); }
    std::size_t support_size() const noexcept { return entries_.size(); }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    /// Coefficient at `n` (zero when absent).
    Scalar at(Index n) const;
    /// Largest index in the support. Precondition: nonzero.
    Index top() const { return entries_.back().first; }
    /// Smallest index in the support. Precondition: nonzero.
    Index bottom() const { return entries_.front().first; }

    /// this += factor * other
    FinVector& axpy(const Scalar& factor, const FinVector& other);
    FinVector& operator+=(const FinVector& rhs);
    FinVector& operator-=(const FinVector& rhs);
    FinVector& operator*=(const Scalar& factor);

    friend FinVector operator+(FinVector a, const FinVector& b) { return a += b; }
    friend FinVector operator-(FinVector a, const FinVector& b) { return a -= b; }
    friend FinVector operator*(const Scalar& s, FinVector v) { return v *= s; }
    FinVector operator-() const;

    friend bool operator==(const FinVector& a, const FinVector& b);

    std::string to_string() const;

private:
    void check_field(const Field& f) const;

    Field field_;
    std::vector<Entry> entries_;
};

} // namespace quadsum
