#include "quadsum/fin_vector.hpp"

#include <algorithm>

#include "quadsum/errors.hpp"

namespace quadsum {

FinVector::FinVector(Field f, std::vector<Entry> entries) : field_(f) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (auto& [index, value] : entries) {
        check_field(value.field());
        if (!entries_.empty() && entries_.back().first == index) {
            entries_.back().second += value;
            if (entries_.back().second.is_zero()) entries_.pop_back();
        } else if (!value.is_zero()) {
            entries_.emplace_back(index, std::move(value));
        }
    }
}

void FinVector::check_field(const Field& f) const {
    if (!(f == field_)) throw FieldMismatch("vector over " + field_.to_string() + " vs " + f.to_string());
}

Scalar FinVector::at(Index n) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), n,
                               [](const Entry& e, Index i) { return e.first < i; });
    if (it != entries_.end() && it->first == n) return it->second;
    return Scalar::zero(field_);
}

FinVector& FinVector::axpy(const Scalar& factor, const FinVector& other) {
    check_field(other.field_);
    check_field(factor.field());
    if (factor.is_zero() || other.is_zero()) return *this;
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + other.entries_.size());
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() || b != other.entries_.end()) {
        if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
            merged.push_back(std::move(*a));
            ++a;
        } else if (a == entries_.end() || b->first < a->first) {
            merged.emplace_back(b->first, factor * b->second);
            ++b;
        } else {
            Scalar sum = a->second + factor * b->second;
            if (!sum.is_zero()) merged.emplace_back(a->first, std::move(sum));
            ++a;
            ++b;
        }
    }
    entries_ = std::move(merged);
    return *this;
}

FinVector& FinVector::operator+=(const FinVector& rhs) { return axpy(Scalar::one(field_), rhs); }

FinVector& FinVector::operator-=(const FinVector& rhs) { return axpy(-Scalar::one(field_), rhs); }

FinVector& FinVector::operator*=(const Scalar& factor) {
    check_field(factor.field());
    if (factor.is_zero()) {
        entries_.clear();
        return *this;
    }
    for (auto& entry : entries_) entry.second *= factor;
    return *this;
}

FinVector FinVector::operator-() const {
    FinVector out = *this;
    for (auto& entry : out.entries_) entry.second = -entry.second;
    return out;
}

bool operator==(const FinVector& a, const FinVector& b) {
    a.check_field(b.field_);
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
        if (a.entries_[i].first != b.entries_[i].first || !(a.entries_[i].second == b.entries_[i].second)) {
            return false;
        }
    }
    return true;
}

std::string FinVector::to_string() const {
    if (entries_.empty()) return "0";
    std::string out;
    for (const auto& [index, value] : entries_) {
        if (!out.empty()) out += " + ";
        out += "(" + value.to_string() + ")e" + std::to_string(index);
    }
    return out;
}

} // namespace quadsum
