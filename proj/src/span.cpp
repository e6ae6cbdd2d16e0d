#include "quadsum/span.hpp"

#include <algorithm>
#include <mutex>

namespace quadsum {

SpanBasis::SpanBasis(Field f) : field_(f) {}

std::vector<std::pair<std::size_t, Scalar>> SpanBasis::pivot_coefficients(const FinVector& x) const {
    if (!(x.field() == field_)) throw FieldMismatch("span over " + field_.to_string());
    std::vector<std::pair<std::size_t, Scalar>> out;
    if (pivot_row_.empty()) return out;
    for (const auto& [index, value] : x.entries()) {
        auto it = pivot_row_.find(index);
        if (it != pivot_row_.end()) out.emplace_back(it->second, value);
    }
    return out;
}

FinVector SpanBasis::reduce(const FinVector& x) const {
    FinVector residual = x;
    for (const auto& [row, coeff] : pivot_coefficients(x)) residual.axpy(-coeff, rows_[row]);
    return residual;
}

Membership SpanBasis::membership(const FinVector& x) const {
    Membership m;
    m.residual = x;
    m.item_coefficients = FinVector(field_);
    m.row_coefficients.assign(rows_.size(), Scalar::zero(field_));
    for (const auto& [row, coeff] : pivot_coefficients(x)) {
        m.residual.axpy(-coeff, rows_[row]);
        m.row_coefficients[row] = coeff;
    }
    m.member = m.residual.is_zero();
    if (m.member) {
        for (std::size_t row = 0; row < rows_.size(); ++row) {
            if (!m.row_coefficients[row].is_zero()) m.item_coefficients.axpy(m.row_coefficients[row], combos_[row]);
        }
    }
    return m;
}

SpanBasis::InsertOutcome SpanBasis::insert(const FinVector& x) {
    InsertOutcome out;
    out.residual = x;
    std::size_t item = rows_.size();
    FinVector combo = FinVector::unit(field_, item);
    for (const auto& [row, coeff] : pivot_coefficients(x)) {
        out.residual.axpy(-coeff, rows_[row]);
        combo.axpy(-coeff, combos_[row]);
    }
    if (out.residual.is_zero()) return out;

    Index pivot = out.residual.bottom();
    Scalar scale = out.residual.entries().front().second.inv();
    FinVector row = out.residual;
    row *= scale;
    combo *= scale;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        Scalar c = rows_[i].at(pivot);
        if (c.is_zero()) continue;
        rows_[i].axpy(-c, row);
        combos_[i].axpy(-c, combo);
    }
    rows_.push_back(std::move(row));
    combos_.push_back(std::move(combo));
    pivots_.push_back(pivot);
    pivot_row_.emplace(pivot, item);
    out.item = item;
    return out;
}

OrbitReport orbit_dimension(const Endomorphism& u, const FinVector& x, Index horizon) {
    if (horizon < 1) throw Error("orbit horizon must be at least 1");
    OrbitReport report;
    report.generator = x;
    SpanBasis basis(u.field());
    FinVector power = x;
    for (Index k = 0; k <= horizon; ++k) {
        Membership m = basis.membership(power);
        if (m.member) {
            report.outcome = OrbitReport::Outcome::Finite;
            report.dimension = k;
            for (Index i = 0; i < k; ++i) report.relation.push_back(m.item_coefficients.at(i));
            return report;
        }
        basis.insert(power);
        if (k < horizon) power = u.apply(power);
    }
    report.outcome = OrbitReport::Outcome::FreeUpTo;
    report.dimension = horizon;
    return report;
}

struct FamilyBasis::State {
    Field field;
    GeneratorSource source;
    Successor next;
    Index limit;

    mutable std::recursive_mutex mutex;
    std::vector<Generator> generators;
    bool generators_exhausted = false;
    std::vector<std::vector<FinVector>> powers;  // computed members per generator
    SpanBasis basis;
    std::vector<FamilyMember> item_member;
    Index round = 0;
    std::size_t round_position = 0;  // next generator to visit in the current round

    State(Field f, GeneratorSource s, Successor n, Index l)
        : field(f), source(std::move(s)), next(std::move(n)), limit(l), basis(f) {}

    bool fetch(std::size_t g) {
        while (generators.size() <= g && !generators_exhausted) {
            auto gen = source(generators.size());
            if (!gen) {
                generators_exhausted = true;
                break;
            }
            if (!(gen->vector.field() == field)) throw FieldMismatch("family generator");
            if (gen->length && *gen->length == 0) throw Error("family generator with empty orbit");
            generators.push_back(std::move(*gen));
            powers.emplace_back();
        }
        return g < generators.size();
    }

    const FinVector& power(FamilyMember m) {
        if (!fetch(m.generator)) throw Error("family generator " + std::to_string(m.generator) + " does not exist");
        const Generator& gen = generators[m.generator];
        if (gen.length && m.power >= *gen.length) throw Error("family member beyond orbit length");
        auto& list = powers[m.generator];
        if (list.empty()) list.push_back(gen.vector);
        while (list.size() <= m.power) {
            FinVector nxt = next(m.generator, list.size() - 1, list.back());
            list.push_back(std::move(nxt));
        }
        return list[m.power];
    }

    /// Next member in dovetailed order, or nullopt when the family is exhausted.
    std::optional<FamilyMember> advance() {
        for (Index idle = 0;; ++idle) {
            std::size_t upto = static_cast<std::size_t>(round);
            fetch(upto);
            std::size_t count = std::min(upto + 1, generators.size());
            while (round_position < count) {
                std::size_t g = round_position++;
                Index k = round - g;
                const Generator& gen = generators[g];
                if (!gen.length || k < *gen.length) return FamilyMember{g, k};
            }
            // Exhausted when no generator can grow and no new generator will come.
            bool growing = !generators_exhausted;
            for (std::size_t g = 0; g < generators.size() && !growing; ++g) {
                const Generator& gen = generators[g];
                if (!gen.length || round + 1 - g < *gen.length) growing = true;
            }
            if (!growing) return std::nullopt;
            ++round;
            round_position = 0;
        }
    }

    /// Consumes one member; false when the family is exhausted.
    bool consume_one() {
        auto m = advance();
        if (!m) return false;
        const FinVector& v = power(*m);
        auto outcome = basis.insert(v);
        if (!outcome.item) throw FamilyDependent(*m);
        item_member.push_back(*m);
        return true;
    }

    void require_spanned(const FinVector& x) {
        FinVector residual = basis.reduce(x);
        while (!residual.is_zero()) {
            if (item_member.size() >= limit) {
                throw HorizonExceeded("vector " + x.to_string() + " not spanned by the first " +
                                      std::to_string(limit) + " family members");
            }
            std::size_t before = basis.rank();
            if (!consume_one()) {
                throw HorizonExceeded("vector " + x.to_string() + " is not spanned by the complete family");
            }
            const FinVector& row = basis.rows()[before];
            Scalar c = residual.at(basis.pivot(before));
            if (!c.is_zero()) residual.axpy(-c, row);
        }
    }
};

FamilyBasis::FamilyBasis(Field f, GeneratorSource source, Successor next, Index member_limit)
    : state_(std::make_shared<State>(f, std::move(source), std::move(next), member_limit)) {}

FamilyBasis FamilyBasis::orbits(const Endomorphism& u, GeneratorSource source, Index member_limit) {
    return FamilyBasis(
        u.field(), std::move(source), [u](std::size_t, Index, const FinVector& current) { return u.apply(current); },
        member_limit);
}

FamilyBasis::GeneratorSource FamilyBasis::fixed_generators(std::vector<Generator> generators) {
    return [generators = std::move(generators)](std::size_t g) -> std::optional<Generator> {
        if (g < generators.size()) return generators[g];
        return std::nullopt;
    };
}

std::vector<FamilyCoordinate> FamilyBasis::coordinates(const FinVector& x) const {
    std::lock_guard lock(state_->mutex);
    state_->require_spanned(x);
    Membership m = state_->basis.membership(x);
    std::vector<FamilyCoordinate> out;
    for (const auto& [item, value] : m.item_coefficients.entries()) {
        out.push_back({state_->item_member[item], value});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.member < b.member; });
    return out;
}

bool FamilyBasis::spans_now(const FinVector& x) const {
    std::lock_guard lock(state_->mutex);
    return state_->basis.reduce(x).is_zero();
}

FinVector FamilyBasis::member(FamilyMember m) const {
    std::lock_guard lock(state_->mutex);
    return state_->power(m);
}

std::optional<FamilyBasis::Generator> FamilyBasis::generator(std::size_t g) const {
    std::lock_guard lock(state_->mutex);
    if (!state_->fetch(g)) return std::nullopt;
    return state_->generators[g];
}

Index FamilyBasis::consumed() const {
    std::lock_guard lock(state_->mutex);
    return state_->item_member.size();
}

std::vector<FamilyMember> FamilyBasis::consumed_members() const {
    std::lock_guard lock(state_->mutex);
    return state_->item_member;
}

Index FamilyBasis::member_limit() const { return state_->limit; }

void FamilyBasis::cover_prefix(Index n) const {
    std::lock_guard lock(state_->mutex);
    for (Index j = 0; j < n; ++j) state_->require_spanned(FinVector::unit(state_->field, j));
}

std::vector<FamilyCoordinate> coordinates_in_family(const Endomorphism& u,
                                                    const std::vector<FamilyBasis::Generator>& generators,
                                                    const FinVector& x, Index member_limit) {
    return FamilyBasis::orbits(u, FamilyBasis::fixed_generators(generators), member_limit).coordinates(x);
}

} // namespace quadsum
