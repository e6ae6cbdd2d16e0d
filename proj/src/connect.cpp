#include "quadsum/connect.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace quadsum {

StrataOrder::StrataOrder(Stratification s) : strat_(std::move(s)) {}

StrataOrder::StrataOrder(Stratification s, std::vector<std::size_t> order)
    : strat_(std::move(s)), order_(std::move(order)) {
    auto len = strat_.length();
    if (!len) throw Error("a reordering needs a finite list of strata");
    if (order_.size() != *len) throw Error("reordering must list every stratum once");
    position_.assign(*len, *len);
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
        if (order_[pos] >= *len || position_[order_[pos]] != *len) {
            throw Error("reordering must be a permutation of the strata");
        }
        position_[order_[pos]] = pos;
    }
}

StrataOrder StrataOrder::infinite_first_last(const Stratification& s) {
    auto len = s.length();
    if (!len) throw Error("the (1, ..., M, 0) order needs a finite list of strata");
    std::vector<std::size_t> order;
    for (std::size_t alpha = 1; alpha < *len; ++alpha) order.push_back(alpha);
    order.push_back(0);
    return StrataOrder(s, std::move(order));
}

std::optional<std::size_t> StrataOrder::size() const { return strat_.length(); }

bool StrataOrder::has_position(std::size_t pos) const {
    if (order_.empty()) return strat_.has(pos);
    return pos < order_.size();
}

std::size_t StrataOrder::stratum_at(std::size_t pos) const { return order_.empty() ? pos : order_.at(pos); }

std::size_t StrataOrder::position_of(std::size_t stratum) const {
    return order_.empty() ? stratum : position_.at(stratum);
}

std::optional<std::size_t> StrataOrder::successor(std::size_t stratum) const {
    std::size_t next = position_of(stratum) + 1;
    if (!has_position(next)) return std::nullopt;
    return stratum_at(next);
}

struct Regrouping::State {
    StrataOrder order;
    Index limit;
    bool no_infinite_strata;

    std::mutex mutex;
    std::vector<std::size_t> openers;
    std::vector<std::optional<std::size_t>> m;
    std::vector<std::size_t> group_by_position;
    std::vector<Index> offset_by_position;
    std::size_t scanned = 0;
    bool finished = false;
    bool previous_infinite = true;
    Index offset = 0;
    std::size_t group_length = 0;

    explicit State(StrataOrder o)
        : order(std::move(o)), limit(order.strat().family_limit()),
          no_infinite_strata(order.strat().mode() == StratMode::Certified &&
                             order.strat().op().certificate().tag == StructureCertificate::Tag::LocallyAlgebraic) {}

    /// Examines one more position; false at the end of a finite list.
    bool step() {
        if (finished) return false;
        if (!order.has_position(scanned)) {
            finished = true;
            return false;
        }
        Stratum s = order.strat().stratum(order.stratum_at(scanned));
        if (previous_infinite) {
            openers.push_back(order.stratum_at(scanned));
            m.emplace_back();
            offset = 0;
            group_length = 0;
        }
        group_by_position.push_back(openers.size() - 1);
        offset_by_position.push_back(offset);
        ++group_length;
        if (s.dimension) {
            offset += *s.dimension;
            previous_infinite = false;
        } else {
            m.back() = group_length;
            previous_infinite = true;
        }
        ++scanned;
        return true;
    }

    void scan_to(std::size_t pos) {
        while (scanned <= pos) {
            if (!step()) throw Error("position " + std::to_string(pos) + " is past the last stratum");
        }
    }

    bool may_scan() const { return !finished && (order.size().has_value() || scanned < limit); }
};

Regrouping::Regrouping(StrataOrder order) : state_(std::make_shared<State>(std::move(order))) {}

const StrataOrder& Regrouping::order() const { return state_->order; }

std::optional<std::size_t> Regrouping::opener(std::size_t i) const {
    std::lock_guard lock(state_->mutex);
    auto& st = *state_;
    if (st.scanned == 0) st.step();
    if (i >= 1 && st.no_infinite_strata) return std::nullopt;
    while (st.openers.size() <= i && st.may_scan()) st.step();
    if (i < st.openers.size()) return st.openers[i];
    return std::nullopt;
}

std::optional<std::size_t> Regrouping::m(std::size_t i) const {
    std::lock_guard lock(state_->mutex);
    auto& st = *state_;
    if (st.scanned == 0) st.step();
    if (st.no_infinite_strata) return std::nullopt;
    while ((st.m.size() <= i || !st.m[i]) && st.may_scan()) st.step();
    return i < st.m.size() ? st.m[i] : std::nullopt;
}

std::size_t Regrouping::group_of(std::size_t stratum) const {
    std::lock_guard lock(state_->mutex);
    std::size_t pos = state_->order.position_of(stratum);
    state_->scan_to(pos);
    return state_->group_by_position[pos];
}

Index Regrouping::offset_in_group(std::size_t stratum) const {
    std::lock_guard lock(state_->mutex);
    std::size_t pos = state_->order.position_of(stratum);
    state_->scan_to(pos);
    return state_->offset_by_position[pos];
}

std::size_t Regrouping::groups_within(std::size_t positions) const {
    std::lock_guard lock(state_->mutex);
    auto& st = *state_;
    while (st.scanned < positions && st.step()) {
    }
    if (positions == 0 || st.group_by_position.empty()) return 0;
    return st.group_by_position[std::min(positions, st.scanned) - 1] + 1;
}

Regrouping regroup(const StrataOrder& order) {
    Regrouping r(order);
    if (auto len = order.size()) {
        if (*len == 0) throw HypothesisViolated("empty stratification");
        std::size_t last = order.stratum_at(*len - 1);
        if (!order.strat().stratum(last).is_infinite()) {
            throw HypothesisViolated("the last stratum (" + std::to_string(last) + ") of a finite list is finite-dimensional");
        }
        r.groups_within(*len);
    } else {
        r.opener(0);
    }
    return r;
}

Endomorphism family_defined_operator(Field f, const FamilyBasis& family,
                                     std::function<FinVector(FamilyMember)> image, std::string description,
                                     Endomorphism::Traits traits) {
    struct Memo {
        std::mutex mutex;
        std::map<FamilyMember, FinVector> images;
    };
    auto memo = std::make_shared<Memo>();
    auto cached = [memo, image = std::move(image)](FamilyMember m) {
        {
            std::lock_guard lock(memo->mutex);
            auto it = memo->images.find(m);
            if (it != memo->images.end()) return it->second;
        }
        FinVector v = image(m);
        std::lock_guard lock(memo->mutex);
        return memo->images.emplace(m, std::move(v)).first->second;
    };
    return Endomorphism(
        f,
        [f, family, cached](Index j) {
            FinVector out(f);
            for (const auto& c : family.coordinates(FinVector::unit(f, j))) out.axpy(c.value, cached(c.member));
            return out;
        },
        std::move(traits), std::move(description));
}

Connector build_connector(const Endomorphism& u, const StrataOrder& order, CorrectionRule correction) {
    const Stratification& s = order.strat();
    if (!(u.field() == s.op().field())) throw FieldMismatch("connector vs stratification");
    regroup(order);
    const FamilyBasis& family = s.family();
    auto image = [s, order, correction, family](FamilyMember m) {
        Field f = s.op().field();
        Stratum st = s.stratum(m.generator);
        if (!st.dimension || m.power + 1 != *st.dimension) return FinVector(f);
        auto succ = order.successor(m.generator);
        if (!succ) throw HypothesisViolated("finite stratum " + std::to_string(m.generator) + " has no successor");
        FinVector out = s.stratum(*succ).generator;
        if (correction) {
            FinVector c = correction(m.generator);
            std::size_t limit = order.position_of(m.generator);
            for (const auto& coord : family.coordinates(c)) {
                if (order.position_of(coord.member.generator) > limit) {
                    throw CorrectionOutOfSpan("correction for stratum " + std::to_string(m.generator) +
                                              " has a component on stratum " +
                                              std::to_string(coord.member.generator));
                }
            }
            out += c;
        }
        return out;
    };
    Endomorphism op = family_defined_operator(u.field(), family, image, "connector");
    return Connector{op, order, std::move(correction)};
}

namespace {

FamilyBasis::GeneratorSource group_generator_source(const Regrouping& groups) {
    return [groups](std::size_t i) -> std::optional<FamilyBasis::Generator> {
        auto alpha = groups.opener(i);
        if (!alpha) return std::nullopt;
        return FamilyBasis::Generator{groups.order().strat().stratum(*alpha).generator, std::nullopt};
    };
}

/// Independence of the w-orbits and spanning of e_0..e_{N-1}.
Index check_orbit_family(const Endomorphism& w, const FamilyBasis::GeneratorSource& source, Index window,
                         Index member_limit, ElementaryWitness& witness) {
    FamilyBasis orbits = FamilyBasis::orbits(w, source, member_limit);
    for (Index j = 0; j < window; ++j) {
        try {
            orbits.coordinates(FinVector::unit(w.field(), j));
        } catch (const FamilyDependent& e) {
            throw WitnessInvalid(e.member().generator, e.member().power,
                                 "orbit member depends on earlier members of the witness family");
        } catch (const HorizonExceeded& e) {
            std::size_t known = 0;
            while (orbits.generator(known)) ++known;
            throw WitnessInvalid(known, j, "e_" + std::to_string(j) + " is not spanned: " + e.what());
        }
    }
    std::size_t g = 0;
    for (const auto& m : orbits.consumed_members()) g = std::max(g, m.generator + 1);
    for (std::size_t i = witness.generators.size(); i < g; ++i) witness.generators.push_back(orbits.generator(i)->vector);
    return orbits.consumed();
}

} // namespace

ElementaryWitness elementary_witness(const Endomorphism& w, const StrataOrder& order, Index window) {
    const Stratification& s = order.strat();
    Regrouping groups = regroup(order);
    const FamilyBasis& family = s.family();
    family.cover_prefix(window);

    ElementaryWitness witness;
    witness.window = window;
    auto members = family.consumed_members();
    for (const auto& m : members) {
        Stratum st = s.stratum(m.generator);
        FamilyMember next{m.generator, m.power + 1};
        if (st.dimension && m.power + 1 == *st.dimension) {
            auto succ = order.successor(m.generator);
            if (!succ) throw HypothesisViolated("finite stratum without successor");
            next = {*succ, 0};
        }
        FinVector residual = w.apply(family.member(m)) - family.member(next);
        std::size_t pos = order.position_of(m.generator);
        for (const auto& c : family.coordinates(residual)) {
            bool earlier = order.position_of(c.member.generator) < pos;
            bool lower = c.member.generator == m.generator && c.member.power <= m.power;
            if (!earlier && !lower) {
                throw WitnessInvalid(groups.group_of(m.generator), groups.offset_in_group(m.generator) + m.power,
                                     "w(e'_n) - e'_{n+1} has a component on stratum " +
                                         std::to_string(c.member.generator) + ", power " +
                                         std::to_string(c.member.power));
            }
        }
    }
    witness.positions_checked = members.size();

    witness.source = group_generator_source(groups);
    witness.orbit_members = check_orbit_family(w, witness.source, window, s.family_limit(), witness);
    for (std::size_t i = 0; i < witness.generators.size(); ++i) {
        witness.generator_strata.push_back(*groups.opener(i));
        witness.m.push_back(groups.m(i));
    }
    return witness;
}

ElementaryWitness witness_from_generators(const Endomorphism& w, std::vector<FinVector> generators, Index window,
                                          Index member_limit) {
    ElementaryWitness witness;
    witness.window = window;
    std::vector<FamilyBasis::Generator> gens;
    for (auto& g : generators) gens.push_back({g, std::nullopt});
    witness.source = FamilyBasis::fixed_generators(gens);
    witness.orbit_members = check_orbit_family(w, witness.source, window, member_limit, witness);
    for (std::size_t i = 0; i < witness.generators.size(); ++i) {
        witness.generator_strata.push_back(i);
        witness.m.emplace_back(1);
    }
    return witness;
}

CyclicBasis basis_from_cyclic(const Endomorphism& u, const FinVector& x0, Index window) {
    for (Index n = 0; n < window; ++n) {
        const FinVector& col = u.column(n);
        if (col.is_zero() || col.top() != n + 1) throw HypothesisFailed(n);
    }
    CyclicBasis out;
    SpanBasis span(u.field());
    bool independent = true;
    FinVector v = x0;
    for (Index n = 0; n < window; ++n) {
        if (!span.insert(v).item) independent = false;
        out.family.push_back(v);
        if (n + 1 < window) v = u.apply(v);
    }
    bool spanning = true;
    for (Index j = 0; j < window && spanning; ++j) spanning = span.reduce(FinVector::unit(u.field(), j)).is_zero();
    out.valid = independent && spanning;
    return out;
}

} // namespace quadsum
