#include "quadsum/stratify.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include <omp.h>

namespace quadsum {

std::string to_string(StratMode mode) { return mode == StratMode::Certified ? "Certified" : "Heuristic"; }
std::string to_string(StratKind kind) { return kind == StratKind::FiniteList ? "FiniteList" : "OmegaIndexed"; }

std::string to_string(StratValidation::FailureKind kind) {
    switch (kind) {
    case StratValidation::FailureKind::Independence: return "independence";
    case StratValidation::FailureKind::Spanning: return "spanning";
    case StratValidation::FailureKind::Generator: return "generator";
    case StratValidation::FailureKind::Reconstruction: return "reconstruction";
    }
    return "unknown";
}

namespace {

using Tag = StructureCertificate::Tag;

Index enumerate(const std::function<Index(Index)>& order, Index pos) { return order ? order(pos) : pos; }

/// Greedy builder state. Invariant for certified tails: every member past `next`
/// has largest index next.top() + j * step, and these progressions are pairwise disjoint.
class Builder {
public:
    Builder(Endomorphism u, StratMode mode, const StratifyConfig& config, std::optional<Index> free_index)
        : u_(std::move(u)), mode_(mode), order_(config.order), free_index_(free_index),
          orbit_limit_(config.orbit_limit()), family_limit_(config.family_limit()), span_(u_.field()) {
        if (free_index_) {
            for (free_pos_ = 0; enumerate(order_, free_pos_) != *free_index_; ++free_pos_) {
            }
        }
    }

    enum class Step { Added, Complete, Exhausted };

    /// Adds the next stratum, scanning candidates below `max_pos` only.
    Step extend(std::vector<Stratum>& strata, Index max_pos) {
        if (finished_) return Step::Complete;
        for (; next_pos_ < max_pos; ++next_pos_) {
            Index k = candidate(next_pos_);
            FinVector x = FinVector::unit(u_.field(), k);
            if (member(x)) continue;
            strata.push_back(make_stratum(x, k, next_pos_, strata.size()));
            ++next_pos_;
            check_complete();
            return Step::Added;
        }
        return Step::Exhausted;
    }

    bool finished() const { return finished_; }
    void mark_finished() { finished_ = true; }
    bool flagged() const { return flagged_; }
    bool has_tails() const { return !tails_.empty(); }
    bool all_tails_certified() const {
        return std::all_of(tails_.begin(), tails_.end(), [](const Tail& t) { return t.step.has_value(); });
    }
    Index next_position() const { return next_pos_; }

private:
    struct Tail {
        std::size_t stratum;
        FinVector next;
        Index next_power;
        std::optional<Index> step;  // nullopt: heuristic freeness
        Index included = 0;
    };

    Index candidate(Index pos) const {
        if (!free_index_) return enumerate(order_, pos);
        if (pos == 0) return *free_index_;
        if (pos <= free_pos_) return enumerate(order_, pos - 1);
        return enumerate(order_, pos);
    }

    std::optional<std::size_t> include(const FinVector& v, std::size_t stratum, Index power) {
        auto outcome = span_.insert(v);
        if (!outcome.item) {
            if (mode_ == StratMode::Heuristic) {
                throw UndecidableMembership("freeness claim for stratum " + std::to_string(stratum) +
                                            " contradicted at power " + std::to_string(power));
            }
            throw InvariantViolation("certified orbit of stratum " + std::to_string(stratum) +
                                     " became dependent at power " + std::to_string(power));
        }
        if (!v.is_zero()) max_top_ = std::max(max_top_.value_or(0), v.top());
        return outcome.item;
    }

    /// Moves every tail past `bound` (certified) or to the orbit horizon (heuristic).
    void normalize_tails(Index bound) {
        for (auto& tail : tails_) {
            if (tail.step) {
                while (tail.next.top() <= bound) advance(tail);
            } else {
                while (tail.included < orbit_limit_) advance(tail);
            }
        }
    }

    void advance(Tail& tail) {
        include(tail.next, tail.stratum, tail.next_power);
        tail.next = u_.apply(tail.next);
        ++tail.next_power;
        ++tail.included;
    }

    /// x in W, where W is the included span plus all tails.
    bool member(const FinVector& x) {
        if (x.is_zero()) return true;
        normalize_tails(std::max(x.top(), max_top_.value_or(0)));
        bool in = span_.reduce(x).is_zero();
        if (!in && !all_tails_certified()) flagged_ = true;
        return in;
    }

    bool disjoint_from_tails(Index start, Index step) const {
        for (const auto& tail : tails_) {
            Index g = std::gcd(step, *tail.step);
            if (start % g == tail.next.top() % g) return false;
        }
        return true;
    }

    Stratum make_stratum(const FinVector& x, Index k, Index pos, std::size_t alpha) {
        Stratum s;
        s.generator = x;
        s.provenance = k;
        s.position = pos;
        std::vector<std::size_t> items;
        FinVector v = x;
        bool torsion = certified_torsion(u_, x);
        for (Index power = 0;; ++power) {
            items.push_back(*include(v, alpha, power));
            FinVector next = u_.apply(v);
            if (!next.is_zero() && all_tails_certified()) {
                auto step = certified_tail_step(u_, x, v.top());
                if (step && next.top() == v.top() + *step && next.top() > max_top_.value_or(0) &&
                    disjoint_from_tails(next.top(), *step)) {
                    tails_.push_back({alpha, next, power + 1, step, 0});
                    return s;
                }
            }
            bool in = member(next);
            if (in) {
                s.dimension = power + 1;
                Membership m = span_.membership(next);
                for (std::size_t item : items) s.relation.push_back(m.item_coefficients.at(item));
                return s;
            }
            if (power + 1 >= orbit_limit_ && !torsion) {
                if (mode_ == StratMode::Certified) {
                    throw UndecidableMembership("orbit of e_" + std::to_string(k) + " not decided within " +
                                                std::to_string(orbit_limit_) + " powers under certificate " +
                                                u_.certificate().to_string());
                }
                s.certified = false;
                s.free_horizon = orbit_limit_;
                flagged_ = true;
                tails_.push_back({alpha, next, power + 1, std::nullopt, 0});
                return s;
            }
            v = std::move(next);
        }
    }

    /// Certified completeness: every index >= L is the leading index of a tail member,
    /// and every e_i with i < L lies in the included span.
    void check_complete() {
        if (tails_.empty() || !all_tails_certified()) return;
        Index bound = max_top_.value_or(0);
        normalize_tails(bound);
        Index lower = max_top_.value_or(0) + 1;
        Index period = 1;
        Index last_start = lower;
        for (const auto& tail : tails_) {
            period = std::lcm(period, *tail.step);
            last_start = std::max(last_start, tail.next.top());
            if (period > 1'000'000) return;
        }
        for (Index i = lower; i < last_start + period; ++i) {
            bool covered = std::any_of(tails_.begin(), tails_.end(), [i](const Tail& t) {
                return i >= t.next.top() && (i - t.next.top()) % *t.step == 0;
            });
            if (!covered) return;
        }
        for (Index i = 0; i < lower; ++i) {
            if (!span_.reduce(FinVector::unit(u_.field(), i)).is_zero()) return;
        }
        finished_ = true;
    }

    Endomorphism u_;
    StratMode mode_;
    std::function<Index(Index)> order_;
    std::optional<Index> free_index_;
    Index free_pos_ = 0;
    Index orbit_limit_;
    Index family_limit_;
    SpanBasis span_;
    std::optional<Index> max_top_;
    std::vector<Tail> tails_;
    Index next_pos_ = 0;
    bool finished_ = false;
    bool flagged_ = false;
};

bool has_infinite_la_block(const StructureCertificate& cert) {
    if (cert.tag != Tag::BlockDirectSum) return false;
    return std::any_of(cert.blocks.begin(), cert.blocks.end(), [](const StructureCertificate::BlockClaim& c) {
        return c.tag == Tag::LocallyAlgebraic && !c.block.is_finite();
    });
}

} // namespace

struct Stratification::State {
    Endomorphism u;
    StratKind kind = StratKind::OmegaIndexed;
    StratMode mode = StratMode::Certified;
    Index family_limit = 512;

    mutable std::recursive_mutex mutex;
    std::vector<Stratum> strata;
    Extension extension;
    std::unique_ptr<Builder> builder;
    bool explicit_flag = false;
    mutable std::unique_ptr<FamilyBasis> family;

    explicit State(Endomorphism op) : u(std::move(op)) {}

    bool ensure(std::size_t alpha) {
        while (strata.size() <= alpha) {
            if (builder) {
                Index cap = builder->next_position() + family_limit;
                auto step = builder->extend(strata, cap);
                if (step == Builder::Step::Complete) return false;
                if (step == Builder::Step::Exhausted) {
                    if (kind == StratKind::FiniteList) return false;
                    throw UndecidableMembership("no new stratum among " + std::to_string(family_limit) +
                                                " further candidates");
                }
            } else if (extension) {
                auto next = extension(strata.size());
                if (!next) return false;
                strata.push_back(std::move(*next));
            } else {
                return false;
            }
        }
        return true;
    }
};

Stratification Stratification::from_strata(const Endomorphism& u, std::vector<Stratum> strata, StratKind kind,
                                           Extension extension, Index family_limit) {
    auto state = std::make_shared<State>(u);
    state->kind = kind;
    state->strata = std::move(strata);
    state->extension = kind == StratKind::OmegaIndexed ? std::move(extension) : Extension{};
    state->family_limit = family_limit;
    state->mode = StratMode::Certified;
    for (const auto& s : state->strata) {
        if (s.is_infinite() && !s.certified) state->explicit_flag = true;
    }
    return Stratification(std::move(state));
}

const Endomorphism& Stratification::op() const { return state_->u; }
StratKind Stratification::kind() const { return state_->kind; }
StratMode Stratification::mode() const { return state_->mode; }

std::optional<std::size_t> Stratification::length() const {
    if (state_->kind != StratKind::FiniteList) return std::nullopt;
    std::lock_guard lock(state_->mutex);
    return state_->strata.size();
}

bool Stratification::has(std::size_t alpha) const {
    std::lock_guard lock(state_->mutex);
    return state_->ensure(alpha);
}

Stratum Stratification::stratum(std::size_t alpha) const {
    std::lock_guard lock(state_->mutex);
    if (!state_->ensure(alpha)) throw std::out_of_range("stratum " + std::to_string(alpha) + " does not exist");
    return state_->strata[alpha];
}

std::size_t Stratification::known_count() const {
    std::lock_guard lock(state_->mutex);
    return state_->strata.size();
}

bool Stratification::heuristic_flagged() const {
    std::lock_guard lock(state_->mutex);
    return state_->explicit_flag || (state_->builder && state_->builder->flagged());
}

FamilyBasis::GeneratorSource Stratification::generator_source() const {
    std::weak_ptr<State> weak = state_;
    return [weak](std::size_t alpha) -> std::optional<FamilyBasis::Generator> {
        auto state = weak.lock();
        if (!state) throw Error("stratification released while its family is in use");
        std::lock_guard lock(state->mutex);
        if (!state->ensure(alpha)) return std::nullopt;
        const Stratum& s = state->strata[alpha];
        return FamilyBasis::Generator{s.generator, s.dimension};
    };
}

const FamilyBasis& Stratification::family() const {
    std::lock_guard lock(state_->mutex);
    if (!state_->family) {
        state_->family = std::make_unique<FamilyBasis>(
            FamilyBasis::orbits(state_->u, generator_source(), state_->family_limit));
    }
    return *state_->family;
}

std::optional<Index> find_free_vector(const Endomorphism& u, Index horizon, Index scan,
                                      const std::function<Index(Index)>& order) {
    for (Index pos = 0; pos < scan; ++pos) {
        Index k = enumerate(order, pos);
        FinVector e = FinVector::unit(u.field(), k);
        // A certified exact growth step makes the orbit free outright.
        if (certified_tail_step(u, e, k)) return k;
        if (!orbit_dimension(u, e, horizon).is_finite()) return k;
    }
    return std::nullopt;
}

Stratification build_stratification(const Endomorphism& u, const StratifyConfig& config) {
    if (config.window < 1) throw Error("window must be at least 1");
    const auto& cert = u.certificate();
    StratMode mode = config.mode.value_or(cert.is_unknown() ? StratMode::Heuristic : StratMode::Certified);
    if (mode == StratMode::Certified && cert.is_unknown()) {
        throw UndecidableMembership("certified mode needs a structure certificate for '" + u.description() + "'");
    }
    auto state = std::make_shared<Stratification::State>(u);
    state->mode = mode;
    state->family_limit = config.family_limit();

    std::optional<Index> free_index;
    bool torsion = mode == StratMode::Certified && cert.tag == Tag::LocallyAlgebraic;
    if (config.free_first && !torsion) {
        free_index = find_free_vector(u, config.orbit_limit(), config.window, config.order);
    }
    state->builder = std::make_unique<Builder>(u, mode, config, free_index);
    Builder& builder = *state->builder;

    if (torsion) {
        state->kind = StratKind::OmegaIndexed;
        return Stratification(std::move(state));
    }

    Index scan_limit = config.family_limit();
    if (mode == StratMode::Certified) {
        while (builder.extend(state->strata, scan_limit) == Builder::Step::Added) {
        }
        if (builder.finished()) {
            state->kind = StratKind::FiniteList;
        } else if (has_infinite_la_block(cert) || !builder.has_tails()) {
            state->kind = StratKind::OmegaIndexed;
        } else {
            throw UndecidableMembership("stratification of '" + u.description() + "' not certified complete within " +
                                        std::to_string(scan_limit) + " candidates");
        }
        return Stratification(std::move(state));
    }

    // Heuristic: a finite list is assumed when the upper half of the scan creates no stratum.
    Index last_created = 0;
    while (builder.extend(state->strata, scan_limit) == Builder::Step::Added) {
        last_created = state->strata.back().position;
    }
    if (builder.finished() || last_created < scan_limit / 2) {
        bool any_infinite = std::any_of(state->strata.begin(), state->strata.end(),
                                        [](const Stratum& s) { return s.is_infinite(); });
        if (!any_infinite) {
            throw NotInfiniteDimensional("'" + u.description() + "' appears to act on a finite-dimensional span");
        }
        builder.mark_finished();
        state->kind = StratKind::FiniteList;
    } else {
        state->kind = StratKind::OmegaIndexed;
    }
    return Stratification(std::move(state));
}

Index Stratification::family_limit() const { return state_->family_limit; }

namespace {

/// The dovetailed consumption order can meet a dependency inside an early stratum when a
/// later generator is the culprit; re-inserting the same members stratum by stratum
/// blames the first stratum whose members complete the dependency.
FamilyMember stratum_major_dependency(const FamilyBasis& family, FamilyMember found) {
    auto members = family.consumed_members();
    if (std::find(members.begin(), members.end(), found) == members.end()) members.push_back(found);
    std::sort(members.begin(), members.end());
    SpanBasis basis(family.member(found).field());
    for (const auto& m : members) {
        if (basis.insert(family.member(m)).residual.is_zero()) return m;
    }
    return found;
}

} // namespace

StratValidation validate_stratification(const Endomorphism& u, const Stratification& s, Index window) {
    using Kind = StratValidation::FailureKind;
    StratValidation report;
    report.window = window;
    FamilyBasis family = FamilyBasis::orbits(u, s.generator_source(), s.family_limit());
    auto finish = [&] {
        report.family_members = family.consumed();
        auto members = family.consumed_members();
        for (const auto& m : members) report.strata_used = std::max(report.strata_used, m.generator + 1);
    };
    for (Index j = 0; j < window; ++j) {
        try {
            family.coordinates(FinVector::unit(u.field(), j));
        } catch (const FamilyDependent& e) {
            FamilyMember culprit = stratum_major_dependency(family, e.member());
            report.failures.push_back({Kind::Independence, culprit.generator, culprit.power, j,
                                       "family member (stratum " + std::to_string(culprit.generator) + ", power " +
                                           std::to_string(culprit.power) +
                                           ") depends on earlier strata and earlier powers"});
            finish();
            return report;
        } catch (const HorizonExceeded& e) {
            report.failures.push_back({Kind::Spanning, 0, 0, j, e.what()});
            finish();
            return report;
        }
    }
    finish();

    // x_alpha outside the span of the consumed members of earlier strata.
    auto members = family.consumed_members();
    std::sort(members.begin(), members.end());
    SpanBasis earlier(u.field());
    for (std::size_t i = 0; i < members.size();) {
        std::size_t alpha = members[i].generator;
        FinVector x = family.member({alpha, 0});
        if (earlier.reduce(x).is_zero()) {
            report.failures.push_back({Kind::Generator, alpha, 0, 0,
                                       "generator of stratum " + std::to_string(alpha) +
                                           " lies in the span of earlier strata"});
        }
        for (; i < members.size() && members[i].generator == alpha; ++i) earlier.insert(family.member(members[i]));
    }

    // Reconstruction of every window vector from its coordinates, in parallel over columns.
    std::vector<std::vector<StratValidation::Failure>> found(window);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (Index j = 0; j < window; ++j) {
        try {
            FinVector e = FinVector::unit(u.field(), j);
            FinVector rebuilt(u.field());
            for (const auto& c : family.coordinates(e)) rebuilt.axpy(c.value, family.member(c.member));
            if (!(rebuilt == e)) {
                found[j].push_back({Kind::Reconstruction, 0, 0, j, "coordinates rebuild " + rebuilt.to_string()});
            }
        } catch (...) {
#pragma omp critical(quadsum_validate_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    for (auto& list : found) report.failures.insert(report.failures.end(), list.begin(), list.end());
    return report;
}

} // namespace quadsum
