#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "quadsum/stratify.hpp"

namespace quadsum {

/// Strata of a stratification listed in a well-order: the natural order, or an
/// explicit permutation of a FiniteList.
class StrataOrder {
public:
    explicit StrataOrder(Stratification s);
    StrataOrder(Stratification s, std::vector<std::size_t> order);

    /// Order (1, ..., M, 0) used when the first stratum is infinite-dimensional.
    static StrataOrder infinite_first_last(const Stratification& s);

    const Stratification& strat() const { return strat_; }
    bool is_natural() const { return order_.empty(); }
    const std::vector<std::size_t>& permutation() const { return order_; }
    /// Number of positions for a FiniteList.
    std::optional<std::size_t> size() const;
    bool has_position(std::size_t pos) const;
    std::size_t stratum_at(std::size_t pos) const;
    std::size_t position_of(std::size_t stratum) const;
    /// Stratum at the next position, if any.
    std::optional<std::size_t> successor(std::size_t stratum) const;

private:
    Stratification strat_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> position_;
};

/// The grouping D of the strata: a stratum opens a group when it comes first or its
/// predecessor is infinite-dimensional; each group runs up to and including the next
/// infinite-dimensional stratum (m_alpha strata), or forever (m_alpha infinite).
/// OmegaIndexed stratifications are examined lazily up to the family limit.
class Regrouping {
public:
    explicit Regrouping(StrataOrder order);

    const StrataOrder& order() const;
    /// Stratum opening group i, or nullopt when there is no such group (within the limit).
    std::optional<std::size_t> opener(std::size_t i) const;
    /// m for group i; nullopt when infinite (or not terminated within the limit).
    std::optional<std::size_t> m(std::size_t i) const;
    /// Group index g(beta) of a stratum.
    std::size_t group_of(std::size_t stratum) const;
    /// Number of family members preceding stratum beta inside its group.
    Index offset_in_group(std::size_t stratum) const;
    /// Groups known after examining the first `positions` positions.
    std::size_t groups_within(std::size_t positions) const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

/// Checks the connector hypothesis (a FiniteList must end with an infinite stratum)
/// and returns the grouping. Throws HypothesisViolated.
Regrouping regroup(const StrataOrder& order);

/// Operator given by images of the family members of a coordinate solver:
/// column j = sum over the coordinates c of e_j of c * image(member).
Endomorphism family_defined_operator(Field f, const FamilyBasis& family,
                                     std::function<FinVector(FamilyMember)> image, std::string description,
                                     Endomorphism::Traits traits = {});

using CorrectionRule = std::function<FinVector(std::size_t stratum)>;

struct Connector {
    Endomorphism op;
    StrataOrder order;
    CorrectionRule correction;
};

/// v(u^{n_alpha - 1} x_alpha) = x_{succ(alpha)} + correction(alpha) for finite strata,
/// every other family vector to 0. Corrections must lie in the span of the family up
/// through stratum alpha (CorrectionOutOfSpan otherwise).
Connector build_connector(const Endomorphism& u, const StrataOrder& order, CorrectionRule correction = {});

struct ElementaryWitness {
    /// D-generators found while validating, in group order.
    std::vector<FinVector> generators;
    std::vector<std::size_t> generator_strata;
    std::vector<std::optional<std::size_t>> m;
    Index window = 0;
    /// Stratification family members whose triangular condition was checked.
    Index positions_checked = 0;
    /// Members of the orbit family of w consumed to span the window.
    Index orbit_members = 0;
    /// Lazy source of all D-generators (each with infinite orbit).
    FamilyBasis::GeneratorSource source;
};

/// Validates on the window that w is elementary with generators x_alpha, alpha in D:
/// the triangular condition w(e'_n) = e'_{n+1} modulo earlier spans along each group's
/// concatenated family, and independence and spanning of the w-orbits of the generators.
/// Throws WitnessInvalid(group, position).
ElementaryWitness elementary_witness(const Endomorphism& w, const StrataOrder& order, Index window);

/// Witness from explicitly given generators: only the orbit family check is run.
ElementaryWitness witness_from_generators(const Endomorphism& w, std::vector<FinVector> generators, Index window,
                                          Index member_limit);

struct CyclicBasis {
    /// u^n x0 for n < N.
    std::vector<FinVector> family;
    bool valid = false;
};

/// Checks u(e_n) = c e_{n+1} mod span(e_0..e_n), c != 0, for n < N (HypothesisFailed(n)
/// otherwise) and returns the family u^n x0 with its independence and spanning verdict.
CyclicBasis basis_from_cyclic(const Endomorphism& u, const FinVector& x0, Index window);

} // namespace quadsum
