#pragma once

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "quadsum/errors.hpp"
#include "quadsum/operator.hpp"

namespace quadsum {

/// Result of testing x against a span.
struct Membership {
    bool member = false;
    /// Coefficients over the rows, in row order (meaningful when member).
    std::vector<Scalar> row_coefficients;
    /// Coefficients over the independent inserted items (meaningful when member).
    FinVector item_coefficients;
    /// x reduced against the rows; zero iff member.
    FinVector residual;
};

/// Incremental row-reduced echelon basis. The pivot of each row is its smallest
/// support index, every row is normalized to 1 at its pivot and has zeros at all
/// other pivots. Row i stems from the i-th independent vector inserted ("item" i)
/// and carries the combination of items it equals.
class SpanBasis {
public:
    explicit SpanBasis(Field f);

    struct InsertOutcome {
        FinVector residual;              // x reduced against the previous rows
        std::optional<std::size_t> item; // id of the new item when residual != 0
    };

    InsertOutcome insert(const FinVector& x);
    Membership membership(const FinVector& x) const;
    FinVector reduce(const FinVector& x) const;

    Field field() const { return field_; }
    std::size_t rank() const { return rows_.size(); }
    const std::vector<FinVector>& rows() const { return rows_; }
    /// Row i expressed over the items.
    const FinVector& row_combination(std::size_t i) const { return combos_[i]; }
    Index pivot(std::size_t row) const { return pivots_[row]; }

private:
    /// Coefficients of x at the pivots, as (row, coefficient).
    std::vector<std::pair<std::size_t, Scalar>> pivot_coefficients(const FinVector& x) const;

    Field field_;
    std::vector<FinVector> rows_;
    std::vector<FinVector> combos_;
    std::vector<Index> pivots_;
    std::map<Index, std::size_t> pivot_row_;
};

struct OrbitReport {
    enum class Outcome { Finite, FreeUpTo };

    FinVector generator;
    Outcome outcome = Outcome::FreeUpTo;
    /// Finite: the dimension d. FreeUpTo: the horizon H.
    Index dimension = 0;
    /// Finite: c_0..c_{d-1} with u^d x = sum c_i u^i x.
    std::vector<Scalar> relation;

    bool is_finite() const { return outcome == Outcome::Finite; }
};

/// Inserts x, u x, u^2 x, ... into a fresh basis; Finite(d) at the first
/// dependent power d <= horizon, FreeUpTo(horizon) otherwise.
OrbitReport orbit_dimension(const Endomorphism& u, const FinVector& x, Index horizon);

struct FamilyMember {
    std::size_t generator = 0;
    Index power = 0;
    friend auto operator<=>(const FamilyMember&, const FamilyMember&) = default;
};

struct FamilyCoordinate {
    FamilyMember member;
    Scalar value;
};

/// Raised when a family member lies in the span of the members consumed before it.
class FamilyDependent : public InvariantViolation {
public:
    explicit FamilyDependent(FamilyMember m)
        : InvariantViolation("family member (generator " + std::to_string(m.generator) + ", power " +
                             std::to_string(m.power) + ") is dependent on earlier members"),
          member_(m) {}
    FamilyMember member() const { return member_; }

private:
    FamilyMember member_;
};

/// A lazily generated family (f_{g,k}) with f_{g,0} the g-th generator and
/// f_{g,k+1} = next(g, k, f_{g,k}), for k below the generator's length.
/// Members are consumed in a fixed dovetailed order (round r adds power r - g of
/// every generator g <= r), so coordinates do not depend on query order.
/// Thread-safe: queries serialize on an internal lock.
class FamilyBasis {
public:
    struct Generator {
        FinVector vector;
        std::optional<Index> length;  // nullopt: infinite
    };
    using GeneratorSource = std::function<std::optional<Generator>(std::size_t)>;
    using Successor = std::function<FinVector(std::size_t generator, Index power, const FinVector& current)>;

    FamilyBasis(Field f, GeneratorSource source, Successor next, Index member_limit);

    /// Family of orbits: next = u applied to the current member.
    static FamilyBasis orbits(const Endomorphism& u, GeneratorSource source, Index member_limit);
    static GeneratorSource fixed_generators(std::vector<Generator> generators);

    /// Exact coordinates of x, sorted by member. Throws HorizonExceeded when x is
    /// not spanned within the member limit, FamilyDependent on a dependent member.
    std::vector<FamilyCoordinate> coordinates(const FinVector& x) const;
    /// True when x lies in the span of the members consumed so far.
    bool spans_now(const FinVector& x) const;
    /// Member (g, k); computes earlier powers as needed.
    FinVector member(FamilyMember m) const;
    std::optional<Generator> generator(std::size_t g) const;
    Index consumed() const;
    std::vector<FamilyMember> consumed_members() const;
    Index member_limit() const;

    /// Consumes members until every e_j with j < n is spanned.
    void cover_prefix(Index n) const;

private:
    struct State;
    std::shared_ptr<State> state_;
};

/// Coordinates of x over (u^k x_alpha), k < n_alpha, for a finite generator list.
std::vector<FamilyCoordinate> coordinates_in_family(const Endomorphism& u,
                                                    const std::vector<FamilyBasis::Generator>& generators,
                                                    const FinVector& x, Index member_limit);

} // namespace quadsum
