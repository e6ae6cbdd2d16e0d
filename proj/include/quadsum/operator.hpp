#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadsum/dense_matrix.hpp"
#include "quadsum/fin_vector.hpp"

namespace quadsum {

/// A set of ambient indices: a residue class {offset + i*stride} or a
/// contiguous range [offset, end).
struct BlockDescriptor {
    enum class Kind { Residue, Range };

    Kind kind = Kind::Range;
    Index offset = 0;
    Index stride = 1;            // Residue only
    std::optional<Index> end;    // Range only; nullopt = unbounded

    static BlockDescriptor residue(Index r, Index m) { return {Kind::Residue, r, m, std::nullopt}; }
    static BlockDescriptor range(Index lo, std::optional<Index> hi) { return {Kind::Range, lo, 1, hi}; }

    bool contains(Index n) const;
    bool is_finite() const { return kind == Kind::Range && end.has_value(); }
    /// Number of indices; nullopt when infinite.
    std::optional<Index> size() const;
    Index to_global(Index local) const;
    Index to_local(Index global) const;

    std::string to_string() const;
    friend bool operator==(const BlockDescriptor&, const BlockDescriptor&) = default;
};

/// Constructor-supplied structural claim about an operator. Claims are checked
/// on every column that gets evaluated; a contradiction raises InvariantViolation.
struct StructureCertificate {
    enum class Tag { LocallyAlgebraic, FreeShiftLike, BlockDirectSum, Unknown };

    /// Per-block claim inside a BlockDirectSum, in the block's local indexing.
    struct BlockClaim {
        BlockDescriptor block;
        Tag tag = Tag::Unknown;  // LocallyAlgebraic, FreeShiftLike or Unknown
        Index generator = 0;
        Index growth = 0;
    };

    Tag tag = Tag::Unknown;
    /// FreeShiftLike(generator, growth): for every n >= generator, u(e_n) has
    /// largest support index exactly n + growth (growth >= 1).
    Index generator = 0;
    Index growth = 0;
    std::vector<BlockClaim> blocks;

    static StructureCertificate unknown() { return {}; }
    static StructureCertificate locally_algebraic() { return {Tag::LocallyAlgebraic, 0, 0, {}}; }
    static StructureCertificate free_shift_like(Index g, Index b) { return {Tag::FreeShiftLike, g, b, {}}; }
    static StructureCertificate block_direct_sum(std::vector<BlockClaim> blocks) {
        return {Tag::BlockDirectSum, 0, 0, std::move(blocks)};
    }

    bool is_unknown() const { return tag == Tag::Unknown; }
    std::string to_string() const;
};

std::string to_string(StructureCertificate::Tag tag);

/// Lazy column-finite endomorphism of the space with basis (e_n), n in N.
///
/// The column rule must be pure. Columns are memoized in an append-only cache
/// that is safe for concurrent readers: two threads may race to compute the
/// same column, the first stored value is kept and both values must agree.
class Endomorphism {
public:
    using ColumnRule = std::function<FinVector(Index)>;

    struct Traits {
        StructureCertificate certificate;
        /// Every column e_n is supported in [0, n + band].
        std::optional<Index> band;
        /// Columns with index >= this value are zero.
        std::optional<Index> zero_columns_from;
        /// Set when the operator is a scalar multiple of the identity.
        std::optional<Scalar> scalar_value;
    };

    Endomorphism(Field f, ColumnRule rule, Traits traits = {}, std::string description = "");

    Field field() const;
    const FinVector& column(Index n) const;
    FinVector apply(const FinVector& x) const;

    const StructureCertificate& certificate() const;
    const Traits& traits() const;
    std::optional<Index> band() const { return traits().band; }
    const std::string& description() const;
    std::size_t cached_columns() const;

    /// Same columns (shared cache) under a different structural claim.
    Endomorphism with_traits(Traits traits) const;

    /// Identity of the underlying node, used for pure-cache audits.
    const void* id() const { return node_.get(); }

private:
    struct Node;
    std::shared_ptr<Node> node_;
    explicit Endomorphism(std::shared_ptr<Node> node) : node_(std::move(node)) {}
};

Endomorphism identity_operator(Field f);
Endomorphism zero_operator(Field f);
Endomorphism scalar_operator(const Scalar& lambda);
Endomorphism shift_operator(Field f);

Endomorphism add(const Endomorphism& u, const Endomorphism& v);
Endomorphism sub(const Endomorphism& u, const Endomorphism& v);
Endomorphism scale(const Scalar& lambda, const Endomorphism& u);
/// compose(u, v) = u o v, so its column n is u(v(e_n)).
Endomorphism compose(const Endomorphism& u, const Endomorphism& v);

inline Endomorphism operator+(const Endomorphism& u, const Endomorphism& v) { return add(u, v); }
inline Endomorphism operator-(const Endomorphism& u, const Endomorphism& v) { return sub(u, v); }

/// p(u) for p given by coefficients from the leading one down to the constant.
Endomorphism poly_apply(std::span<const Scalar> coefficients, const Endomorphism& u);
Endomorphism poly_apply(const QuadraticPoly& p, const Endomorphism& u);

/// Coordinates of u(e_0), ..., u(e_{N-1}) as matrix columns.
DenseMatrix window_matrix(const Endomorphism& u, Index columns);

/// For an orbit generated from `generator` whose current vector has largest
/// index `top`, returns s when the certificate guarantees that every later
/// power has largest index exactly s more than the previous one.
std::optional<Index> certified_tail_step(const Endomorphism& u, const FinVector& generator, Index top);

/// True when the certificate guarantees that the orbit of `generator` is finite-dimensional.
bool certified_torsion(const Endomorphism& u, const FinVector& generator);

} // namespace quadsum
