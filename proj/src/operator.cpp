#include "quadsum/operator.hpp"

#include <algorithm>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "quadsum/errors.hpp"

namespace quadsum {

using Tag = StructureCertificate::Tag;

bool BlockDescriptor::contains(Index n) const {
    if (n < offset) return false;
    if (kind == Kind::Residue) return (n - offset) % stride == 0;
    return !end || n < *end;
}

std::optional<Index> BlockDescriptor::size() const {
    if (kind == Kind::Range && end) return *end > offset ? *end - offset : 0;
    return std::nullopt;
}

Index BlockDescriptor::to_global(Index local) const {
    return kind == Kind::Residue ? offset + local * stride : offset + local;
}

Index BlockDescriptor::to_local(Index global) const {
    return kind == Kind::Residue ? (global - offset) / stride : global - offset;
}

std::string BlockDescriptor::to_string() const {
    if (kind == Kind::Residue) return std::to_string(offset) + " mod " + std::to_string(stride);
    return "[" + std::to_string(offset) + ", " + (end ? std::to_string(*end) : std::string("inf")) + ")";
}

std::string to_string(Tag tag) {
    switch (tag) {
    case Tag::LocallyAlgebraic: return "LocallyAlgebraic";
    case Tag::FreeShiftLike: return "FreeShiftLike";
    case Tag::BlockDirectSum: return "BlockDirectSum";
    case Tag::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string StructureCertificate::to_string() const {
    switch (tag) {
    case Tag::FreeShiftLike:
        return "FreeShiftLike(" + std::to_string(generator) + ", " + std::to_string(growth) + ")";
    case Tag::BlockDirectSum: {
        std::string out = "BlockDirectSum(";
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (i > 0) out += "; ";
            out += blocks[i].block.to_string() + ": " + quadsum::to_string(blocks[i].tag);
            if (blocks[i].tag == Tag::FreeShiftLike) {
                out += "(" + std::to_string(blocks[i].generator) + ", " + std::to_string(blocks[i].growth) + ")";
            }
        }
        return out + ")";
    }
    default: return quadsum::to_string(tag);
    }
}

struct Endomorphism::Node {
    Node(Field f, ColumnRule r, Traits t, std::string d)
        : field(f), rule(std::move(r)), traits(std::move(t)), description(std::move(d)) {}

    Field field;
    ColumnRule rule;
    Traits traits;
    std::string description;
    mutable std::shared_mutex mutex;
    mutable std::unordered_map<Index, FinVector> cache;

    void check_column(Index n, const FinVector& col) const;
};

void Endomorphism::Node::check_column(Index n, const FinVector& col) const {
    if (!(col.field() == field)) throw FieldMismatch("column rule of '" + description + "'");
    if (traits.band && !col.is_zero() && col.top() > n + *traits.band) {
        throw InvariantViolation("column " + std::to_string(n) + " of '" + description + "' exceeds band " +
                                 std::to_string(*traits.band));
    }
    if (traits.zero_columns_from && n >= *traits.zero_columns_from && !col.is_zero()) {
        throw InvariantViolation("column " + std::to_string(n) + " of '" + description +
                                 "' should be zero");
    }
    const auto& cert = traits.certificate;
    if (cert.tag == Tag::FreeShiftLike && n >= cert.generator) {
        if (col.is_zero() || col.top() != n + cert.growth) {
            throw InvariantViolation("column " + std::to_string(n) + " of '" + description +
                                     "' contradicts " + cert.to_string());
        }
    }
    if (cert.tag == Tag::BlockDirectSum) {
        const StructureCertificate::BlockClaim* home = nullptr;
        for (const auto& claim : cert.blocks) {
            if (claim.block.contains(n)) {
                home = &claim;
                break;
            }
        }
        if (home == nullptr) {
            throw InvariantViolation("column " + std::to_string(n) + " lies in no declared block");
        }
        for (const auto& entry : col.entries()) {
            if (!home->block.contains(entry.first)) {
                throw InvariantViolation("column " + std::to_string(n) + " leaves block " +
                                         home->block.to_string());
            }
        }
        Index local = home->block.to_local(n);
        if (home->tag == Tag::FreeShiftLike && local >= home->generator) {
            if (col.is_zero() || home->block.to_local(col.top()) != local + home->growth) {
                throw InvariantViolation("column " + std::to_string(n) + " contradicts block claim on " +
                                         home->block.to_string());
            }
        }
    }
}

Endomorphism::Endomorphism(Field f, ColumnRule rule, Traits traits, std::string description)
    : node_(std::make_shared<Node>(f, std::move(rule), std::move(traits), std::move(description))) {}

Field Endomorphism::field() const { return node_->field; }

const FinVector& Endomorphism::column(Index n) const {
    {
        std::shared_lock lock(node_->mutex);
        auto it = node_->cache.find(n);
        if (it != node_->cache.end()) return it->second;
    }
    FinVector col = node_->rule(n);
    node_->check_column(n, col);
    std::unique_lock lock(node_->mutex);
    auto it = node_->cache.find(n);
    if (it != node_->cache.end()) {
        if (!(it->second == col)) {
            throw InvariantViolation("impure column rule for '" + node_->description + "' at " + std::to_string(n));
        }
        return it->second;
    }
    return node_->cache.emplace(n, std::move(col)).first->second;
}

FinVector Endomorphism::apply(const FinVector& x) const {
    if (!(x.field() == field())) throw FieldMismatch("apply '" + description() + "'");
    FinVector out(field());
    for (const auto& [index, coeff] : x.entries()) out.axpy(coeff, column(index));
    return out;
}

const StructureCertificate& Endomorphism::certificate() const { return node_->traits.certificate; }
const Endomorphism::Traits& Endomorphism::traits() const { return node_->traits; }
const std::string& Endomorphism::description() const { return node_->description; }

std::size_t Endomorphism::cached_columns() const {
    std::shared_lock lock(node_->mutex);
    return node_->cache.size();
}

Endomorphism Endomorphism::with_traits(Traits traits) const {
    Endomorphism self = *this;
    return Endomorphism(field(), [self](Index n) { return self.column(n); }, std::move(traits), description());
}

Endomorphism identity_operator(Field f) { return scalar_operator(Scalar::one(f)); }

Endomorphism zero_operator(Field f) { return scalar_operator(Scalar::zero(f)); }

Endomorphism scalar_operator(const Scalar& lambda) {
    Endomorphism::Traits traits;
    traits.certificate = StructureCertificate::locally_algebraic();
    traits.band = 0;
    traits.scalar_value = lambda;
    if (lambda.is_zero()) traits.zero_columns_from = 0;
    Field f = lambda.field();
    return Endomorphism(
        f, [lambda](Index n) { return FinVector::unit(n, lambda); }, std::move(traits),
        lambda.is_zero() ? "zero" : (lambda.is_one() ? "identity" : "scalar(" + lambda.to_string() + ")"));
}

Endomorphism shift_operator(Field f) {
    Endomorphism::Traits traits;
    traits.certificate = StructureCertificate::free_shift_like(0, 1);
    traits.band = 1;
    return Endomorphism(f, [f](Index n) { return FinVector::unit(f, n + 1); }, std::move(traits), "shift");
}

namespace {

void check_same_field(const Endomorphism& u, const Endomorphism& v) {
    if (!(u.field() == v.field())) {
        throw FieldMismatch(u.description() + " over " + u.field().to_string() + " vs " + v.description() +
                            " over " + v.field().to_string());
    }
}

std::optional<Index> max_opt(std::optional<Index> a, std::optional<Index> b) {
    if (a && b) return std::max(*a, *b);
    return std::nullopt;
}

/// Certificate of u + v (v may be scaled; scaling does not change the claims).
StructureCertificate sum_certificate(const Endomorphism::Traits& a, const Endomorphism::Traits& b,
                                     const std::optional<Index>& zero_from) {
    if (zero_from) return StructureCertificate::locally_algebraic();
    auto la_plus_scalar = [](const Endomorphism::Traits& x, const Endomorphism::Traits& y) {
        return x.certificate.tag == Tag::LocallyAlgebraic && y.scalar_value.has_value();
    };
    if (la_plus_scalar(a, b)) return a.certificate;
    if (la_plus_scalar(b, a)) return b.certificate;
    auto fsl_plus_lower = [](const Endomorphism::Traits& x, const Endomorphism::Traits& y) {
        return x.certificate.tag == Tag::FreeShiftLike && y.band && *y.band < x.certificate.growth;
    };
    if (fsl_plus_lower(a, b)) return a.certificate;
    if (fsl_plus_lower(b, a)) return b.certificate;
    return StructureCertificate::unknown();
}

} // namespace

Endomorphism add(const Endomorphism& u, const Endomorphism& v) {
    check_same_field(u, v);
    Endomorphism::Traits traits;
    traits.band = max_opt(u.traits().band, v.traits().band);
    traits.zero_columns_from = max_opt(u.traits().zero_columns_from, v.traits().zero_columns_from);
    traits.certificate = sum_certificate(u.traits(), v.traits(), traits.zero_columns_from);
    if (u.traits().scalar_value && v.traits().scalar_value) {
        traits.scalar_value = *u.traits().scalar_value + *v.traits().scalar_value;
    }
    return Endomorphism(
        u.field(),
        [u, v](Index n) {
            FinVector out = u.column(n);
            out += v.column(n);
            return out;
        },
        std::move(traits), "(" + u.description() + " + " + v.description() + ")");
}

Endomorphism sub(const Endomorphism& u, const Endomorphism& v) {
    check_same_field(u, v);
    Endomorphism::Traits traits;
    traits.band = max_opt(u.traits().band, v.traits().band);
    traits.zero_columns_from = max_opt(u.traits().zero_columns_from, v.traits().zero_columns_from);
    traits.certificate = sum_certificate(u.traits(), v.traits(), traits.zero_columns_from);
    if (u.traits().scalar_value && v.traits().scalar_value) {
        traits.scalar_value = *u.traits().scalar_value - *v.traits().scalar_value;
    }
    return Endomorphism(
        u.field(),
        [u, v](Index n) {
            FinVector out = u.column(n);
            out -= v.column(n);
            return out;
        },
        std::move(traits), "(" + u.description() + " - " + v.description() + ")");
}

Endomorphism scale(const Scalar& lambda, const Endomorphism& u) {
    if (!(lambda.field() == u.field())) throw FieldMismatch("scale factor vs operator");
    if (lambda.is_zero()) return zero_operator(u.field());
    Endomorphism::Traits traits = u.traits();
    if (traits.scalar_value) traits.scalar_value = lambda * *traits.scalar_value;
    return Endomorphism(
        u.field(),
        [lambda, u](Index n) {
            FinVector out = u.column(n);
            out *= lambda;
            return out;
        },
        std::move(traits), lambda.to_string() + "*" + u.description());
}

Endomorphism compose(const Endomorphism& u, const Endomorphism& v) {
    check_same_field(u, v);
    Endomorphism::Traits traits;
    if (u.traits().band && v.traits().band) traits.band = *u.traits().band + *v.traits().band;
    traits.zero_columns_from = v.traits().zero_columns_from;
    if (u.traits().scalar_value && u.traits().scalar_value->is_zero()) traits.zero_columns_from = 0;
    const auto& cu = u.certificate();
    const auto& cv = v.certificate();
    if (traits.zero_columns_from) {
        traits.certificate = StructureCertificate::locally_algebraic();
    } else if (cu.tag == Tag::FreeShiftLike && cv.tag == Tag::FreeShiftLike && u.traits().band &&
               *u.traits().band == cu.growth) {
        traits.certificate =
            StructureCertificate::free_shift_like(std::max(cu.generator, cv.generator), cu.growth + cv.growth);
    } else if (u.traits().scalar_value && !u.traits().scalar_value->is_zero() && cv.tag != Tag::Unknown) {
        traits.certificate = cv;
    } else if (v.traits().scalar_value && !v.traits().scalar_value->is_zero() && cu.tag != Tag::Unknown) {
        traits.certificate = cu;
    }
    if (u.traits().scalar_value && v.traits().scalar_value) {
        traits.scalar_value = *u.traits().scalar_value * *v.traits().scalar_value;
    }
    return Endomorphism(
        u.field(), [u, v](Index n) { return u.apply(v.column(n)); }, std::move(traits),
        "(" + u.description() + " o " + v.description() + ")");
}

Endomorphism poly_apply(std::span<const Scalar> coefficients, const Endomorphism& u) {
    if (coefficients.empty()) return zero_operator(u.field());
    for (const auto& c : coefficients) {
        if (!(c.field() == u.field())) throw FieldMismatch("polynomial vs operator");
    }
    // Horner: ((c0 u + c1) u + c2) ...
    Endomorphism acc = scalar_operator(coefficients[0]);
    for (std::size_t i = 1; i < coefficients.size(); ++i) {
        acc = compose(acc, u);
        if (!coefficients[i].is_zero()) acc = add(acc, scalar_operator(coefficients[i]));
    }
    return acc;
}

Endomorphism poly_apply(const QuadraticPoly& p, const Endomorphism& u) {
    const Scalar coeffs[] = {Scalar::one(p.field()), p.beta(), p.gamma()};
    return poly_apply(std::span<const Scalar>(coeffs), u);
}

DenseMatrix window_matrix(const Endomorphism& u, Index columns) {
    std::optional<Index> max_index;
    for (Index j = 0; j < columns; ++j) {
        const FinVector& col = u.column(j);
        if (!col.is_zero()) max_index = std::max(max_index.value_or(0), col.top());
    }
    Index rows = max_index ? *max_index + 1 : columns;
    DenseMatrix m(u.field(), rows, columns);
    for (Index j = 0; j < columns; ++j) {
        for (const auto& [index, value] : u.column(j).entries()) m(index, j) = value;
    }
    return m;
}

namespace {

/// Smallest local top from which FreeShiftLike growth is exact for any vector
/// living in the block: beyond the declared generator, and above every image
/// of an earlier (unconstrained) column.
Index effective_start(const Endomorphism& u, const BlockDescriptor& block, Index generator, Index growth) {
    Index start = generator;
    for (Index local = 0; local < generator; ++local) {
        const FinVector& col = u.column(block.to_global(local));
        if (col.is_zero()) continue;
        Index local_top = block.to_local(col.top());
        if (local_top + 1 > growth) start = std::max(start, local_top + 1 - growth);
    }
    return start;
}

const StructureCertificate::BlockClaim* block_of(const StructureCertificate& cert, const FinVector& x) {
    if (x.is_zero()) return nullptr;
    const StructureCertificate::BlockClaim* home = nullptr;
    for (const auto& claim : cert.blocks) {
        if (claim.block.contains(x.top())) {
            home = &claim;
            break;
        }
    }
    if (home == nullptr) return nullptr;
    for (const auto& entry : x.entries()) {
        if (!home->block.contains(entry.first)) return nullptr;
    }
    return home;
}

} // namespace

std::optional<Index> certified_tail_step(const Endomorphism& u, const FinVector& generator, Index top) {
    const auto& cert = u.certificate();
    if (cert.tag == Tag::FreeShiftLike) {
        if (top >= effective_start(u, BlockDescriptor::range(0, std::nullopt), cert.generator, cert.growth)) {
            return cert.growth;
        }
        return std::nullopt;
    }
    if (cert.tag == Tag::BlockDirectSum) {
        const auto* home = block_of(cert, generator);
        if (home == nullptr || home->tag != Tag::FreeShiftLike || !home->block.contains(top)) return std::nullopt;
        if (home->block.to_local(top) >= effective_start(u, home->block, home->generator, home->growth)) {
            return home->block.kind == BlockDescriptor::Kind::Residue ? home->growth * home->block.stride
                                                                       : home->growth;
        }
    }
    return std::nullopt;
}

bool certified_torsion(const Endomorphism& u, const FinVector& generator) {
    const auto& cert = u.certificate();
    if (cert.tag == Tag::LocallyAlgebraic) return true;
    if (cert.tag != Tag::BlockDirectSum) return false;
    for (const auto& entry : generator.entries()) {
        bool torsion = false;
        for (const auto& claim : cert.blocks) {
            if (claim.block.contains(entry.first)) {
                torsion = claim.tag == Tag::LocallyAlgebraic || claim.block.is_finite();
                break;
            }
        }
        if (!torsion) return false;
    }
    return true;
}

} // namespace quadsum
