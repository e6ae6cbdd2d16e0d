#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quadsum/span.hpp"

namespace quadsum {

enum class StratMode { Certified, Heuristic };
enum class StratKind { FiniteList, OmegaIndexed };

std::string to_string(StratMode mode);
std::string to_string(StratKind kind);

struct StratifyConfig {
    /// Unset: Certified when the operator carries a certificate, Heuristic otherwise.
    std::optional<StratMode> mode;
    Index window = 64;
    /// 0 selects 4 * window.
    Index orbit_horizon = 0;
    /// 0 selects 8 * window.
    Index family_horizon = 0;
    /// Enumeration of the ambient basis as a permutation of N; empty for the identity.
    std::function<Index(Index)> order;
    /// Move the first vector with a free orbit to the front of the enumeration.
    bool free_first = true;

    Index orbit_limit() const { return orbit_horizon ? orbit_horizon : 4 * window; }
    Index family_limit() const { return family_horizon ? family_horizon : 8 * window; }
};

struct Stratum {
    FinVector generator;
    /// nullopt: infinite.
    std::optional<Index> dimension;
    /// Ambient index k of the vector e_k chosen at this step.
    Index provenance = 0;
    /// Position of e_k in the enumeration order.
    Index position = 0;
    /// Finite strata: c_0..c_{d-1} with u^d x - sum c_i u^i x in the span of earlier strata.
    std::vector<Scalar> relation;
    /// Infinite strata: true when freeness follows from the certificate, false when it
    /// rests on FreeUpTo(free_horizon) evidence only.
    bool certified = true;
    Index free_horizon = 0;

    bool is_infinite() const { return !dimension.has_value(); }
};

/// Ordered strata of V^u with the family (u^k x_alpha), k < n_alpha, as basis.
/// OmegaIndexed stratifications are extended on demand; all accessors are thread-safe.
class Stratification {
public:
    using Extension = std::function<std::optional<Stratum>(std::size_t)>;

    /// Wraps explicit strata; `extension` (OmegaIndexed only) supplies strata past the list.
    static Stratification from_strata(const Endomorphism& u, std::vector<Stratum> strata, StratKind kind,
                                      Extension extension = {}, Index family_limit = 512);

    const Endomorphism& op() const;
    StratKind kind() const;
    StratMode mode() const;
    /// Number of strata of a FiniteList.
    std::optional<std::size_t> length() const;
    /// Whether stratum alpha exists (extends OmegaIndexed stratifications as needed).
    bool has(std::size_t alpha) const;
    Stratum stratum(std::size_t alpha) const;
    std::size_t known_count() const;
    Index family_limit() const;
    /// True when any decision rested on horizon-bounded evidence.
    bool heuristic_flagged() const;

    /// Shared coordinate solver over the stratification family.
    const FamilyBasis& family() const;
    FamilyBasis::GeneratorSource generator_source() const;

    struct State;

private:
    explicit Stratification(std::shared_ptr<State> state) : state_(std::move(state)) {}
    friend Stratification build_stratification(const Endomorphism& u, const StratifyConfig& config);
    std::shared_ptr<State> state_;
};

/// Greedy construction: pick the least e_k (in enumeration order) outside the span W of
/// the earlier strata; when u is not torsion, a free vector is moved to the front first.
Stratification build_stratification(const Endomorphism& u, const StratifyConfig& config = {});

/// First enumeration index among the first `scan` whose orbit is FreeUpTo(horizon).
std::optional<Index> find_free_vector(const Endomorphism& u, Index horizon, Index scan,
                                      const std::function<Index(Index)>& order = {});

struct StratValidation {
    enum class FailureKind { Independence, Spanning, Generator, Reconstruction };
    struct Failure {
        FailureKind kind;
        std::size_t stratum = 0;
        Index power = 0;
        Index column = 0;
        std::string message;
    };

    Index window = 0;
    Index family_members = 0;
    std::size_t strata_used = 0;
    std::vector<Failure> failures;

    bool valid() const { return failures.empty(); }
};

std::string to_string(StratValidation::FailureKind kind);

/// Checks, on the prefix of strata covering e_0..e_{N-1}: independence of the family,
/// spanning of every e_j (j < N), and x_alpha outside the span of earlier strata members.
StratValidation validate_stratification(const Endomorphism& u, const Stratification& s, Index window);

} // namespace quadsum
