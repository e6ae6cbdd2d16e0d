#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadsum/decompose.hpp"
#include "quadsum/validation.hpp"

namespace quadsum {

/// Checks sum(u_k)(e_j) = u(e_j) and p_k(u_k)(e_j) = 0 for j < N, in parallel over
/// columns and summands. Failures are listed in (check, summand, column) order.
ValidationReport check_decomposition(const Endomorphism& u, const Decomposition& d, Index window);

/// Single-threaded reference with identical output.
ValidationReport check_decomposition_serial(const Endomorphism& u, const Decomposition& d, Index window);

/// Trace of a finite-rank u, computed on the span of `image_span`. The operator must
/// declare zero columns from some index on and every nonzero column must lie in the
/// span. Throws ImageSpanInvalid.
Scalar trace_finite_rank(const Endomorphism& u, const std::vector<FinVector>& image_span);

struct Certificate {
    enum class Kind { TraceObstruction, ScalarThreeIdempotentObstruction, NotApplicable };

    Kind kind = Kind::NotApplicable;
    /// Trace (TraceObstruction) or the scalar alpha (ScalarThreeIdempotentObstruction).
    std::optional<Scalar> value;
    /// Hypotheses checked, with their outcome.
    std::vector<std::pair<std::string, bool>> hypotheses;
    std::string reason;

    bool issued() const { return kind != Kind::NotApplicable; }
};

std::string to_string(Certificate::Kind kind);

/// TraceObstruction(tr u) when the trace is nonzero, NotApplicable otherwise.
Certificate three_squarezero_obstruction(const Endomorphism& u, const std::vector<FinVector>& image_span);

/// Issued exactly when alpha is not in {0, 1, 2, 3} and 2 alpha != 3 in alpha's field.
Certificate three_idempotent_scalar_obstruction(const Scalar& alpha);

struct SquareZeroOracleReport {
    Field field = Field::rationals();
    Index dim = 0;
    Index trials = 0;
    std::uint64_t seed = 0;
    /// Trials whose three matrices all square to zero and whose sum has trace 0.
    Index passed = 0;
    std::vector<Index> failed_trials;

    bool pass() const { return failed_trials.empty() && passed == trials; }
};

/// Random triples of square-zero d x d matrices P N P^-1 (N strictly block upper
/// triangular); checks A^2 = 0 for each and tr(A + B + C) = 0. Parallel over trials;
/// trial t is seeded from (seed, t) so results do not depend on scheduling.
SquareZeroOracleReport oracle_three_squarezero(Field f, Index dim, Index trials, std::uint64_t seed);
SquareZeroOracleReport oracle_three_squarezero_serial(Field f, Index dim, Index trials, std::uint64_t seed);

/// The three square-zero matrices of one trial.
std::vector<DenseMatrix> squarezero_trial(Field f, Index dim, std::uint64_t seed, Index trial);

struct IdempotentOracleReport {
    std::uint64_t p = 0;
    Index dim = 0;
    Index idempotents = 0;
    std::uint64_t triples = 0;
    /// Scalars satisfying the obstruction hypotheses.
    std::vector<Scalar> targets;
    /// Ordered triples (indices into the idempotent list) summing to a target times I.
    std::vector<std::pair<Scalar, std::vector<Index>>> counterexamples;

    bool vacuous() const { return targets.empty(); }
    bool pass() const { return counterexamples.empty(); }
};

/// Every idempotent d x d matrix over F_p, in lexicographic order of entries.
std::vector<DenseMatrix> enumerate_idempotents(std::uint64_t p, Index dim);

/// Exhaustive search over ordered triples of idempotents for sums alpha I with alpha
/// a target. Parallel over the first matrix of the triple.
IdempotentOracleReport oracle_three_idempotents_smallfield(std::uint64_t p, Index dim);
IdempotentOracleReport oracle_three_idempotents_smallfield_serial(std::uint64_t p, Index dim);

} // namespace quadsum
