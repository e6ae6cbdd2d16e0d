#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadsum/connect.hpp"
#include "quadsum/validation.hpp"

namespace quadsum {

struct Summand {
    Endomorphism op;
    QuadraticPoly poly;
};

enum class Route { Model, TwoSum, FourSum, DirectSum };
std::string to_string(Route route);

struct Decomposition {
    Endomorphism input;
    std::vector<Summand> summands;
    /// Sum of the smaller roots x_k.
    Scalar shift;
    /// c_k = y_k - x_k, so that u_k - x_k id is annihilated by t^2 - c_k t.
    std::vector<Scalar> canonical;
    std::vector<Scalar> smaller_roots;
    /// Witness for the elementary operator handed to the two-summand step.
    std::optional<ElementaryWitness> witness;
    std::optional<Stratification> stratification;
    /// 1 or 2 for the four-summand route.
    std::optional<int> reduction_case;
    Route route = Route::FourSum;
    std::optional<ValidationReport> report;
};

/// v(e_k) = a e_k + e_{k+1} for even k and 0 otherwise; w likewise on odd k with b.
std::pair<Endomorphism, Endomorphism> model_pair(const Scalar& a, const Scalar& b);

struct NormalizedPolys {
    std::vector<QuadraticPoly> canonical;
    std::vector<Scalar> c;
    std::vector<Scalar> x;
    Scalar shift;
};

/// Splits every polynomial, (t - x)(t - y) with x <= y, and returns t^2 - (y - x) t
/// with shift = sum of the x. Throws NotSplit, FieldMismatch.
NormalizedPolys normalize_polys(const std::vector<QuadraticPoly>& polys);

/// For r elementary with free orbit generators given by `source` (as a witness for r or
/// for r + s id): v, w with v^2 = a v, w^2 = b w and v + w = r. No normalization.
std::pair<Endomorphism, Endomorphism> two_sum_canonical(const Endomorphism& r,
                                                        const FamilyBasis::GeneratorSource& source,
                                                        const Scalar& a, const Scalar& b, Index member_limit);

Decomposition two_sum_elementary(const Endomorphism& u, const ElementaryWitness& witness, const QuadraticPoly& p1,
                                 const QuadraticPoly& p2, Index window, Index member_limit = 0);

struct Reduction {
    int reduction_case = 1;
    Endomorphism u1;
    Endomorphism u2;
    /// u - u1 - u2.
    Endomorphism remainder;
    ElementaryWitness witness;
    StrataOrder order;
    /// Case 2 only: pi, w~ = pi o u o (id - pi) and the connector v of u - w~.
    std::optional<Endomorphism> projection;
    std::optional<Endomorphism> w_tilde;
    std::optional<Endomorphism> connector;
};

/// u1, u2 with u1^2 = a u1, u2^2 = b u2 and u - u1 - u2 elementary, from a stratification
/// of u. Case 1: OmegaIndexed. Case 2: FiniteList whose first stratum is infinite.
/// Throws HypothesisViolated otherwise; WitnessInvalid when the remainder check fails.
Reduction from4to2(const Endomorphism& u, const Stratification& s, const Scalar& a, const Scalar& b,
                   Index window);

struct DecomposeConfig {
    StratifyConfig strat;
    /// Window for the remainder witness; 0 uses strat.window.
    Index witness_window = 0;
};

Decomposition four_sum(const Endomorphism& u, const std::vector<QuadraticPoly>& polys,
                       const DecomposeConfig& config = {});

/// Blockwise combination: summand k acts on each block as that part's summand k.
/// Throws BlockOverlap when the blocks do not partition N, PolyMismatch when lists differ.
Decomposition direct_sum_decompositions(const std::vector<std::pair<BlockDescriptor, Decomposition>>& parts);

/// Operator acting on each block as the given part (in its local indexing).
Endomorphism block_operator(const std::vector<std::pair<BlockDescriptor, Endomorphism>>& parts);

/// Checks that the blocks partition N. Throws BlockOverlap.
void require_partition(const std::vector<BlockDescriptor>& blocks);

} // namespace quadsum
