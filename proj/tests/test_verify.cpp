#include "doctest.h"
#include "quadsum/operator_spec.hpp"
#include "quadsum/verify.hpp"
#include "support/dense_oracle.hpp"

using namespace quadsum;

namespace {

Field Q = Field::rationals();
Field F5 = Field::prime(5);
Field F7 = Field::prime(7);
Scalar s(long v) { return Scalar(Q, v); }
FinVector e(Index n) { return FinVector::unit(Q, n); }

/// Finite-rank operator: the given columns, zero elsewhere.
Endomorphism finite(std::vector<std::pair<Index, FinVector>> columns) {
    return make_operator(*spec::finite_patch(spec::scalar(Scalar::zero(Q)), std::move(columns)), Q);
}

DecomposeConfig dec_window(Index n) {
    DecomposeConfig c;
    c.strat.window = n;
    return c;
}

QuadraticPoly sq(Field f) { return QuadraticPoly(Scalar::zero(f), Scalar::zero(f)); }

Decomposition tampered(const Decomposition& d, std::size_t summand, Index column) {
    Decomposition t = d;
    Endomorphism original = d.summands[summand].op;
    t.summands[summand].op = Endomorphism(
        original.field(),
        [original, column](Index j) { return j == column ? FinVector(original.field()) : original.column(j); }, {},
        "tampered");
    return t;
}

} // namespace

TEST_CASE("check_decomposition pinpoints a tampered column") {
    Endomorphism zero = zero_operator(Q);
    Decomposition d = four_sum(zero, std::vector<QuadraticPoly>(4, sq(Q)), dec_window(64));
    CHECK(check_decomposition(zero, d, 64).pass());

    Decomposition bad = tampered(d, 0, 10);
    ValidationReport r = check_decomposition(zero, bad, 64);
    REQUIRE_FALSE(r.pass());
    bool sum_failure_at_10 = false;
    for (const auto& f : r.failures) {
        CHECK_FALSE(f.residual.is_zero());
        if (f.check == ValidationReport::Check::Sum && f.column == 10) sum_failure_at_10 = true;
    }
    CHECK(sum_failure_at_10);
    CHECK(oracle::report_keys(r) == oracle::dense_check(zero, bad, 64));
}

TEST_CASE("parallel and serial window checks agree") {
    Endomorphism shift = shift_operator(F5);
    Decomposition d = four_sum(shift, std::vector<QuadraticPoly>(4, sq(F5)), dec_window(32));
    for (const auto& candidate : {d, tampered(d, 2, 5), tampered(d, 3, 31)}) {
        ValidationReport p = check_decomposition(shift, candidate, 32);
        ValidationReport q = check_decomposition_serial(shift, candidate, 32);
        REQUIRE(p.failures.size() == q.failures.size());
        for (std::size_t i = 0; i < p.failures.size(); ++i) {
            CHECK(p.failures[i].column == q.failures[i].column);
            CHECK(p.failures[i].summand == q.failures[i].summand);
            CHECK(p.failures[i].residual == q.failures[i].residual);
        }
        CHECK(p.results.size() == q.results.size());
    }
}

TEST_CASE("trace_finite_rank examples") {
    Endomorphism rank_one = finite({{0, e(0)}});
    CHECK(trace_finite_rank(rank_one, {e(0)}) == s(1));
    CHECK(trace_finite_rank(zero_operator(Q), {}).is_zero());
    Endomorphism block = finite({{4, e(5)}, {5, e(6)}});
    CHECK(trace_finite_rank(block, {e(5), e(6)}).is_zero());
    Endomorphism diag = finite({{0, e(0)}, {1, Scalar::parse(Q, "2/3") * e(1)}});
    CHECK(trace_finite_rank(diag, {e(0), e(1)}) == Scalar::parse(Q, "5/3"));
}

TEST_CASE("trace_finite_rank rejects a bad image span") {
    Endomorphism rank_one = finite({{0, e(0) + e(3)}});
    CHECK_THROWS_AS(trace_finite_rank(rank_one, {e(0)}), ImageSpanInvalid);
    CHECK_THROWS_AS(trace_finite_rank(shift_operator(Q), {e(1)}), ImageSpanInvalid);
}

TEST_CASE("property: trace does not depend on the spanning set") {
    oracle::Gen gen(61);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<Index, FinVector>> cols;
        std::vector<FinVector> image;
        Scalar dense_trace = s(0);
        for (Index j = 0; j < 4; ++j) {
            FinVector c = gen.vector(Q, 4, 3);
            cols.push_back({j, c});
            dense_trace += c.at(j);
        }
        // Image of an operator supported on e_0..e_3 lies in span(e_0..e_3).
        Endomorphism u = finite(cols);
        std::vector<FinVector> basis{e(0), e(1), e(2), e(3)};
        std::vector<FinVector> mixed{e(0) + e(1), e(1) - e(2), s(2) * e(2), e(3) + e(0), e(1)};
        CHECK(trace_finite_rank(u, basis) == dense_trace);
        CHECK(trace_finite_rank(u, mixed) == dense_trace);
    }
}

TEST_CASE("three_squarezero_obstruction examples") {
    Certificate one = three_squarezero_obstruction(finite({{0, e(0)}}), {e(0)});
    CHECK(one.kind == Certificate::Kind::TraceObstruction);
    CHECK(one.value == std::optional<Scalar>(s(1)));
    CHECK(three_squarezero_obstruction(zero_operator(Q), {}).kind == Certificate::Kind::NotApplicable);
    Certificate frac = three_squarezero_obstruction(finite({{0, e(0)}, {1, Scalar::parse(Q, "2/3") * e(1)}}), {e(0), e(1)});
    CHECK(frac.kind == Certificate::Kind::TraceObstruction);
    CHECK(frac.value == std::optional<Scalar>(Scalar::parse(Q, "5/3")));
}

TEST_CASE("three_idempotent_scalar_obstruction boundaries") {
    CHECK(three_idempotent_scalar_obstruction(s(5)).issued());
    for (long a = 0; a <= 3; ++a) CHECK_FALSE(three_idempotent_scalar_obstruction(s(a)).issued());
    CHECK_FALSE(three_idempotent_scalar_obstruction(Scalar::parse(Q, "3/2")).issued());
    CHECK_FALSE(three_idempotent_scalar_obstruction(Scalar(F7, 5L)).issued());
    CHECK(three_idempotent_scalar_obstruction(Scalar(F7, 4L)).issued());
    CHECK(three_idempotent_scalar_obstruction(Scalar(F7, 6L)).issued());
    CHECK_FALSE(three_idempotent_scalar_obstruction(Scalar(F5, 4L)).issued());
}

TEST_CASE("property: the idempotent certificate is conservative") {
    for (std::uint64_t p : {3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
        Field f = Field::prime(p);
        for (long a = 0; a < static_cast<long>(p); ++a) {
            Scalar alpha(f, a);
            bool excluded = false;
            for (long k = 0; k <= 3; ++k) excluded = excluded || alpha == Scalar(f, k);
            bool half = Scalar(f, 2L) * alpha == Scalar(f, 3L);
            CHECK(three_idempotent_scalar_obstruction(alpha).issued() == (!excluded && !half));
        }
    }
}

TEST_CASE("square-zero oracle") {
    SquareZeroOracleReport d1 = oracle_three_squarezero(Q, 1, 20, 0);
    CHECK(d1.pass());
    for (const auto& m : squarezero_trial(Q, 1, 0, 3)) CHECK(m.is_zero());

    CHECK(oracle_three_squarezero(Q, 2, 1000, 1).pass());
    CHECK(oracle_three_squarezero(F5, 4, 200, 2).pass());
    for (const auto& m : squarezero_trial(F5, 4, 2, 7)) CHECK((m * m).is_zero());

    SquareZeroOracleReport par = oracle_three_squarezero(Q, 3, 100, 9);
    SquareZeroOracleReport ser = oracle_three_squarezero_serial(Q, 3, 100, 9);
    CHECK(par.passed == ser.passed);
    CHECK(par.failed_trials == ser.failed_trials);
    CHECK_THROWS(oracle_three_squarezero(Q, 7, 1, 0));
}

TEST_CASE("idempotent oracle") {
    IdempotentOracleReport d1 = oracle_three_idempotents_smallfield(7, 1);
    CHECK(d1.idempotents == 2);
    CHECK(d1.pass());
    CHECK_FALSE(d1.vacuous());
    std::vector<Scalar> expected{Scalar(F7, 4L), Scalar(F7, 6L)};
    CHECK(d1.targets == expected);

    IdempotentOracleReport d2 = oracle_three_idempotents_smallfield(7, 2);
    CHECK(d2.idempotents == 2 + 7 * 8);
    CHECK(d2.pass());
    IdempotentOracleReport d2s = oracle_three_idempotents_smallfield_serial(7, 2);
    CHECK(d2.triples == d2s.triples);
    CHECK(d2.counterexamples.size() == d2s.counterexamples.size());

    IdempotentOracleReport f5 = oracle_three_idempotents_smallfield(5, 1);
    CHECK(f5.vacuous());

    for (const auto& m : enumerate_idempotents(5, 2)) CHECK(m * m == m);
}

TEST_CASE("idempotent oracle targets exclude reachable small sums") {
    // Over F_7 with d = 1, 1 + 1 + 1 = 3 is reachable; 3 is not a target.
    IdempotentOracleReport d1 = oracle_three_idempotents_smallfield(7, 1);
    for (const auto& t : d1.targets) CHECK_FALSE(t == Scalar(F7, 3L));
}
