#include "doctest.h"
#include "quadsum/connect.hpp"
#include "quadsum/operator_spec.hpp"
#include "support/dense_oracle.hpp"

using namespace quadsum;

namespace {

Field Q = Field::rationals();
Scalar s(long v) { return Scalar(Q, v); }
FinVector e(Index n) { return FinVector::unit(Q, n); }

StratifyConfig at_window(Index n) {
    StratifyConfig c;
    c.window = n;
    return c;
}

Endomorphism patched_shift() {
    return make_operator(*spec::finite_patch(spec::shift(), {{0, FinVector(Q)}}), Q);
}

Stratum stratum(Index generator, std::optional<Index> dimension) {
    Stratum st;
    st.generator = e(generator);
    st.dimension = dimension;
    st.provenance = generator;
    st.position = generator;
    if (dimension) st.relation.assign(static_cast<std::size_t>(*dimension), s(0));
    return st;
}

/// Orbit family of w from the witness generators, truncated to `per_generator` powers each.
std::vector<FinVector> orbit_family(const Endomorphism& w, const std::vector<FinVector>& generators, Index per_generator) {
    std::vector<FinVector> out;
    for (const auto& g : generators) {
        FinVector x = g;
        for (Index k = 0; k < per_generator; ++k) {
            out.push_back(x);
            x = w.apply(x);
        }
    }
    return out;
}

} // namespace

TEST_CASE("regroup examples") {
    Endomorphism zero = zero_operator(Q);
    Regrouping z = regroup(StrataOrder(build_stratification(zero, at_window(16))));
    CHECK(z.opener(0) == std::optional<std::size_t>(0));
    CHECK_FALSE(z.m(0).has_value());
    CHECK_FALSE(z.opener(1).has_value());
    for (std::size_t b = 0; b < 12; ++b) {
        CHECK(z.group_of(b) == 0);
        CHECK(z.offset_in_group(b) == static_cast<Index>(b));
    }

    Regrouping sh = regroup(StrataOrder(build_stratification(shift_operator(Q), at_window(16))));
    CHECK(sh.opener(0) == std::optional<std::size_t>(0));
    CHECK(sh.m(0) == std::optional<std::size_t>(1));
    CHECK_FALSE(sh.opener(1).has_value());

    // Dimensions (inf, 1, 1) listed in the order 1, 2, 0.
    Stratification three = Stratification::from_strata(
        patched_shift(), {stratum(1, std::nullopt), stratum(0, 1), stratum(5, 1)}, StratKind::FiniteList);
    Regrouping r = regroup(StrataOrder(three, {1, 2, 0}));
    CHECK(r.opener(0) == std::optional<std::size_t>(1));
    CHECK(r.m(0) == std::optional<std::size_t>(3));
    CHECK_FALSE(r.opener(1).has_value());
    CHECK(r.group_of(0) == 0);
    CHECK(r.group_of(2) == 0);
}

TEST_CASE("regroup rejects a finite last stratum") {
    Stratification p = build_stratification(patched_shift(), at_window(8));
    CHECK_THROWS_AS(regroup(StrataOrder(p)), HypothesisViolated);
    CHECK_NOTHROW(regroup(StrataOrder::infinite_first_last(p)));
}

TEST_CASE("build_connector examples") {
    Endomorphism zero = zero_operator(Q);
    Connector cz = build_connector(zero, StrataOrder(build_stratification(zero, at_window(16))));
    for (Index j = 0; j < 16; ++j) CHECK(cz.op.column(j) == e(j + 1));

    Endomorphism shift = shift_operator(Q);
    Connector cs = build_connector(shift, StrataOrder(build_stratification(shift, at_window(16))));
    for (Index j = 0; j < 16; ++j) CHECK(cs.op.column(j).is_zero());

    Endomorphism patch = patched_shift();
    Connector cp = build_connector(patch, StrataOrder::infinite_first_last(build_stratification(patch, at_window(16))));
    CHECK(cp.op.column(0) == e(1));
    for (Index j = 1; j < 16; ++j) CHECK(cp.op.column(j).is_zero());
}

TEST_CASE("connector corrections outside the allowed span are rejected") {
    Endomorphism zero = zero_operator(Q);
    Connector c = build_connector(zero, StrataOrder(build_stratification(zero, at_window(8))),
                                  [](std::size_t alpha) { return FinVector::unit(Field::rationals(), static_cast<Index>(alpha) + 3); });
    CHECK_THROWS_AS(c.op.column(0), CorrectionOutOfSpan);

    Connector ok = build_connector(zero, StrataOrder(build_stratification(zero, at_window(8))),
                                   [](std::size_t alpha) { return FinVector::unit(Field::rationals(), static_cast<Index>(alpha)); });
    CHECK(ok.op.column(2) == e(3) + e(2));
}

TEST_CASE("elementary_witness examples") {
    Endomorphism zero = zero_operator(Q);
    StrataOrder zo(build_stratification(zero, at_window(16)));
    Endomorphism w = add(zero, build_connector(zero, zo).op);
    ElementaryWitness wz = elementary_witness(w, zo, 16);
    REQUIRE(wz.generators.size() == 1);
    CHECK(wz.generators[0] == e(0));
    CHECK_FALSE(wz.m[0].has_value());
    auto fam = orbit_family(w, wz.generators, 16);
    for (Index k = 0; k < 16; ++k) CHECK(fam[static_cast<std::size_t>(k)] == e(k));

    Endomorphism shift = shift_operator(Q);
    StrataOrder so(build_stratification(shift, at_window(16)));
    ElementaryWitness ws = elementary_witness(add(shift, build_connector(shift, so).op), so, 16);
    REQUIRE(ws.generators.size() == 1);
    CHECK(ws.generators[0] == e(0));
    CHECK(ws.m[0] == std::optional<std::size_t>(1));
}

TEST_CASE("corrupted connector is rejected") {
    Endomorphism zero = zero_operator(Q);
    StrataOrder zo(build_stratification(zero, at_window(16)));
    Endomorphism v = build_connector(zero, zo).op;
    Endomorphism broken(Q, [v](Index j) { return j == 3 ? FinVector(Field::rationals()) : v.column(j); }, {}, "broken connector");
    CHECK_THROWS_AS(elementary_witness(add(zero, broken), zo, 16), WitnessInvalid);
}

TEST_CASE("basis_from_cyclic examples") {
    CyclicBasis shift = basis_from_cyclic(shift_operator(Q), e(0), 12);
    CHECK(shift.valid);
    REQUIRE(shift.family.size() == 12);
    for (Index n = 0; n < 12; ++n) CHECK(shift.family[static_cast<std::size_t>(n)] == e(n));

    CyclicBasis binom = basis_from_cyclic(add(shift_operator(Q), identity_operator(Q)), e(0), 12);
    CHECK(binom.valid);
    for (Index n = 0; n < 12; ++n) {
        // (S + I)^n e_0 = sum_k C(n, k) e_k.
        FinVector expected(Q);
        long c = 1;
        for (Index k = 0; k <= n; ++k) {
            expected.axpy(s(c), e(k));
            c = c * (n - k) / (k + 1);
        }
        CHECK(binom.family[static_cast<std::size_t>(n)] == expected);
    }

    try {
        basis_from_cyclic(zero_operator(Q), e(0), 12);
        FAIL("expected HypothesisFailed");
    } catch (const HypothesisFailed& h) {
        CHECK(h.position() == 0);
    }
}

TEST_CASE("property: default connectors act on the family as prescribed") {
    std::vector<Endomorphism> ops;
    spec::BlockSizes sizes;
    sizes.kind = spec::BlockSizes::Kind::Periodic;
    sizes.list = {2, 1, 3};
    ops.push_back(make_operator(*spec::jordan(sizes, {s(0), s(2)}), Q));
    ops.push_back(make_operator(*spec::diagonal_periodic({s(1), s(-1), s(3)}), Q));
    ops.push_back(zero_operator(Field::prime(5)));
    for (const auto& u : ops) {
        Stratification st = build_stratification(u, at_window(16));
        StrataOrder order(st);
        Endomorphism v = build_connector(u, order).op;
        for (std::size_t a = 0; a < 10; ++a) {
            Stratum cur = st.stratum(a);
            REQUIRE(cur.dimension.has_value());
            FinVector x = cur.generator;
            for (Index k = 0; k + 1 < *cur.dimension; ++k) {
                CHECK(v.apply(x).is_zero());
                x = u.apply(x);
            }
            CHECK(v.apply(x) == st.stratum(a + 1).generator);
        }
        Endomorphism w = add(u, v);
        ElementaryWitness wit = elementary_witness(w, order, 16);
        auto fam = orbit_family(w, wit.generators, 24);
        std::vector<oracle::Row> rows;
        for (const auto& m : fam) rows.push_back(oracle::dense(m, 64));
        CHECK(oracle::rank(rows) == static_cast<Index>(rows.size()));
        for (Index j = 0; j < 16; ++j) CHECK(oracle::in_span(fam, FinVector::unit(u.field(), j), 64));
    }
}
