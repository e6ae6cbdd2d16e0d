#include "doctest.h"
#include "quadsum/operator_spec.hpp"
#include "quadsum/span.hpp"
#include "support/dense_oracle.hpp"

using namespace quadsum;

namespace {

Field Q = Field::rationals();
Scalar s(long v) { return Scalar(Q, v); }
FinVector e(Index n) { return FinVector::unit(Q, n); }

Endomorphism patched_shift() {
    return make_operator(*spec::finite_patch(spec::shift(), {{0, FinVector(Q)}}), Q);
}

FinVector combine(Field f, const std::vector<FinVector>& vectors, const std::vector<Scalar>& coefficients) {
    FinVector out(f);
    for (std::size_t i = 0; i < vectors.size(); ++i) out.axpy(coefficients[i], vectors[i]);
    return out;
}

} // namespace

TEST_CASE("span_insert examples") {
    SpanBasis b(Q);
    auto first = b.insert(e(0));
    CHECK(first.residual == e(0));
    CHECK(first.item == std::optional<std::size_t>(0));
    CHECK(b.rank() == 1);

    SpanBasis c(Q);
    c.insert(e(0) + e(1));
    auto second = c.insert(e(1));
    CHECK(second.residual == e(1));
    CHECK(c.rank() == 2);

    SpanBasis d(Q);
    d.insert(e(0) + e(1));
    auto again = d.insert(e(0) + e(1));
    CHECK(again.residual.is_zero());
    CHECK_FALSE(again.item.has_value());
    CHECK(d.rank() == 1);
}

TEST_CASE("membership examples") {
    SpanBasis b(Q);
    b.insert(e(0) + e(1));
    Membership m = b.membership(s(2) * e(0) + s(2) * e(1));
    CHECK(m.member);
    REQUIRE(m.row_coefficients.size() == 1);
    CHECK(m.row_coefficients[0] == s(2));
    CHECK(m.residual.is_zero());

    Membership not_member = b.membership(e(0));
    CHECK_FALSE(not_member.member);
    CHECK(not_member.residual == -e(1));

    SpanBasis empty(Q);
    Membership zero = empty.membership(FinVector(Q));
    CHECK(zero.member);
    CHECK(zero.row_coefficients.empty());
}

TEST_CASE("echelon rows are normalized with pivots cleared") {
    SpanBasis b(Q);
    b.insert(e(2) + s(3) * e(5));
    b.insert(s(2) * e(0) + e(2));
    b.insert(e(5) - e(0));
    for (std::size_t r = 0; r < b.rank(); ++r) {
        CHECK(b.rows()[r].bottom() == b.pivot(r));
        CHECK(b.rows()[r].at(b.pivot(r)) == s(1));
        for (std::size_t q = 0; q < b.rank(); ++q) {
            if (q != r) CHECK(b.rows()[r].at(b.pivot(q)).is_zero());
        }
    }
}

TEST_CASE("orbit_dimension examples") {
    spec::BlockSizes three;
    three.kind = spec::BlockSizes::Kind::Periodic;
    three.list = {3};
    Endomorphism block = make_operator(*spec::jordan(three, {s(0)}), Q);
    OrbitReport nil = orbit_dimension(block, e(0), 10);
    REQUIRE(nil.is_finite());
    CHECK(nil.dimension == 3);
    REQUIRE(nil.relation.size() == 3);
    for (const auto& c : nil.relation) CHECK(c.is_zero());

    OrbitReport free = orbit_dimension(shift_operator(Q), e(0), 10);
    CHECK_FALSE(free.is_finite());
    CHECK(free.dimension == 10);

    OrbitReport eigen = orbit_dimension(identity_operator(Q), e(0), 10);
    REQUIRE(eigen.is_finite());
    CHECK(eigen.dimension == 1);
    REQUIRE(eigen.relation.size() == 1);
    CHECK(eigen.relation[0] == s(1));
}

TEST_CASE("coordinates_in_family examples") {
    auto shift_coords = coordinates_in_family(shift_operator(Q), {{e(0), std::nullopt}}, e(3), 64);
    REQUIRE(shift_coords.size() == 1);
    CHECK(shift_coords[0].member == FamilyMember{0, 3});
    CHECK(shift_coords[0].value == s(1));

    // Generators e_1 (free) and e_0 (one-dimensional orbit) under the patched shift.
    auto patch_coords = coordinates_in_family(patched_shift(), {{e(1), std::nullopt}, {e(0), Index{1}}}, e(0), 64);
    REQUIRE(patch_coords.size() == 1);
    CHECK(patch_coords[0].member == FamilyMember{1, 0});
    CHECK(patch_coords[0].value == s(1));

    CHECK(coordinates_in_family(shift_operator(Q), {{e(0), std::nullopt}}, FinVector(Q), 64).empty());
}

TEST_CASE("coordinates_in_family reports an unspanned vector") {
    CHECK_THROWS_AS(coordinates_in_family(shift_operator(Q), {{e(1), std::nullopt}}, e(0), 16), HorizonExceeded);
}

TEST_CASE("family with a dependent member is rejected") {
    FamilyBasis fam(Q, FamilyBasis::fixed_generators({{e(0), std::nullopt}, {e(1), Index{1}}}),
                    [](std::size_t, Index, const FinVector& x) {
                        FinVector out(Field::rationals());
                        for (const auto& [i, v] : x.entries()) out.axpy(v, FinVector::unit(Field::rationals(), i + 1));
                        return out;
                    },
                    64);
    CHECK_THROWS_AS(fam.coordinates(e(3)), FamilyDependent);
}

TEST_CASE("property: membership agrees with dense elimination") {
    oracle::Gen gen(31);
    for (int trial = 0; trial < 150; ++trial) {
        Field f = gen.field();
        const Index dim = 12;
        SpanBasis b(f);
        std::vector<FinVector> inserted;
        for (long k = gen.integer(0, 6); k > 0; --k) {
            FinVector x = gen.vector(f, dim, 3);
            if (gen.coin() && !inserted.empty()) x = x + inserted.front();
            Index before = static_cast<Index>(b.rank());
            b.insert(x);
            CHECK(static_cast<Index>(b.rank()) >= before);
            inserted.push_back(x);
            std::vector<oracle::Row> rows;
            for (const auto& v : inserted) rows.push_back(oracle::dense(v, dim));
            CHECK(static_cast<Index>(b.rank()) == oracle::rank(rows));
        }
        FinVector probe = gen.coin() && !inserted.empty()
                              ? gen.scalar(f) * inserted.back() + gen.scalar(f) * inserted.front()
                              : gen.vector(f, dim, 3);
        Membership m = b.membership(probe);
        CHECK(m.member == oracle::in_span(inserted, probe, dim));
        CHECK(m.residual.is_zero() == m.member);
        if (m.member) CHECK(combine(f, b.rows(), m.row_coefficients) == probe);
    }
}

TEST_CASE("property: finite orbit relations verify by applying u") {
    oracle::Gen gen(32);
    spec::BlockSizes sizes;
    sizes.kind = spec::BlockSizes::Kind::Periodic;
    sizes.list = {2, 3, 1};
    for (int trial = 0; trial < 60; ++trial) {
        Field f = gen.field();
        Endomorphism u = add(make_operator(*spec::jordan(sizes, {gen.scalar(f), gen.scalar(f)}), f),
                             make_operator(*spec::diagonal_periodic({gen.scalar(f)}), f));
        FinVector x = gen.vector(f, 12, 3);
        if (x.is_zero()) continue;
        OrbitReport r = orbit_dimension(u, x, 40);
        REQUIRE(r.is_finite());
        std::vector<FinVector> powers{x};
        for (Index k = 0; k < r.dimension; ++k) powers.push_back(u.apply(powers.back()));
        FinVector rhs(f);
        for (Index k = 0; k < r.dimension; ++k) rhs.axpy(r.relation[k], powers[k]);
        CHECK(powers.back() == rhs);
        std::vector<oracle::Row> rows;
        for (Index k = 0; k < r.dimension; ++k) rows.push_back(oracle::dense(powers[k], 16));
        CHECK(oracle::rank(rows) == r.dimension);
    }
}
