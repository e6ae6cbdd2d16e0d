#include "quadsum/decompose.hpp"

#include <algorithm>
#include <numeric>

namespace quadsum {

std::string to_string(ValidationReport::Check check) {
    switch (check) {
    case ValidationReport::Check::Sum: return "sum";
    case ValidationReport::Check::Annihilation: return "annihilation";
    case ValidationReport::Check::Witness: return "witness";
    }
    return "sum";
}

std::string to_string(Route route) {
    switch (route) {
    case Route::Model: return "model";
    case Route::TwoSum: return "two_sum";
    case Route::FourSum: return "four_sum";
    case Route::DirectSum: return "direct_sum";
    }
    return "four_sum";
}

namespace {

/// op + x id, without wrapping when x = 0.
Endomorphism plus_scalar(const Endomorphism& op, const Scalar& x) {
    if (x.is_zero()) return op;
    return add(op, scalar_operator(x));
}

Endomorphism minus_scalar(const Endomorphism& op, const Scalar& x) {
    if (x.is_zero()) return op;
    return sub(op, scalar_operator(x));
}

FinVector top_of(const Stratification& s, std::size_t alpha) {
    Stratum st = s.stratum(alpha);
    return s.family().member({alpha, *st.dimension - 1});
}

} // namespace

std::pair<Endomorphism, Endomorphism> model_pair(const Scalar& a, const Scalar& b) {
    if (!(a.field() == b.field())) throw FieldMismatch("model pair scalars");
    Field f = a.field();
    Endomorphism::Traits traits;
    traits.band = 1;
    auto rule = [f](const Scalar& c, Index parity) {
        return [f, c, parity](Index k) {
            if (k % 2 != parity) return FinVector(f);
            FinVector out = FinVector::unit(f, k + 1);
            out.axpy(c, FinVector::unit(f, k));
            return out;
        };
    };
    return {Endomorphism(f, rule(a, 0), traits, "model_v(" + a.to_string() + ")"),
            Endomorphism(f, rule(b, 1), traits, "model_w(" + b.to_string() + ")")};
}

NormalizedPolys normalize_polys(const std::vector<QuadraticPoly>& polys) {
    if (polys.empty()) throw Error("empty polynomial list");
    Field f = polys.front().field();
    NormalizedPolys out{{}, {}, {}, Scalar::zero(f)};
    for (const auto& p : polys) {
        if (!(p.field() == f)) throw FieldMismatch("polynomial list");
        auto [x, y] = *split_roots(p).roots();
        Scalar c = y - x;
        out.canonical.push_back(QuadraticPoly::canonical(c));
        out.c.push_back(c);
        out.x.push_back(x);
        out.shift += x;
    }
    return out;
}

std::pair<Endomorphism, Endomorphism> two_sum_canonical(const Endomorphism& r,
                                                        const FamilyBasis::GeneratorSource& source,
                                                        const Scalar& a, const Scalar& b, Index member_limit) {
    if (!(a.field() == r.field()) || !(b.field() == r.field())) throw FieldMismatch("two-sum scalars");
    // eps_0 = g, eps_{k+1} = r(eps_k) - c_k eps_k: the images of e_k under the transport.
    FamilyBasis eps(
        r.field(), source,
        [r, a, b](std::size_t, Index k, const FinVector& current) {
            FinVector next = r.apply(current);
            next.axpy(-(k % 2 == 0 ? a : b), current);
            return next;
        },
        member_limit);
    auto half = [eps](const Scalar& c, Index parity) {
        return [eps, c, parity](FamilyMember m) {
            if (m.power % 2 != parity) return FinVector(c.field());
            FinVector out = eps.member({m.generator, m.power + 1});
            out.axpy(c, eps.member(m));
            return out;
        };
    };
    return {family_defined_operator(r.field(), eps, half(a, 0), "v'"),
            family_defined_operator(r.field(), eps, half(b, 1), "w'")};
}

Decomposition two_sum_elementary(const Endomorphism& u, const ElementaryWitness& witness, const QuadraticPoly& p1,
                                 const QuadraticPoly& p2, Index window, Index member_limit) {
    NormalizedPolys n = normalize_polys({p1, p2});
    if (!(n.shift.field() == u.field())) throw FieldMismatch("polynomials vs operator");
    if (!witness.source) throw WitnessInvalid(0, 0, "witness has no generator source");
    Endomorphism r = minus_scalar(u, n.shift);
    Index limit = member_limit ? member_limit : std::max<Index>(8 * window, 4 * witness.orbit_members);
    auto [v, w] = two_sum_canonical(r, witness.source, n.c[0], n.c[1], limit);

    Decomposition d{u, {}, n.shift, n.c, n.x, witness, std::nullopt, std::nullopt, Route::TwoSum, std::nullopt};
    d.summands.push_back({plus_scalar(v, n.x[0]), p1});
    d.summands.push_back({plus_scalar(w, n.x[1]), p2});
    return d;
}

namespace {

Reduction case_one(const Endomorphism& u, const Stratification& s, const Scalar& a, const Scalar& b, Index window) {
    Field f = u.field();
    const FamilyBasis& family = s.family();
    // Tops of even strata go to a top - x_{alpha+1} (u1), odd strata likewise with b (u2).
    auto half = [s, family, f](const Scalar& c, std::size_t parity) {
        return [s, family, f, c, parity](FamilyMember m) {
            Stratum st = s.stratum(m.generator);
            if (m.generator % 2 != parity || !st.dimension || m.power + 1 != *st.dimension) return FinVector(f);
            FinVector out = s.stratum(m.generator + 1).generator;
            out *= Scalar(f, -1L);
            out.axpy(c, family.member(m));
            return out;
        };
    };
    Endomorphism u1 = family_defined_operator(f, family, half(a, 0), "u1");
    Endomorphism u2 = family_defined_operator(f, family, half(b, 1), "u2");
    StrataOrder order(s);
    Connector conn = build_connector(u, order, [s, a, b](std::size_t alpha) {
        FinVector top = top_of(s, alpha);
        top *= -(alpha % 2 == 0 ? a : b);
        return top;
    });
    Endomorphism remainder = sub(sub(u, u1), u2);
    ElementaryWitness witness = elementary_witness(remainder, order, window);
    return Reduction{1, u1, u2, remainder, witness, order, std::nullopt, std::nullopt, conn.op};
}

Reduction case_two(const Endomorphism& u, const Stratification& s, const Scalar& a, const Scalar& b, Index window) {
    Field f = u.field();
    std::size_t M = *s.length() - 1;
    if (!s.stratum(0).is_infinite()) {
        throw HypothesisViolated("finite list of strata whose first stratum is finite-dimensional");
    }
    if (M == 0) {
        StrataOrder order(s);
        ElementaryWitness witness = elementary_witness(u, order, window);
        return Reduction{2, zero_operator(f), zero_operator(f), u, witness, order, std::nullopt, std::nullopt,
                         std::nullopt};
    }
    const FamilyBasis& family = s.family();
    Endomorphism pi = family_defined_operator(
        f, family, [family, f](FamilyMember m) { return m.generator == 0 ? family.member(m) : FinVector(f); },
        "pi");
    Endomorphism w_tilde = compose(pi, compose(u, sub(identity_operator(f), pi)));
    Endomorphism u_prime = sub(u, w_tilde);
    StrataOrder order = StrataOrder::infinite_first_last(s);
    auto c_of = [a, b](std::size_t alpha) { return alpha % 2 == 1 ? a : b; };
    Connector conn = build_connector(u_prime, order, [s, c_of](std::size_t alpha) {
        FinVector top = top_of(s, alpha);
        top *= -c_of(alpha);
        return top;
    });
    // Tops of odd strata go to a top - x_succ + y (u1), even strata likewise with b (u2),
    // where y = pi(u(top)) lies in V_0.
    auto half = [s, u, pi, M, f, c_of](std::size_t parity) {
        return [s, u, pi, M, f, c_of, parity](FamilyMember m) {
            Stratum st = s.stratum(m.generator);
            if (m.generator == 0 || m.generator % 2 != parity || m.power + 1 != *st.dimension) return FinVector(f);
            FinVector top = top_of(s, m.generator);
            std::size_t succ = m.generator == M ? 0 : m.generator + 1;
            FinVector out = pi.apply(u.apply(top));
            out -= s.stratum(succ).generator;
            out.axpy(c_of(m.generator), top);
            return out;
        };
    };
    Endomorphism u1 = family_defined_operator(f, family, half(1), "u1");
    Endomorphism u2 = family_defined_operator(f, family, half(0), "u2");
    Endomorphism remainder = sub(sub(u, u1), u2);
    ElementaryWitness witness = elementary_witness(remainder, order, window);
    return Reduction{2, u1, u2, remainder, witness, order, pi, w_tilde, conn.op};
}

} // namespace

Reduction from4to2(const Endomorphism& u, const Stratification& s, const Scalar& a, const Scalar& b,
                   Index window) {
    if (!(a.field() == u.field()) || !(b.field() == u.field()) || !(s.op().field() == u.field())) {
        throw FieldMismatch("reduction inputs");
    }
    if (s.kind() == StratKind::OmegaIndexed) return case_one(u, s, a, b, window);
    return case_two(u, s, a, b, window);
}

Decomposition four_sum(const Endomorphism& u, const std::vector<QuadraticPoly>& polys, const DecomposeConfig& config) {
    if (polys.size() != 4) throw Error("four_sum needs exactly four polynomials");
    NormalizedPolys n = normalize_polys(polys);
    if (!(n.shift.field() == u.field())) throw FieldMismatch("polynomials vs operator");
    Endomorphism r = minus_scalar(u, n.shift);
    Stratification s = build_stratification(r, config.strat);
    Index window = config.witness_window ? config.witness_window : config.strat.window;
    Reduction red = from4to2(r, s, n.c[0], n.c[1], window);
    Index limit = std::max<Index>(config.strat.family_limit(), 4 * red.witness.orbit_members);
    auto [v, w] = two_sum_canonical(red.remainder, red.witness.source, n.c[2], n.c[3], limit);

    Decomposition d{u, {}, n.shift, n.c, n.x, red.witness, s, red.reduction_case, Route::FourSum, std::nullopt};
    d.summands.push_back({plus_scalar(red.u1, n.x[0]), polys[0]});
    d.summands.push_back({plus_scalar(red.u2, n.x[1]), polys[1]});
    d.summands.push_back({plus_scalar(v, n.x[2]), polys[2]});
    d.summands.push_back({plus_scalar(w, n.x[3]), polys[3]});
    return d;
}

void require_partition(const std::vector<BlockDescriptor>& blocks) {
    if (blocks.empty()) throw BlockOverlap("no blocks");
    Index bound = 0;
    Index period = 1;
    bool unbounded = false;
    for (const auto& b : blocks) {
        if (b.kind == BlockDescriptor::Kind::Residue) {
            if (b.stride == 0) throw BlockOverlap("residue block with stride 0");
            period = std::lcm(period, b.stride);
            unbounded = true;
        } else if (!b.end) {
            unbounded = true;
        }
        bound = std::max(bound, b.end.value_or(b.offset));
    }
    if (!unbounded) throw BlockOverlap("bounded blocks cannot cover N");
    // Membership is periodic past every offset and range end.
    for (Index n = 0; n < bound + period; ++n) {
        std::size_t hits = 0;
        for (const auto& b : blocks) hits += b.contains(n) ? 1 : 0;
        if (hits != 1) {
            throw BlockOverlap("index " + std::to_string(n) + " lies in " + std::to_string(hits) + " blocks");
        }
    }
}

Endomorphism block_operator(const std::vector<std::pair<BlockDescriptor, Endomorphism>>& parts) {
    if (parts.empty()) throw BlockOverlap("no blocks");
    std::vector<BlockDescriptor> blocks;
    for (const auto& [block, op] : parts) {
        if (!(op.field() == parts.front().second.field())) throw FieldMismatch("block operators");
        blocks.push_back(block);
    }
    require_partition(blocks);
    Field f = parts.front().second.field();
    std::string description = "blocks(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        description += (i ? ", " : "") + parts[i].first.to_string() + ": " + parts[i].second.description();
    }
    description += ")";
    return Endomorphism(
        f,
        [parts, f](Index j) {
            for (const auto& [block, op] : parts) {
                if (!block.contains(j)) continue;
                std::vector<FinVector::Entry> entries;
                for (const auto& [i, value] : op.column(block.to_local(j)).entries()) {
                    if (auto size = block.size(); size && i >= *size) {
                        throw InvariantViolation("block operator leaves its block " + block.to_string());
                    }
                    entries.emplace_back(block.to_global(i), value);
                }
                return FinVector(f, std::move(entries));
            }
            throw BlockOverlap("index " + std::to_string(j) + " is in no block");
        },
        {}, description);
}

Decomposition direct_sum_decompositions(const std::vector<std::pair<BlockDescriptor, Decomposition>>& parts) {
    if (parts.empty()) throw BlockOverlap("no blocks");
    const Decomposition& first = parts.front().second;
    for (const auto& [block, d] : parts) {
        if (d.summands.size() != first.summands.size()) throw PolyMismatch("summand counts differ");
        for (std::size_t k = 0; k < d.summands.size(); ++k) {
            if (!(d.summands[k].poly == first.summands[k].poly)) {
                throw PolyMismatch(d.summands[k].poly.to_string() + " vs " + first.summands[k].poly.to_string());
            }
        }
    }
    if (parts.size() == 1 && parts.front().first == BlockDescriptor::range(0, std::nullopt)) return first;

    auto combine = [&parts](auto pick) {
        std::vector<std::pair<BlockDescriptor, Endomorphism>> ops;
        for (const auto& [block, d] : parts) ops.emplace_back(block, pick(d));
        return block_operator(ops);
    };
    Decomposition out{combine([](const Decomposition& d) { return d.input; }),
                      {},
                      first.shift,
                      first.canonical,
                      first.smaller_roots,
                      std::nullopt,
                      std::nullopt,
                      std::nullopt,
                      Route::DirectSum,
                      std::nullopt};
    for (std::size_t k = 0; k < first.summands.size(); ++k) {
        out.summands.push_back(
            {combine([k](const Decomposition& d) { return d.summands[k].op; }), first.summands[k].poly});
    }
    return out;
}

} // namespace quadsum
