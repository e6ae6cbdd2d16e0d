#include "quadsum/verify.hpp"

#include <exception>
#include <random>

namespace quadsum {

namespace {

using Failure = ValidationReport::Failure;
using Check = ValidationReport::Check;

/// Task t < N checks the sum on column t; task N + k N + j checks summand k on column j.
std::optional<Failure> run_task(const Endomorphism& u, const Decomposition& d, Index window, Index t) {
    Field f = u.field();
    if (t < window) {
        FinVector residual = u.column(t);
        for (const auto& s : d.summands) residual -= s.op.column(t);
        if (residual.is_zero()) return std::nullopt;
        return Failure{Check::Sum, std::nullopt, t, residual, "sum of summands differs from the operator"};
    }
    std::size_t k = (t - window) / window;
    Index j = (t - window) % window;
    const Summand& s = d.summands[k];
    const FinVector& col = s.op.column(j);
    FinVector residual = s.op.apply(col);
    residual.axpy(s.poly.beta(), col);
    residual.axpy(s.poly.gamma(), FinVector::unit(f, j));
    if (residual.is_zero()) return std::nullopt;
    return Failure{Check::Annihilation, k, j, residual, "p(u_k) is nonzero on this column"};
}

ValidationReport assemble(const Decomposition& d, Index window, std::vector<std::optional<Failure>>& slots) {
    ValidationReport report;
    report.window = window;
    report.results.push_back({Check::Sum, std::nullopt, window, true});
    for (std::size_t k = 0; k < d.summands.size(); ++k) report.results.push_back({Check::Annihilation, k, window, true});
    for (auto& slot : slots) {
        if (!slot) continue;
        std::size_t idx = slot->summand ? *slot->summand + 1 : 0;
        report.results[idx].passed = false;
        report.failures.push_back(std::move(*slot));
    }
    return report;
}

void check_inputs(const Endomorphism& u, const Decomposition& d) {
    for (const auto& s : d.summands) {
        if (!(s.op.field() == u.field()) || !(s.poly.field() == u.field())) throw FieldMismatch("decomposition");
    }
}

/// Runs body(i) for i < n in parallel; the first exception is rethrown after the loop.
template <typename Body>
void parallel_for(Index n, Body body) {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<Index>(i));
        } catch (...) {
#pragma omp critical(quadsum_parallel_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

} // namespace

ValidationReport check_decomposition(const Endomorphism& u, const Decomposition& d, Index window) {
    check_inputs(u, d);
    Index tasks = window * (1 + d.summands.size());
    std::vector<std::optional<Failure>> slots(tasks);
    parallel_for(tasks, [&](Index t) { slots[t] = run_task(u, d, window, t); });
    return assemble(d, window, slots);
}

ValidationReport check_decomposition_serial(const Endomorphism& u, const Decomposition& d, Index window) {
    check_inputs(u, d);
    Index tasks = window * (1 + d.summands.size());
    std::vector<std::optional<Failure>> slots(tasks);
    for (Index t = 0; t < tasks; ++t) slots[t] = run_task(u, d, window, t);
    return assemble(d, window, slots);
}

Scalar trace_finite_rank(const Endomorphism& u, const std::vector<FinVector>& image_span) {
    auto zero_from = u.traits().zero_columns_from;
    if (!zero_from) throw ImageSpanInvalid("operator " + u.description() + " has no finite-support certificate");
    SpanBasis span(u.field());
    std::vector<FinVector> basis;
    for (const auto& v : image_span) {
        if (!(v.field() == u.field())) throw FieldMismatch("image span");
        if (span.insert(v).item) basis.push_back(v);
    }
    for (Index j = 0; j < *zero_from; ++j) {
        FinVector residual = span.reduce(u.column(j));
        if (!residual.is_zero()) {
            throw ImageSpanInvalid("column " + std::to_string(j) + " leaves the span by " + residual.to_string());
        }
    }
    Scalar trace = Scalar::zero(u.field());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Membership m = span.membership(u.apply(basis[i]));
        if (!m.member) throw ImageSpanInvalid("image of a span vector leaves the span");
        trace += m.item_coefficients.at(i);
    }
    return trace;
}

std::string to_string(Certificate::Kind kind) {
    switch (kind) {
    case Certificate::Kind::TraceObstruction: return "TraceObstruction";
    case Certificate::Kind::ScalarThreeIdempotentObstruction: return "ScalarThreeIdempotentObstruction";
    case Certificate::Kind::NotApplicable: return "NotApplicable";
    }
    return "NotApplicable";
}

Certificate three_squarezero_obstruction(const Endomorphism& u, const std::vector<FinVector>& image_span) {
    Scalar trace = trace_finite_rank(u, image_span);
    Certificate c;
    c.hypotheses.emplace_back("finite rank with validated image span", true);
    c.hypotheses.emplace_back("trace nonzero", !trace.is_zero());
    c.value = trace;
    if (trace.is_zero()) {
        c.reason = "trace is zero";
        return c;
    }
    c.kind = Certificate::Kind::TraceObstruction;
    c.reason = "a sum of three square-zero operators has trace 0, this trace is " + trace.to_string();
    return c;
}

Certificate three_idempotent_scalar_obstruction(const Scalar& alpha) {
    Field f = alpha.field();
    bool outside = true;
    for (long k = 0; k <= 3; ++k) outside = outside && !(alpha == Scalar(f, k));
    bool not_three_halves = !(Scalar(f, 2L) * alpha == Scalar(f, 3L));
    Certificate c;
    c.hypotheses.emplace_back("alpha not in {0, 1, 2, 3}", outside);
    c.hypotheses.emplace_back("2 alpha != 3", not_three_halves);
    c.value = alpha;
    if (outside && not_three_halves) {
        c.kind = Certificate::Kind::ScalarThreeIdempotentObstruction;
        c.reason = alpha.to_string() + " id is not a sum of three idempotents";
    } else {
        c.reason = outside ? "2 alpha = 3" : "alpha in {0, 1, 2, 3}";
    }
    return c;
}

namespace {

Scalar random_scalar(Field f, std::mt19937_64& rng) {
    if (f.is_rationals()) return Scalar(f, std::uniform_int_distribution<long>(-3, 3)(rng));
    std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, f.characteristic() - 1)(rng);
    return Scalar(f, static_cast<long>(r));
}

DenseMatrix random_squarezero(Field f, Index d, std::mt19937_64& rng) {
    Index s = std::uniform_int_distribution<Index>(0, d)(rng);
    DenseMatrix n(f, d, d);
    for (Index r = 0; r < s; ++r) {
        for (Index c = s; c < d; ++c) n(r, c) = random_scalar(f, rng);
    }
    for (;;) {
        DenseMatrix p(f, d, d);
        for (Index r = 0; r < d; ++r) {
            for (Index c = 0; c < d; ++c) p(r, c) = random_scalar(f, rng);
        }
        if (auto inv = p.inverse()) return p * n * *inv;
    }
}

bool trial_passes(Field f, Index d, std::uint64_t seed, Index trial) {
    auto ms = squarezero_trial(f, d, seed, trial);
    DenseMatrix sum(f, d, d);
    for (const auto& m : ms) {
        if (!(m * m).is_zero()) return false;
        sum = sum + m;
    }
    return sum.trace().is_zero();
}

void check_oracle_args(Index dim, Index trials) {
    if (dim < 1 || dim > 6) throw Error("oracle dimension must be in [1, 6]");
    if (trials < 1) throw Error("oracle needs at least one trial");
}

} // namespace

std::vector<DenseMatrix> squarezero_trial(Field f, Index dim, std::uint64_t seed, Index trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<DenseMatrix> out;
    for (int i = 0; i < 3; ++i) out.push_back(random_squarezero(f, dim, rng));
    return out;
}

SquareZeroOracleReport oracle_three_squarezero(Field f, Index dim, Index trials, std::uint64_t seed) {
    check_oracle_args(dim, trials);
    std::vector<char> ok(trials, 0);
    parallel_for(trials, [&](Index t) { ok[t] = trial_passes(f, dim, seed, t) ? 1 : 0; });
    SquareZeroOracleReport report{f, dim, trials, seed, 0, {}};
    for (Index t = 0; t < trials; ++t) {
        if (ok[t]) ++report.passed;
        else report.failed_trials.push_back(t);
    }
    return report;
}

SquareZeroOracleReport oracle_three_squarezero_serial(Field f, Index dim, Index trials, std::uint64_t seed) {
    check_oracle_args(dim, trials);
    SquareZeroOracleReport report{f, dim, trials, seed, 0, {}};
    for (Index t = 0; t < trials; ++t) {
        if (trial_passes(f, dim, seed, t)) ++report.passed;
        else report.failed_trials.push_back(t);
    }
    return report;
}

std::vector<DenseMatrix> enumerate_idempotents(std::uint64_t p, Index dim) {
    Field f = Field::prime(p);
    if (dim < 1) throw Error("dimension must be at least 1");
    std::uint64_t total = 1;
    for (Index i = 0; i < dim * dim; ++i) {
        total *= p;
        if (total > 50'000'000) throw Error("idempotent enumeration too large");
    }
    std::vector<DenseMatrix> out;
    for (std::uint64_t code = 0; code < total; ++code) {
        DenseMatrix m(f, dim, dim);
        std::uint64_t c = code;
        // Most significant digit first, so the list is lexicographic in row-major entries.
        for (Index i = dim * dim; i-- > 0;) {
            m(i / dim, i % dim) = Scalar(f, static_cast<long>(c % p));
            c /= p;
        }
        if (m * m == m) out.push_back(std::move(m));
    }
    return out;
}

namespace {

struct IdempotentSearch {
    std::uint64_t p;
    Index dim;
    std::vector<std::vector<std::uint64_t>> residues;
    std::vector<std::uint64_t> targets;

    /// Target alpha with a + b + c = alpha I, if any.
    std::optional<std::uint64_t> hit(Index a, Index b, Index c) const {
        const auto& x = residues[a];
        const auto& y = residues[b];
        const auto& z = residues[c];
        std::uint64_t diag = (x[0] + y[0] + z[0]) % p;
        for (Index r = 0; r < dim; ++r) {
            for (Index col = 0; col < dim; ++col) {
                Index i = r * dim + col;
                std::uint64_t v = (x[i] + y[i] + z[i]) % p;
                if (v != (r == col ? diag : 0)) return std::nullopt;
            }
        }
        for (auto t : targets) {
            if (t == diag) return t;
        }
        return std::nullopt;
    }
};

IdempotentOracleReport prepare(std::uint64_t p, Index dim, IdempotentSearch& search) {
    Field f = Field::prime(p);
    auto idem = enumerate_idempotents(p, dim);
    IdempotentOracleReport report;
    report.p = p;
    report.dim = dim;
    report.idempotents = idem.size();
    report.triples = static_cast<std::uint64_t>(idem.size()) * idem.size() * idem.size();
    search.p = p;
    search.dim = dim;
    for (const auto& m : idem) {
        std::vector<std::uint64_t> r;
        for (Index i = 0; i < dim * dim; ++i) r.push_back(m(i / dim, i % dim).residue());
        search.residues.push_back(std::move(r));
    }
    for (std::uint64_t a = 0; a < p; ++a) {
        Scalar alpha(f, static_cast<long>(a));
        if (three_idempotent_scalar_obstruction(alpha).issued()) {
            report.targets.push_back(alpha);
            search.targets.push_back(a);
        }
    }
    return report;
}

using Hits = std::vector<std::pair<std::uint64_t, std::vector<Index>>>;

Hits scan_first(const IdempotentSearch& search, Index a) {
    Hits hits;
    Index n = search.residues.size();
    for (Index b = 0; b < n; ++b) {
        for (Index c = 0; c < n; ++c) {
            if (auto t = search.hit(a, b, c)) hits.push_back({*t, {a, b, c}});
        }
    }
    return hits;
}

void record(IdempotentOracleReport& report, const std::vector<Hits>& per_first) {
    Field f = Field::prime(report.p);
    for (const auto& hits : per_first) {
        for (const auto& [t, triple] : hits) report.counterexamples.push_back({Scalar(f, static_cast<long>(t)), triple});
    }
}

} // namespace

IdempotentOracleReport oracle_three_idempotents_smallfield(std::uint64_t p, Index dim) {
    IdempotentSearch search;
    IdempotentOracleReport report = prepare(p, dim, search);
    if (report.vacuous()) return report;
    std::vector<Hits> per_first(search.residues.size());
    parallel_for(per_first.size(), [&](Index a) { per_first[a] = scan_first(search, a); });
    record(report, per_first);
    return report;
}

IdempotentOracleReport oracle_three_idempotents_smallfield_serial(std::uint64_t p, Index dim) {
    IdempotentSearch search;
    IdempotentOracleReport report = prepare(p, dim, search);
    if (report.vacuous()) return report;
    std::vector<Hits> per_first(search.residues.size());
    for (Index a = 0; a < per_first.size(); ++a) per_first[a] = scan_first(search, a);
    record(report, per_first);
    return report;
}

} // namespace quadsum
