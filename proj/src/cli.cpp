#include "quadsum/cli.hpp"

#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "quadsum/report_io.hpp"

namespace quadsum {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvariantViolation*>(&e)) return exit_internal;
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const SpecParseError*>(&e) || dynamic_cast<const FieldMismatch*>(&e)) {
        return exit_usage;
    }
    if (dynamic_cast<const NotSplit*>(&e) || dynamic_cast<const HypothesisViolated*>(&e) ||
        dynamic_cast<const WitnessInvalid*>(&e) || dynamic_cast<const HorizonExceeded*>(&e) ||
        dynamic_cast<const UndecidableMembership*>(&e) || dynamic_cast<const NotInfiniteDimensional*>(&e) ||
        dynamic_cast<const HypothesisFailed*>(&e) || dynamic_cast<const ImageSpanInvalid*>(&e) ||
        dynamic_cast<const BlockOverlap*>(&e) || dynamic_cast<const CorrectionOutOfSpan*>(&e)) {
        return exit_check_failed;
    }
    return exit_internal;
}

namespace {

std::string read_file(const std::string& path) {
    if (path.empty()) throw UsageError("missing file path");
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << text << '\n';
}

Index window_of(const RunConfig& c) { return c.window.value_or(64); }

StratifyConfig strat_config(const RunConfig& c) {
    StratifyConfig s;
    s.mode = c.mode;
    s.window = window_of(c);
    s.orbit_horizon = c.orbit_horizon;
    s.family_horizon = c.family_horizon;
    return s;
}

void check_config(const RunConfig& c) {
    if (c.window && *c.window < 1) throw UsageError("window must be at least 1");
    Index w = window_of(c);
    if (c.orbit_horizon && c.orbit_horizon < w) throw UsageError("orbit horizon must be at least the window");
    if (c.family_horizon && c.family_horizon < w) throw UsageError("family horizon must be at least the window");
}

std::string mode_name(const RunConfig& c, const Endomorphism& u) {
    if (c.mode) return to_string(*c.mode);
    return to_string(u.certificate().is_unknown() ? StratMode::Heuristic : StratMode::Certified);
}

void print_report_table(std::ostream& out, const ValidationReport& r) {
    out << std::left << std::setw(14) << "check" << std::setw(9) << "summand" << std::setw(9) << "columns"
        << "result\n";
    for (const auto& res : r.results) {
        out << std::setw(14) << to_string(res.check) << std::setw(9)
            << (res.summand ? std::to_string(*res.summand) : "-") << std::setw(9) << res.columns
            << (res.passed ? "pass" : "FAIL") << '\n';
    }
    for (const auto& f : r.failures) {
        out << "  failure: " << to_string(f.check) << " column " << f.column << " residual "
            << f.residual.to_string() << '\n';
    }
    out << (r.pass() ? "PASS" : "FAIL") << " on window " << r.window << '\n';
}

int cmd_stratify(const RunConfig& c, std::ostream& out) {
    OperatorFile file = parse_operator_file(read_file(c.input), c.field);
    Endomorphism u = make_operator(file);
    Index window = window_of(c);
    Stratification s = build_stratification(u, strat_config(c));
    StratValidation v = validate_stratification(u, s, window);
    std::size_t count = std::max<std::size_t>(v.strata_used, 1);
    Json strata = strata_to_json(s, count);
    if (c.pretty) {
        out << "kind " << to_string(s.kind()) << ", mode " << to_string(s.mode()) << '\n';
        out << std::left << std::setw(7) << "alpha" << std::setw(8) << "n" << std::setw(12) << "provenance"
            << "generator\n";
        for (const auto& st : strata["strata"]) {
            out << std::setw(7) << st["index"].get<Index>() << std::setw(8)
                << (st["dimension"].is_null() ? std::string("inf") : std::to_string(st["dimension"].get<Index>()))
                << std::setw(12) << st["provenance"].get<Index>() << st["generator"].dump() << '\n';
        }
        out << (v.valid() ? "VALID" : "INVALID") << " on window " << window << '\n';
        for (const auto& f : v.failures) out << "  " << to_string(f.kind) << ": " << f.message << '\n';
    } else {
        Json j = {{"command", "stratify"},
                  {"field", file.field.to_string()},
                  {"window", window},
                  {"seed", c.seed},
                  {"stratification", strata},
                  {"validation", strat_validation_to_json(v)}};
        if (!c.output.empty()) write_text(c.output, j.dump(2));
        out << j.dump(2) << '\n';
    }
    return v.valid() ? exit_ok : exit_check_failed;
}

Decomposition decompose_operator(const Endomorphism& u, const std::vector<QuadraticPoly>& polys,
                                 const RunConfig& c) {
    StratifyConfig sc = strat_config(c);
    if (polys.size() == 4) {
        DecomposeConfig dc;
        dc.strat = sc;
        return four_sum(u, polys, dc);
    }
    if (polys.size() != 2) throw UsageError("expected 2 or 4 polynomials, got " + std::to_string(polys.size()));
    // Two summands need an elementary operator: a finite list of free strata.
    Stratification s = build_stratification(u, sc);
    if (s.kind() != StratKind::FiniteList) {
        throw HypothesisViolated("two summands need an elementary operator; the strata are omega-indexed");
    }
    std::vector<FinVector> generators;
    for (std::size_t alpha = 0; alpha < *s.length(); ++alpha) {
        Stratum st = s.stratum(alpha);
        if (!st.is_infinite()) {
            throw HypothesisViolated("two summands need an elementary operator; stratum " + std::to_string(alpha) +
                                     " is finite-dimensional");
        }
        generators.push_back(st.generator);
    }
    ElementaryWitness w = witness_from_generators(u, generators, sc.window, sc.family_limit());
    Decomposition d = two_sum_elementary(u, w, polys[0], polys[1], sc.window, sc.family_limit());
    d.stratification = s;
    return d;
}

int cmd_decompose(const RunConfig& c, std::ostream& out) {
    OperatorFile file = parse_operator_file(read_file(c.input), c.field);
    Endomorphism u = make_operator(file);
    std::vector<QuadraticPoly> polys = parse_poly_list(c.polys, file.field);
    Index window = window_of(c);
    Decomposition d = decompose_operator(u, polys, c);
    d.report = check_decomposition(u, d, window);
    Json dec = decomposition_to_json(d, file, {window, c.seed, mode_name(c, u)});
    if (!c.output.empty()) write_text(c.output, dec.dump(2));
    if (c.pretty) {
        out << "route " << to_string(d.route);
        if (d.reduction_case) out << " (case " << *d.reduction_case << ")";
        out << ", shift " << d.shift.to_string() << ", " << d.summands.size() << " summands\n";
        print_report_table(out, *d.report);
    } else {
        Json summary = {{"command", "decompose"},
                        {"field", file.field.to_string()},
                        {"window", window},
                        {"seed", c.seed},
                        {"route", to_string(d.route)},
                        {"reduction_case", dec["reduction_case"]},
                        {"out", c.output},
                        {"report", report_to_json(*d.report)}};
        out << summary.dump(2) << '\n';
    }
    return d.report->pass() ? exit_ok : exit_check_failed;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
    OperatorFile file = parse_operator_file(read_file(c.input), c.field);
    DecFile dec = parse_dec_file(read_file(c.dec));
    if (serialize_operator_file(file) != serialize_operator_file(dec.input)) {
        err << "decomposition was computed for a different operator\n";
        return exit_check_failed;
    }
    Index window = c.window.value_or(dec.window);
    if (window > dec.window) throw UsageError("window exceeds the stored window " + std::to_string(dec.window));
    Endomorphism u = make_operator(file);
    Decomposition d = decomposition_from_tables(dec, u);
    ValidationReport report = check_decomposition(u, d, window);
    if (c.pretty) {
        print_report_table(out, report);
    } else {
        Json j = {{"command", "verify"},
                  {"field", file.field.to_string()},
                  {"window", window},
                  {"seed", dec.seed},
                  {"report", report_to_json(report)}};
        out << j.dump(2) << '\n';
    }
    return report.pass() ? exit_ok : exit_check_failed;
}

int cmd_oracle(const RunConfig& c, std::ostream& out) {
    Json j;
    bool pass = false;
    if (c.prop == "3squarezero") {
        auto r = oracle_three_squarezero(c.field, c.dim, c.trials, c.seed);
        j = oracle_to_json(r);
        pass = r.pass();
    } else if (c.prop == "3idem") {
        if (c.field.is_rationals()) throw UsageError("the idempotent oracle needs a prime field");
        auto r = oracle_three_idempotents_smallfield(c.field.characteristic(), c.dim);
        j = oracle_to_json(r);
        pass = r.pass();
    } else {
        throw UsageError("--prop must be 3squarezero or 3idem");
    }
    j["command"] = "oracle";
    if (c.pretty) {
        out << j["prop"].get<std::string>() << " over " << j["field"].get<std::string>() << ", dim " << c.dim << ": "
            << j["verdict"].get<std::string>() << '\n';
    } else {
        out << j.dump(2) << '\n';
    }
    return pass ? exit_ok : exit_check_failed;
}

struct DemoCase {
    std::string name;
    std::function<bool()> check;
};

std::vector<DemoCase> demo_cases() {
    Field q = Field::rationals();
    Scalar zero = Scalar::zero(q);
    Scalar one = Scalar::one(q);
    QuadraticPoly sq(zero, zero);
    QuadraticPoly idem(-one, zero);
    auto four = [](Endomorphism u, std::vector<QuadraticPoly> polys) {
        DecomposeConfig dc;
        Decomposition d = four_sum(u, polys, dc);
        return check_decomposition(u, d, 64).pass();
    };
    auto two = [q](QuadraticPoly p) {
        Endomorphism u = shift_operator(q);
        ElementaryWitness w = witness_from_generators(u, {FinVector::unit(q, 0)}, 128, 1024);
        return check_decomposition(u, two_sum_elementary(u, w, p, p, 128), 128).pass();
    };
    spec::BlockSizes sizes;
    sizes.kind = spec::BlockSizes::Kind::Arithmetic;
    sizes.start = 1;
    sizes.step = 1;
    Endomorphism jordan = make_operator(*spec::jordan(sizes, {zero}), q);
    Endomorphism patch = make_operator(*spec::finite_patch(spec::shift(), {{0, FinVector(q)}}), q);
    Endomorphism rank_one = make_operator(*spec::finite_patch(spec::scalar(zero), {{0, FinVector::unit(q, 0)}}), q);
    return {
        {"two summands t^2, t^2 of the shift, window 128", [=] { return two(sq); }},
        {"two summands t^2 - t, t^2 - t of the shift, window 128", [=] { return two(idem); }},
        {"four square-zero summands of 0, window 64", [=] { return four(zero_operator(q), {sq, sq, sq, sq}); }},
        {"four idempotents summing to id, window 64", [=] { return four(identity_operator(q), {idem, idem, idem, idem}); }},
        {"four idempotents summing to nilpotent Jordan blocks 1,2,3,..., window 64",
         [=] { return four(jordan, {idem, idem, idem, idem}); }},
        {"four square-zero summands of the patched shift, window 64", [=] { return four(patch, {sq, sq, sq, sq}); }},
        {"polys t^2-1, t^2+2t, t^2-t, t^2 on the shift, window 64",
         [=] {
             return four(shift_operator(q), {QuadraticPoly(zero, -one), QuadraticPoly(Scalar(q, 2L), zero), idem, sq});
         }},
        {"no three idempotents of F_7^{2x2} sum to 4I or 6I",
         [] { return oracle_three_idempotents_smallfield(7, 2).pass(); }},
        {"three square-zero 2x2 rational matrices sum to trace 0 (1000 trials)",
         [q] { return oracle_three_squarezero(q, 2, 1000, 0).pass(); }},
        {"5 over F_7 is not obstructed (2*5 = 3)",
         [] { return !three_idempotent_scalar_obstruction(Scalar(Field::prime(7), 5L)).issued(); }},
        {"rank-1 idempotent has trace obstruction 1",
         [=] {
             Certificate c = three_squarezero_obstruction(rank_one, {FinVector::unit(q, 0)});
             return c.kind == Certificate::Kind::TraceObstruction && c.value->is_one();
         }},
    };
}

int cmd_demo(std::ostream& out) {
    bool all = true;
    for (const auto& demo : demo_cases()) {
        bool ok = false;
        std::string detail;
        try {
            ok = demo.check();
        } catch (const std::exception& e) {
            detail = std::string(": ") + e.what();
        }
        all = all && ok;
        out << (ok ? "PASS " : "FAIL ") << demo.name << detail << '\n';
    }
    return all ? exit_ok : exit_check_failed;
}

} // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        check_config(config);
        if (config.subcommand == "stratify") return cmd_stratify(config, out);
        if (config.subcommand == "decompose") return cmd_decompose(config, out);
        if (config.subcommand == "verify") return cmd_verify(config, out, err);
        if (config.subcommand == "oracle") return cmd_oracle(config, out);
        if (config.subcommand == "demo") return cmd_demo(out);
        throw UsageError("unknown subcommand '" + config.subcommand + "'");
    } catch (const std::exception& e) {
        int code = exit_code_for(e);
        err << "error: " << e.what() << '\n';
        if (code == exit_internal) err << "internal error while running '" << config.subcommand << "'\n";
        return code;
    }
}

} // namespace quadsum
