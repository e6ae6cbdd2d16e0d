#include "quadsum/report_io.hpp"

#include <set>

namespace quadsum {

namespace {

Scalar scalar_from(const Json& j, Field f) {
    if (j.is_string()) return Scalar::parse(f, j.get<std::string>());
    if (j.is_number_integer()) return Scalar(f, static_cast<long>(j.get<std::int64_t>()));
    throw ParseError("expected a scalar, got " + j.dump());
}

Index index_from(const Json& j) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw ParseError("expected an index, got " + j.dump());
    return static_cast<Index>(j.get<std::int64_t>());
}

const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    return j.at(key);
}

Json optional_index(const std::optional<Index>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace

Json vector_to_json(const FinVector& v) {
    Json out = Json::array();
    for (const auto& [index, value] : v.entries()) out.push_back(Json::array({index, value.to_string()}));
    return out;
}

FinVector vector_from_json(const Json& j, Field f) {
    if (!j.is_array()) throw ParseError("expected [[index, scalar], ...], got " + j.dump());
    std::vector<FinVector::Entry> entries;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) throw ParseError("bad vector entry " + pair.dump());
        entries.emplace_back(index_from(pair[0]), scalar_from(pair[1], f));
    }
    return FinVector(f, std::move(entries));
}

Json poly_to_json(const QuadraticPoly& p) {
    return Json::array({"1", p.beta().to_string(), p.gamma().to_string()});
}

QuadraticPoly poly_from_json(const Json& j, Field f) {
    if (!j.is_array() || j.size() != 3) throw ParseError("polynomial must be [1, beta, gamma], got " + j.dump());
    if (!scalar_from(j[0], f).is_one()) throw ParseError("polynomial must be monic, got " + j.dump());
    return QuadraticPoly(scalar_from(j[1], f), scalar_from(j[2], f));
}

std::vector<QuadraticPoly> parse_poly_list(const std::string& text, Field f) {
    Scalar zero = Scalar::zero(f);
    QuadraticPoly square_zero(zero, zero);
    QuadraticPoly idempotent(-Scalar::one(f), zero);
    if (text == "squarezero") return std::vector<QuadraticPoly>(4, square_zero);
    if (text == "idempotents") return std::vector<QuadraticPoly>(4, idempotent);
    if (text == "squarezero-preset-2") return std::vector<QuadraticPoly>(2, square_zero);
    if (text == "idempotents-preset-2") return std::vector<QuadraticPoly>(2, idempotent);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception&) {
        throw ParseError("unknown polynomial preset or malformed list: " + text);
    }
    if (!j.is_array() || j.empty()) throw ParseError("polynomial list must be a non-empty array");
    std::vector<QuadraticPoly> out;
    for (const auto& p : j) out.push_back(poly_from_json(p, f));
    return out;
}

Json report_to_json(const ValidationReport& report) {
    Json results = Json::array();
    for (const auto& r : report.results) {
        results.push_back({{"check", to_string(r.check)},
                           {"summand", optional_index(r.summand)},
                           {"columns", r.columns},
                           {"passed", r.passed}});
    }
    Json failures = Json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"check", to_string(f.check)},
                            {"summand", optional_index(f.summand)},
                            {"column", f.column},
                            {"residual", vector_to_json(f.residual)},
                            {"message", f.message}});
    }
    return {{"window", report.window}, {"pass", report.pass()}, {"results", results}, {"failures", failures}};
}

Json strat_validation_to_json(const StratValidation& v) {
    Json failures = Json::array();
    for (const auto& f : v.failures) {
        failures.push_back({{"kind", to_string(f.kind)},
                            {"stratum", f.stratum},
                            {"power", f.power},
                            {"column", f.column},
                            {"message", f.message}});
    }
    return {{"window", v.window},
            {"valid", v.valid()},
            {"family_members", v.family_members},
            {"strata_used", v.strata_used},
            {"failures", failures}};
}

Json strata_to_json(const Stratification& s, std::size_t count) {
    Json strata = Json::array();
    for (std::size_t alpha = 0; alpha < count && s.has(alpha); ++alpha) {
        Stratum st = s.stratum(alpha);
        Json relation = Json::array();
        for (const auto& c : st.relation) relation.push_back(c.to_string());
        strata.push_back({{"index", alpha},
                          {"generator", vector_to_json(st.generator)},
                          {"dimension", optional_index(st.dimension)},
                          {"provenance", st.provenance},
                          {"position", st.position},
                          {"relation", relation},
                          {"certified", st.certified},
                          {"free_horizon", st.free_horizon}});
    }
    return {{"kind", to_string(s.kind())},
            {"mode", to_string(s.mode())},
            {"length", optional_index(s.length())},
            {"heuristic", s.heuristic_flagged()},
            {"strata", strata}};
}

Json witness_to_json(const ElementaryWitness& w) {
    Json gens = Json::array();
    for (std::size_t i = 0; i < w.generators.size(); ++i) {
        gens.push_back({{"vector", vector_to_json(w.generators[i])},
                        {"stratum", i < w.generator_strata.size() ? Json(w.generator_strata[i]) : Json(nullptr)},
                        {"m", i < w.m.size() ? optional_index(w.m[i]) : Json(nullptr)}});
    }
    return {{"window", w.window},
            {"generators", gens},
            {"positions_checked", w.positions_checked},
            {"orbit_members", w.orbit_members}};
}

Json certificate_to_json(const Certificate& c) {
    Json hyps = Json::array();
    for (const auto& [name, holds] : c.hypotheses) hyps.push_back({{"hypothesis", name}, {"holds", holds}});
    return {{"kind", to_string(c.kind)},
            {"value", c.value ? Json(c.value->to_string()) : Json(nullptr)},
            {"hypotheses", hyps},
            {"reason", c.reason}};
}

Json oracle_to_json(const SquareZeroOracleReport& r) {
    return {{"prop", "3squarezero"},
            {"field", r.field.to_string()},
            {"dim", r.dim},
            {"trials", r.trials},
            {"seed", r.seed},
            {"passed", r.passed},
            {"failed_trials", r.failed_trials},
            {"pass", r.pass()},
            {"verdict", r.pass() ? "no counterexample" : "counterexample found"}};
}

Json oracle_to_json(const IdempotentOracleReport& r) {
    Json targets = Json::array();
    for (const auto& t : r.targets) targets.push_back(t.to_string());
    Json counter = Json::array();
    for (const auto& [alpha, triple] : r.counterexamples) counter.push_back({{"alpha", alpha.to_string()}, {"triple", triple}});
    std::string verdict = r.vacuous() ? "vacuous" : (r.pass() ? "no counterexample" : "counterexample found");
    return {{"prop", "3idem"},
            {"field", Field::prime(r.p).to_string()},
            {"dim", r.dim},
            {"idempotents", r.idempotents},
            {"triples", r.triples},
            {"targets", targets},
            {"counterexamples", counter},
            {"pass", r.pass()},
            {"verdict", verdict}};
}

Json decomposition_to_json(const Decomposition& d, const OperatorFile& input, const DecArtifactInfo& info) {
    Json summands = Json::array();
    for (const auto& s : d.summands) {
        std::set<Index> needed;
        for (Index j = 0; j < info.window; ++j) {
            needed.insert(j);
            for (const auto& [i, value] : s.op.column(j).entries()) needed.insert(i);
        }
        Json columns = Json::array();
        for (Index j : needed) columns.push_back({{"column", j}, {"image", vector_to_json(s.op.column(j))}});
        summands.push_back({{"poly", poly_to_json(s.poly)}, {"columns", columns}});
    }
    Json polys = Json::array();
    for (const auto& s : d.summands) polys.push_back(poly_to_json(s.poly));
    Json canonical = Json::array();
    for (const auto& c : d.canonical) canonical.push_back(c.to_string());
    Json roots = Json::array();
    for (const auto& x : d.smaller_roots) roots.push_back(x.to_string());

    Json out = {{"field", input.field.to_string()},
                {"input", Json::parse(serialize_operator_file(input))},
                {"window", info.window},
                {"seed", info.seed},
                {"mode", info.mode},
                {"route", to_string(d.route)},
                {"reduction_case", d.reduction_case ? Json(*d.reduction_case) : Json(nullptr)},
                {"polys", polys},
                {"shift", d.shift.to_string()},
                {"canonical", canonical},
                {"smaller_roots", roots},
                {"summands", summands},
                {"witness", d.witness ? witness_to_json(*d.witness) : Json(nullptr)},
                {"stratification", nullptr},
                {"report", d.report ? report_to_json(*d.report) : Json(nullptr)}};
    if (d.stratification) {
        std::size_t count = std::min<std::size_t>(d.stratification->known_count(), info.window);
        out["stratification"] = strata_to_json(*d.stratification, count);
    }
    return out;
}

DecFile parse_dec_file(const std::string& json_text) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("decomposition file: ") + e.what());
    }
    try {
        DecFile file;
        file.input = parse_operator_file(require(j, "input").dump());
        Field f = file.input.field;
        if (!(Field::parse(require(j, "field").get<std::string>()) == f)) throw ParseError("field differs from input field");
        file.window = index_from(require(j, "window"));
        file.seed = require(j, "seed").get<std::uint64_t>();
        file.shift = scalar_from(require(j, "shift"), f);
        file.route = require(j, "route").get<std::string>();
        for (const auto& s : require(j, "summands")) {
            file.polys.push_back(poly_from_json(require(s, "poly"), f));
            std::map<Index, FinVector> table;
            for (const auto& c : require(s, "columns")) {
                Index col = index_from(require(c, "column"));
                if (!table.emplace(col, vector_from_json(require(c, "image"), f)).second) {
                    throw ParseError("duplicate column " + std::to_string(col));
                }
            }
            file.tables.push_back(std::move(table));
        }
        if (file.polys.empty()) throw ParseError("no summands");
        return file;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("decomposition file: ") + e.what());
    }
}

Decomposition decomposition_from_tables(const DecFile& file, const Endomorphism& input) {
    Field f = file.input.field;
    if (!(input.field() == f)) throw FieldMismatch("decomposition file vs operator");
    Decomposition d{input, {}, file.shift, {}, {}, std::nullopt, std::nullopt, std::nullopt, Route::FourSum, std::nullopt};
    if (file.route == to_string(Route::TwoSum)) d.route = Route::TwoSum;
    if (file.route == to_string(Route::DirectSum)) d.route = Route::DirectSum;
    if (file.route == to_string(Route::Model)) d.route = Route::Model;
    for (std::size_t k = 0; k < file.tables.size(); ++k) {
        auto table = std::make_shared<const std::map<Index, FinVector>>(file.tables[k]);
        Endomorphism op(
            f,
            [table, k](Index j) {
                auto it = table->find(j);
                if (it == table->end()) {
                    throw HorizonExceeded("summand " + std::to_string(k) + " has no stored column " + std::to_string(j));
                }
                return it->second;
            },
            {}, "table_" + std::to_string(k));
        d.summands.push_back({op, file.polys[k]});
    }
    return d;
}

} // namespace quadsum
