#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "quadsum/decompose.hpp"
#include "quadsum/operator_spec.hpp"
#include "quadsum/verify.hpp"

namespace quadsum {

using Json = nlohmann::json;

/// [[index, "scalar"], ...] in increasing index order.
Json vector_to_json(const FinVector& v);
FinVector vector_from_json(const Json& j, Field f);

/// ["1", "beta", "gamma"].
Json poly_to_json(const QuadraticPoly& p);
/// Accepts strings or integers; the leading coefficient must be 1.
QuadraticPoly poly_from_json(const Json& j, Field f);

/// A preset name (squarezero, idempotents, squarezero-preset-2, idempotents-preset-2)
/// or a JSON list of coefficient triples. Throws ParseError.
std::vector<QuadraticPoly> parse_poly_list(const std::string& text, Field f);

Json report_to_json(const ValidationReport& report);
Json strat_validation_to_json(const StratValidation& v);
/// The first `count` strata (fewer for a shorter FiniteList).
Json strata_to_json(const Stratification& s, std::size_t count);
Json witness_to_json(const ElementaryWitness& w);
Json certificate_to_json(const Certificate& c);
Json oracle_to_json(const SquareZeroOracleReport& r);
Json oracle_to_json(const IdempotentOracleReport& r);

struct DecArtifactInfo {
    Index window = 0;
    std::uint64_t seed = 0;
    std::string mode;
};

/// Column tables of each summand on the window and on every index its window
/// columns reach, so the identities can be re-evaluated from the file alone.
Json decomposition_to_json(const Decomposition& d, const OperatorFile& input, const DecArtifactInfo& info);

struct DecFile {
    OperatorFile input;
    Index window = 0;
    std::uint64_t seed = 0;
    std::vector<QuadraticPoly> polys;
    std::vector<std::map<Index, FinVector>> tables;
    Scalar shift;
    std::string route;
};

DecFile parse_dec_file(const std::string& json_text);

/// Decomposition whose summands read their columns from the tables; a column outside
/// a table raises HorizonExceeded.
Decomposition decomposition_from_tables(const DecFile& file, const Endomorphism& input);

} // namespace quadsum
