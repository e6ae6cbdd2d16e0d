#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>

#include "quadsum/errors.hpp"
#include "quadsum/stratify.hpp"

namespace quadsum {

struct RunConfig {
    /// stratify, decompose, verify, oracle or demo.
    std::string subcommand;
    std::string input;
    std::string output;
    std::string dec;
    /// Default field for operator files without a "field" key, and the oracle field.
    Field field = Field::rationals();
    /// Preset name or JSON list of coefficient triples.
    std::string polys = "squarezero";
    /// Unset: 64, or the window stored in the decomposition file for verify.
    std::optional<Index> window;
    Index orbit_horizon = 0;
    Index family_horizon = 0;
    std::optional<StratMode> mode;
    std::uint64_t seed = 0;
    /// Oracle options.
    std::string prop;
    Index dim = 2;
    Index trials = 1000;
    bool pretty = false;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error("usage: " + what) {}
};

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;
constexpr int exit_internal = 3;

/// 1 for domain failures, 2 for parse and usage errors, 3 for invariant violations
/// and anything unexpected.
int exit_code_for(const std::exception& e);

/// Runs one subcommand. JSON (or a table with `pretty`) goes to `out`, diagnostics to `err`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

} // namespace quadsum
