#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadsum/fin_vector.hpp"

namespace quadsum {

/// Outcome of window checks on a decomposition.
struct ValidationReport {
    enum class Check { Sum, Annihilation, Witness };

    struct Result {
        Check check = Check::Sum;
        std::optional<std::size_t> summand;
        Index columns = 0;
        bool passed = true;
    };

    struct Failure {
        Check check = Check::Sum;
        std::optional<std::size_t> summand;
        Index column = 0;
        /// Exact nonzero residual (empty for witness failures).
        FinVector residual;
        std::string message;
    };

    Index window = 0;
    std::vector<Result> results;
    std::vector<Failure> failures;

    bool pass() const { return failures.empty(); }
};

std::string to_string(ValidationReport::Check check);

} // namespace quadsum
