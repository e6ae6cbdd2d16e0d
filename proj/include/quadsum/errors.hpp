#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quadsum {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisionByZero : public Error {
public:
    DivisionByZero() : Error("division by zero") {}
};

class FieldMismatch : public Error {
public:
    explicit FieldMismatch(const std::string& what) : Error("field mismatch: " + what) {}
};

class NotSplit : public Error {
public:
    explicit NotSplit(const std::string& poly) : Error("polynomial does not split: " + poly) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};

class SpecParseError : public Error {
public:
    explicit SpecParseError(const std::string& what) : Error("operator spec: " + what) {}
};

class HorizonExceeded : public Error {
public:
    explicit HorizonExceeded(const std::string& what) : Error("horizon exceeded: " + what) {}
};

class UndecidableMembership : public Error {
public:
    explicit UndecidableMembership(const std::string& what)
        : Error("undecidable membership: " + what) {}
};

class NotInfiniteDimensional : public Error {
public:
    explicit NotInfiniteDimensional(const std::string& what)
        : Error("not infinite-dimensional: " + what) {}
};

class HypothesisViolated : public Error {
public:
    explicit HypothesisViolated(const std::string& what) : Error("hypothesis violated: " + what) {}
};

class WitnessInvalid : public Error {
public:
    WitnessInvalid(std::size_t group, std::size_t position, const std::string& what)
        : Error("witness invalid (group " + std::to_string(group) + ", position " +
                std::to_string(position) + "): " + what),
          group_(group), position_(position) {}

    std::size_t group() const noexcept { return group_; }
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t group_;
    std::size_t position_;
};

/// The triangular hypothesis u(e_n) = e_{n+1} mod span(e_0..e_n) fails at `position`.
class HypothesisFailed : public Error {
public:
    explicit HypothesisFailed(std::size_t position)
        : Error("cyclic hypothesis fails at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class ImageSpanInvalid : public Error {
public:
    explicit ImageSpanInvalid(const std::string& what) : Error("image span invalid: " + what) {}
};

class BlockOverlap : public Error {
public:
    explicit BlockOverlap(const std::string& what) : Error("block overlap: " + what) {}
};

class PolyMismatch : public BlockOverlap {
public:
    explicit PolyMismatch(const std::string& what) : BlockOverlap("polynomial lists differ: " + what) {}
};

class CorrectionOutOfSpan : public Error {
public:
    explicit CorrectionOutOfSpan(const std::string& what)
        : Error("connector correction out of span: " + what) {}
};

/// A claimed structural property (band bound, certificate, purity) was contradicted.
class InvariantViolation : public Error {
public:
    explicit InvariantViolation(const std::string& what) : Error("invariant violation: " + what) {}
};

} // namespace quadsum
