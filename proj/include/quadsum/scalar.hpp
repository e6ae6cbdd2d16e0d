#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <gmpxx.h>

namespace quadsum {

/// Ground field: the rationals or a prime field F_p with p below 2^62.
class Field {
public:
    enum class Kind : std::uint8_t { Rationals, PrimeField };

    static Field rationals() noexcept { return Field(); }
    static Field prime(std::uint64_t p);

    /// Accepts "Q" or "Fp:<p>".
    static Field parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    bool is_rationals() const noexcept { return kind_ == Kind::Rationals; }
    std::uint64_t characteristic() const noexcept { return p_; }

    std::string to_string() const;

    friend bool operator==(const Field&, const Field&) = default;

private:
    Field() = default;
    Kind kind_ = Kind::Rationals;
    std::uint64_t p_ = 0;
};

bool is_prime(std::uint64_t n);

class Scalar {
public:
    explicit Scalar(Field f = Field::rationals()) : field_(f) {}
    Scalar(Field f, long value);
    Scalar(Field f, const mpq_class& value);

    static Scalar zero(Field f) { return Scalar(f); }
    static Scalar one(Field f) { return Scalar(f, 1L); }

    /// Text forms: "num/den" or "int" over Q; "k mod p" (or a bare integer or fraction) over F_p.
    static Scalar parse(Field f, std::string_view text);

    Field field() const noexcept { return field_; }
    bool is_zero() const noexcept;
    bool is_one() const noexcept;

    /// Canonical value over Q. Only meaningful for rational scalars.
    const mpq_class& rational() const noexcept { return q_; }
    /// Canonical residue in [0, p). Only meaningful over F_p.
    std::uint64_t residue() const noexcept { return r_; }

    Scalar inv() const;

    Scalar& operator+=(const Scalar& rhs);
    Scalar& operator-=(const Scalar& rhs);
    Scalar& operator*=(const Scalar& rhs);
    Scalar& operator/=(const Scalar& rhs) { return *this *= rhs.inv(); }

    friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
    friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
    friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
    friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }
    Scalar operator-() const;

    /// Structural equality. Throws FieldMismatch across fields.
    friend bool operator==(const Scalar& a, const Scalar& b);

    /// Root-ordering comparison: numeric over Q, by residue over F_p.
    friend bool canonical_less(const Scalar& a, const Scalar& b);

    std::string to_string() const;

private:
    void check_field(const Scalar& other) const;

    Field field_;
    mpq_class q_;
    std::uint64_t r_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Scalar& s);

/// Monic t^2 + beta t + gamma, with its ordered roots when split.
class QuadraticPoly {
public:
    QuadraticPoly(Scalar beta, Scalar gamma);

    /// t^2 - a t.
    static QuadraticPoly canonical(const Scalar& a);
    /// (t - x)(t - y).
    static QuadraticPoly from_roots(const Scalar& x, const Scalar& y);

    Field field() const noexcept { return beta_.field(); }
    const Scalar& beta() const noexcept { return beta_; }
    const Scalar& gamma() const noexcept { return gamma_; }
    const std::optional<std::pair<Scalar, Scalar>>& roots() const noexcept { return roots_; }

    Scalar evaluate(const Scalar& t) const { return t * t + beta_ * t + gamma_; }

    /// "[1, beta, gamma]" with scalars in text form.
    std::string to_string() const;

    friend bool operator==(const QuadraticPoly& a, const QuadraticPoly& b) {
        return a.beta_ == b.beta_ && a.gamma_ == b.gamma_;
    }

private:
    friend QuadraticPoly split_roots(const QuadraticPoly& p);
    Scalar beta_;
    Scalar gamma_;
    std::optional<std::pair<Scalar, Scalar>> roots_;
};

/// Returns p with its roots (x, y), x <= y in the canonical order. Throws NotSplit.
QuadraticPoly split_roots(const QuadraticPoly& p);

/// Square root in the field if one exists.
std::optional<Scalar> field_sqrt(const Scalar& s);

} // namespace quadsum
