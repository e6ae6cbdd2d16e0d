#include "quadsum/scalar.hpp"

#include <charconv>
#include <ostream>

#include "quadsum/errors.hpp"

namespace quadsum {

namespace {

using u128 = unsigned __int128;

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1U) result = mul_mod(result, base, m);
        base = mul_mod(base, base, m);
        exp >>= 1U;
    }
    return result;
}

std::uint64_t reduce_mpz(const mpz_class& z, std::uint64_t p) {
    mpz_class r;
    mpz_fdiv_r_ui(r.get_mpz_t(), z.get_mpz_t(), p);
    return r.get_ui();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool is_integer_text(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

mpz_class parse_integer(std::string_view s) {
    s = trim(s);
    if (!is_integer_text(s)) throw ParseError("not an integer: '" + std::string(s) + "'");
    if (s.front() == '+') s.remove_prefix(1);
    return mpz_class(std::string(s), 10);
}

mpq_class parse_rational(std::string_view s) {
    s = trim(s);
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return mpq_class(parse_integer(s));
    mpz_class num = parse_integer(s.substr(0, slash));
    mpz_class den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(s) + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return q;
}

} // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % small == 0) return n == small;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1U) == 0) {
        d >>= 1U;
        ++s;
    }
    // Deterministic witness set for 64-bit integers.
    for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = pow_mod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mul_mod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

Field Field::prime(std::uint64_t p) {
    if (p >= (std::uint64_t{1} << 62U)) throw ParseError("prime modulus too large: " + std::to_string(p));
    if (!is_prime(p)) throw ParseError("modulus is not prime: " + std::to_string(p));
    Field f;
    f.kind_ = Kind::PrimeField;
    f.p_ = p;
    return f;
}

Field Field::parse(std::string_view text) {
    text = trim(text);
    if (text == "Q") return rationals();
    if (text.starts_with("Fp:")) {
        auto digits = text.substr(3);
        std::uint64_t p = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
            throw ParseError("bad prime in field '" + std::string(text) + "'");
        }
        return prime(p);
    }
    throw ParseError("unknown field '" + std::string(text) + "' (expected Q or Fp:<p>)");
}

std::string Field::to_string() const {
    return is_rationals() ? std::string("Q") : "Fp:" + std::to_string(p_);
}

Scalar::Scalar(Field f, long value) : field_(f) {
    if (f.is_rationals()) {
        q_ = value;
    } else {
        auto p = static_cast<std::int64_t>(f.characteristic());
        std::int64_t r = value % p;
        if (r < 0) r += p;
        r_ = static_cast<std::uint64_t>(r);
    }
}

Scalar::Scalar(Field f, const mpq_class& value) : field_(f) {
    if (f.is_rationals()) {
        q_ = value;
        q_.canonicalize();
        return;
    }
    std::uint64_t p = f.characteristic();
    std::uint64_t den = reduce_mpz(value.get_den(), p);
    if (den == 0) throw DivisionByZero();
    r_ = mul_mod(reduce_mpz(value.get_num(), p), pow_mod(den, p - 2, p), p);
}

Scalar Scalar::parse(Field f, std::string_view text) {
    text = trim(text);
    auto mod = text.find("mod");
    if (mod != std::string_view::npos) {
        if (f.is_rationals()) throw ParseError("'mod' form used for a rational scalar: '" + std::string(text) + "'");
        mpz_class p = parse_integer(text.substr(mod + 3));
        if (p != mpz_class(std::to_string(f.characteristic()))) {
            throw FieldMismatch("scalar '" + std::string(text) + "' is not over " + f.to_string());
        }
        return Scalar(f, mpq_class(parse_integer(text.substr(0, mod))));
    }
    return Scalar(f, parse_rational(text));
}

bool Scalar::is_zero() const noexcept {
    return field_.is_rationals() ? sgn(q_) == 0 : r_ == 0;
}

bool Scalar::is_one() const noexcept {
    return field_.is_rationals() ? q_ == 1 : r_ == 1;
}

void Scalar::check_field(const Scalar& other) const {
    if (!(field_ == other.field_)) {
        throw FieldMismatch(field_.to_string() + " vs " + other.field_.to_string());
    }
}

Scalar Scalar::inv() const {
    if (is_zero()) throw DivisionByZero();
    Scalar out(field_);
    if (field_.is_rationals()) {
        out.q_ = 1 / q_;
    } else {
        std::uint64_t p = field_.characteristic();
        out.r_ = pow_mod(r_, p - 2, p);
    }
    return out;
}

Scalar& Scalar::operator+=(const Scalar& rhs) {
    check_field(rhs);
    if (field_.is_rationals()) {
        q_ += rhs.q_;
    } else {
        std::uint64_t p = field_.characteristic();
        r_ += rhs.r_;
        if (r_ >= p) r_ -= p;
    }
    return *this;
}

Scalar& Scalar::operator-=(const Scalar& rhs) {
    check_field(rhs);
    if (field_.is_rationals()) {
        q_ -= rhs.q_;
    } else {
        std::uint64_t p = field_.characteristic();
        r_ = r_ >= rhs.r_ ? r_ - rhs.r_ : r_ + p - rhs.r_;
    }
    return *this;
}

Scalar& Scalar::operator*=(const Scalar& rhs) {
    check_field(rhs);
    if (field_.is_rationals()) {
        q_ *= rhs.q_;
    } else {
        r_ = mul_mod(r_, rhs.r_, field_.characteristic());
    }
    return *this;
}

Scalar Scalar::operator-() const {
    Scalar out(field_);
    if (field_.is_rationals()) {
        out.q_ = -q_;
    } else {
        out.r_ = r_ == 0 ? 0 : field_.characteristic() - r_;
    }
    return out;
}

bool operator==(const Scalar& a, const Scalar& b) {
    a.check_field(b);
    return a.field_.is_rationals() ? a.q_ == b.q_ : a.r_ == b.r_;
}

bool canonical_less(const Scalar& a, const Scalar& b) {
    a.check_field(b);
    return a.field_.is_rationals() ? a.q_ < b.q_ : a.r_ < b.r_;
}

std::string Scalar::to_string() const {
    if (field_.is_rationals()) return q_.get_str();
    return std::to_string(r_) + " mod " + std::to_string(field_.characteristic());
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.to_string(); }

QuadraticPoly::QuadraticPoly(Scalar beta, Scalar gamma) : beta_(std::move(beta)), gamma_(std::move(gamma)) {
    if (!(beta_.field() == gamma_.field())) throw FieldMismatch("quadratic coefficients");
}

QuadraticPoly QuadraticPoly::canonical(const Scalar& a) {
    return from_roots(Scalar::zero(a.field()), a);
}

QuadraticPoly QuadraticPoly::from_roots(const Scalar& x, const Scalar& y) {
    QuadraticPoly p(-(x + y), x * y);
    if (canonical_less(y, x)) {
        p.roots_.emplace(y, x);
    } else {
        p.roots_.emplace(x, y);
    }
    return p;
}

std::string QuadraticPoly::to_string() const {
    return "[1, " + beta_.to_string() + ", " + gamma_.to_string() + "]";
}

std::optional<Scalar> field_sqrt(const Scalar& s) {
    Field f = s.field();
    if (s.is_zero()) return s;
    if (f.is_rationals()) {
        const mpq_class& q = s.rational();
        if (sgn(q) < 0) return std::nullopt;
        if (mpz_perfect_square_p(q.get_num_mpz_t()) == 0 || mpz_perfect_square_p(q.get_den_mpz_t()) == 0) {
            return std::nullopt;
        }
        mpz_class num;
        mpz_class den;
        mpz_sqrt(num.get_mpz_t(), q.get_num_mpz_t());
        mpz_sqrt(den.get_mpz_t(), q.get_den_mpz_t());
        return Scalar(f, mpq_class(num, den));
    }
    std::uint64_t p = f.characteristic();
    std::uint64_t a = s.residue();
    if (p == 2) return s;
    if (pow_mod(a, (p - 1) / 2, p) != 1) return std::nullopt;
    // Tonelli-Shanks.
    std::uint64_t q = p - 1;
    std::uint64_t m = 0;
    while ((q & 1U) == 0) {
        q >>= 1U;
        ++m;
    }
    std::uint64_t z = 2;
    while (pow_mod(z, (p - 1) / 2, p) != p - 1) ++z;
    std::uint64_t c = pow_mod(z, q, p);
    std::uint64_t t = pow_mod(a, q, p);
    std::uint64_t r = pow_mod(a, (q + 1) / 2, p);
    while (t != 1) {
        std::uint64_t i = 0;
        std::uint64_t t2 = t;
        while (t2 != 1) {
            t2 = mul_mod(t2, t2, p);
            ++i;
        }
        std::uint64_t b = pow_mod(c, std::uint64_t{1} << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    return Scalar(f, mpq_class(static_cast<unsigned long>(r)));
}

QuadraticPoly split_roots(const QuadraticPoly& p) {
    Field f = p.field();
    QuadraticPoly out = p;
    if (!f.is_rationals() && f.characteristic() == 2) {
        for (long v : {0L, 1L}) {
            Scalar x(f, v);
            if (!p.evaluate(x).is_zero()) continue;
            Scalar y = -p.beta() - x;
            out.roots_ = canonical_less(y, x) ? std::pair{y, x} : std::pair{x, y};
            return out;
        }
        throw NotSplit(p.to_string() + " over " + f.to_string());
    }
    Scalar two(f, 2L);
    Scalar disc = p.beta() * p.beta() - Scalar(f, 4L) * p.gamma();
    auto root = field_sqrt(disc);
    if (!root) throw NotSplit(p.to_string() + " over " + f.to_string());
    Scalar x = (-p.beta() - *root) / two;
    Scalar y = (-p.beta() + *root) / two;
    out.roots_ = canonical_less(y, x) ? std::pair{y, x} : std::pair{x, y};
    return out;
}

} // namespace quadsum
