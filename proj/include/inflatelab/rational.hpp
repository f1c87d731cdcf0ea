#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>

#include "inflatelab/error.hpp"

namespace inflatelab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

/**
 * Exact rational number.
 *
 * Values whose reduced numerator and denominator fit in 64 bits are stored
 * inline and combined through 128-bit intermediates; anything larger is
 * promoted to an arbitrary-width representation, so arithmetic never wraps.
 * Rates of exponential terms and squared frequency magnitudes live here,
 * which is what makes resonance detection exact.
 */
class Rational {
public:
    Rational() noexcept = default;
    Rational(std::int64_t n) noexcept : num_(n) {}  // NOLINT: implicit by design of integer literals
    Rational(std::int64_t n, std::int64_t d) { assign(static_cast<__int128>(n), static_cast<__int128>(d)); }
    explicit Rational(const BigInt& n) { assign_big(BigRational(n)); }
    explicit Rational(const BigRational& q) { assign_big(q); }

    bool is_small() const noexcept { return big_ == nullptr; }
    bool is_zero() const noexcept { return is_small() ? num_ == 0 : big_->is_zero(); }
    bool is_integer() const noexcept {
        return is_small() ? den_ == 1 : boost::multiprecision::denominator(*big_) == 1;
    }
    int sign() const noexcept {
        if (is_small()) return (num_ > 0) - (num_ < 0);
        return big_->sign();
    }

    BigRational to_big() const {
        if (big_) return *big_;
        return BigRational(BigInt(num_), BigInt(den_));
    }
    BigInt numerator() const { return is_small() ? BigInt(num_) : boost::multiprecision::numerator(*big_); }
    BigInt denominator() const { return is_small() ? BigInt(den_) : boost::multiprecision::denominator(*big_); }

    double to_double() const {
        if (is_small()) return den_ == 1 ? static_cast<double>(num_) : static_cast<double>(num_) / static_cast<double>(den_);
        return big_->convert_to<double>();
    }

    std::string str() const {
        if (is_small()) return std::to_string(num_) + "/" + std::to_string(den_);
        return boost::multiprecision::numerator(*big_).str() + "/" + boost::multiprecision::denominator(*big_).str();
    }

    /// Accepts "p", "p/q" with optional sign on p.
    static Rational parse(std::string_view text) {
        auto slash = text.find('/');
        auto parse_int = [&](std::string_view s, std::size_t offset) {
            if (s.empty()) throw ParseError("empty integer in rational '" + std::string(text) + "'", offset);
            std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
            if (i == s.size()) throw ParseError("bad integer in rational '" + std::string(text) + "'", offset);
            for (std::size_t k = i; k < s.size(); ++k)
                if (s[k] < '0' || s[k] > '9') throw ParseError("bad digit in rational '" + std::string(text) + "'", offset + k);
            return BigInt(std::string(s[0] == '+' ? s.substr(1) : s));
        };
        BigInt n = parse_int(text.substr(0, slash), 0);
        BigInt d = slash == std::string_view::npos ? BigInt(1) : parse_int(text.substr(slash + 1), slash + 1);
        if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'", slash + 1);
        return Rational(BigRational(n, d));
    }

    Rational operator-() const {
        if (is_small()) return Rational(-static_cast<__int128>(num_), static_cast<__int128>(den_), RawTag{});
        return Rational(BigRational(-*big_));
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            if (a.den_ == 1 && b.den_ == 1) {
                std::int64_t r;
                if (!__builtin_add_overflow(a.num_, b.num_, &r)) return Rational(r);
            }
            __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
            __int128 d = static_cast<__int128>(a.den_) * b.den_;
            return Rational(n, d, RawTag{});
        }
        return Rational(BigRational(a.to_big() + b.to_big()));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            if (a.den_ == 1 && b.den_ == 1) {
                std::int64_t r;
                if (!__builtin_mul_overflow(a.num_, b.num_, &r)) return Rational(r);
            }
            return Rational(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_, RawTag{});
        }
        return Rational(BigRational(a.to_big() * b.to_big()));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw UsageError("rational division by zero");
        if (a.is_small() && b.is_small())
            return Rational(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_, RawTag{});
        return Rational(BigRational(a.to_big() / b.to_big()));
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) return a.num_ == b.num_ && a.den_ == b.den_;
        if (a.is_small() != b.is_small()) return false;  // both are kept in canonical form
        return *a.big_ == *b.big_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        if (a.is_small() && b.is_small()) {
            if (a.den_ == b.den_) return a.num_ <=> b.num_;
            __int128 l = static_cast<__int128>(a.num_) * b.den_;
            __int128 r = static_cast<__int128>(b.num_) * a.den_;
            return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
        }
        auto ab = a.to_big();
        auto bb = b.to_big();
        return ab < bb ? std::strong_ordering::less : (ab > bb ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& q) { return os << q.str(); }

private:
    struct RawTag {};
    Rational(__int128 n, __int128 d, RawTag) { assign(n, d); }

    static unsigned __int128 gcd128(unsigned __int128 a, unsigned __int128 b) {
        while (b != 0) {
            auto r = a % b;
            a = b;
            b = r;
        }
        return a;
    }

    static BigInt to_bigint(__int128 v) {
        bool neg = v < 0;
        unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
        BigInt r = BigInt(static_cast<std::uint64_t>(u >> 64));
        r <<= 64;
        r += BigInt(static_cast<std::uint64_t>(u));
        return neg ? BigInt(-r) : r;
    }

    void assign(__int128 n, __int128 d) {
        if (d == 0) throw UsageError("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        unsigned __int128 un = n < 0 ? -static_cast<unsigned __int128>(n) : static_cast<unsigned __int128>(n);
        auto g = gcd128(un, static_cast<unsigned __int128>(d));
        if (g > 1) {
            n /= static_cast<__int128>(g);
            d /= static_cast<__int128>(g);
        }
        constexpr __int128 lo = INT64_MIN;
        constexpr __int128 hi = INT64_MAX;
        if (n >= lo && n <= hi && d <= hi) {
            num_ = static_cast<std::int64_t>(n);
            den_ = static_cast<std::int64_t>(d);
            big_.reset();
        } else {
            assign_big(BigRational(to_bigint(n), to_bigint(d)));
        }
    }

    void assign_big(const BigRational& q) {
        const auto& n = boost::multiprecision::numerator(q);
        const auto& d = boost::multiprecision::denominator(q);
        static const BigInt lo = BigInt(INT64_MIN);
        static const BigInt hi = BigInt(INT64_MAX);
        if (n >= lo && n <= hi && d <= hi) {
            num_ = n.convert_to<std::int64_t>();
            den_ = d.convert_to<std::int64_t>();
            big_.reset();
        } else {
            num_ = 0;
            den_ = 1;
            big_ = std::make_shared<const BigRational>(q);
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
    std::shared_ptr<const BigRational> big_;
};

}  // namespace inflatelab
