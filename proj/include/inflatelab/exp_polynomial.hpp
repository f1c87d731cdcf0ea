#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "inflatelab/rational.hpp"

namespace inflatelab {

using Complex = std::complex<double>;

/// Coefficients below this magnitude are dropped whenever terms are consolidated.
inline constexpr double kDefaultConsolidationThreshold = 1e-30;

/// e^{-rate*t} is flushed to zero once rate*t exceeds this.
inline constexpr double kUnderflowExponent = 750.0;

/// One term coeff * t^power * exp(-rate * t).
struct ExpTerm {
    Complex coeff;
    int power = 0;
    Rational rate;

    bool operator==(const ExpTerm&) const = default;
};

/**
 * Finite sum of terms c * t^m * exp(-lambda * t) with exact rational rates.
 *
 * Terms are kept sorted by (rate, power) with no repeated key. The class is
 * closed under addition, multiplication, differentiation in t and the
 * Duhamel integral, which is why every Picard iterate of trigonometric data
 * is an exact finite object of this type.
 */
class ExpPolynomial {
public:
    ExpPolynomial() = default;
    explicit ExpPolynomial(Complex constant) {
        if (constant != Complex{}) terms_.push_back({constant, 0, Rational(0)});
    }
    ExpPolynomial(Complex coeff, int power, Rational rate) {
        if (power < 0) throw UsageError("negative power in exponential term");
        terms_.push_back({coeff, power, std::move(rate)});
        consolidate();
    }

    /// Builds from arbitrary (possibly repeated) terms.
    static ExpPolynomial from_terms(std::vector<ExpTerm> terms, double threshold = kDefaultConsolidationThreshold) {
        ExpPolynomial p;
        p.terms_ = std::move(terms);
        p.consolidate(threshold);
        return p;
    }

    const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }
    std::size_t size() const noexcept { return terms_.size(); }

    bool is_constant() const noexcept {
        return terms_.empty() || (terms_.size() == 1 && terms_[0].power == 0 && terms_[0].rate.is_zero());
    }
    Complex constant_value() const {
        if (!is_constant()) throw UsageError("exponential polynomial is not constant");
        return terms_.empty() ? Complex{} : terms_[0].coeff;
    }

    Complex evaluate(double t) const {
        if (t < 0) throw UsageError("exponential polynomial evaluated at negative time");
        // Per power, either sum c e^{-rate t} directly or as sum c + sum c (e^{-rate t} - 1),
        // whichever has the smaller rounding estimate. The second form keeps Duhamel
        // profiles whose coefficients cancel at t = 0 accurate for small t.
        struct Group {
            Complex direct, base, delta;
            double direct_scale = 0, delta_scale = 0, base_scale = 0;
        };
        std::map<int, Group> by_power;
        for (const auto& term : terms_) {
            auto& g = by_power[term.power];
            const double exponent = term.rate.to_double() * t;
            const double e = exponent > kUnderflowExponent ? 0.0 : std::exp(-exponent);
            const double em1 = exponent > kUnderflowExponent ? -1.0 : std::expm1(-exponent);
            g.direct += term.coeff * e;
            g.direct_scale += std::abs(term.coeff) * e;
            g.base += term.coeff;
            g.base_scale += std::abs(term.coeff);
            g.delta += term.coeff * em1;
            g.delta_scale += std::abs(term.coeff * em1);
        }
        Complex sum{};
        for (const auto& [power, g] : by_power) {
            const double tp = power == 0 ? 1.0 : std::pow(t, power);
            if (tp == 0.0) continue;
            const double m1_scale = g.delta_scale + (g.base == Complex{} ? 0.0 : g.base_scale);
            sum += tp * (m1_scale < g.direct_scale ? g.base + g.delta : g.direct);
        }
        return sum;
    }

    /// t^m e^{-rate t}, flushed to zero past the underflow exponent.
    static double profile(int power, const Rational& rate, double t) {
        double tp = power == 0 ? 1.0 : std::pow(t, power);
        if (tp == 0.0) return 0.0;
        if (rate.is_zero()) return tp;
        double exponent = rate.to_double() * t;
        if (exponent > kUnderflowExponent) return 0.0;
        return tp * std::exp(-exponent);
    }

    double max_abs_coeff() const {
        double m = 0;
        for (const auto& term : terms_) m = std::max(m, std::abs(term.coeff));
        return m;
    }
    double sum_abs_coeff() const {
        double m = 0;
        for (const auto& term : terms_) m += std::abs(term.coeff);
        return m;
    }

    ExpPolynomial conj() const {
        ExpPolynomial r = *this;
        for (auto& term : r.terms_) term.coeff = std::conj(term.coeff);
        return r;
    }

    ExpPolynomial scaled(Complex factor) const {
        if (factor == Complex{}) return {};
        std::vector<ExpTerm> out = terms_;
        for (auto& term : out) term.coeff *= factor;
        return from_terms(std::move(out));
    }

    /// Multiplies by exp(-rate * t).
    ExpPolynomial shifted(const Rational& rate) const {
        if (rate.is_zero()) return *this;
        ExpPolynomial r = *this;
        for (auto& term : r.terms_) term.rate += rate;
        return r;
    }

    ExpPolynomial derivative() const {
        std::vector<ExpTerm> out;
        out.reserve(2 * terms_.size());
        for (const auto& term : terms_) {
            if (term.power > 0) out.push_back({term.coeff * static_cast<double>(term.power), term.power - 1, term.rate});
            if (!term.rate.is_zero()) out.push_back({-term.coeff * term.rate.to_double(), term.power, term.rate});
        }
        return from_terms(std::move(out));
    }

    /**
     * sign * \int_0^t exp(-(t - s) mu) f(s) ds, exactly.
     *
     * For a term c s^m e^{-lambda s} with a = lambda - mu != 0:
     *   c m!/a^{m+1} e^{-mu t} - sum_k c m!/(k! a^{m+1-k}) t^k e^{-lambda t};
     * at resonance (a == 0) the result is c t^{m+1}/(m+1) e^{-mu t}.
     */
    ExpPolynomial duhamel(const Rational& mu, int sign = 1) const {
        std::vector<ExpTerm> out;
        out.reserve(terms_.size() * 3);
        const double sgn = sign >= 0 ? 1.0 : -1.0;
        for (const auto& term : terms_) {
            const Complex c = sgn * term.coeff;
            const Rational a = term.rate - mu;
            const int m = term.power;
            if (a.is_zero()) {
                out.push_back({c / static_cast<double>(m + 1), m + 1, mu});
                continue;
            }
            const double ad = a.to_double();
            // m!/a^{m+1-k}/k!, built from k = m downward.
            double factor = 1.0 / ad;  // k = m
            std::vector<double> w(static_cast<std::size_t>(m) + 1);
            w[static_cast<std::size_t>(m)] = factor;
            for (int k = m - 1; k >= 0; --k) {
                factor *= static_cast<double>(k + 1) / ad;
                w[static_cast<std::size_t>(k)] = factor;
            }
            out.push_back({c * w[0], 0, mu});
            for (int k = 0; k <= m; ++k) out.push_back({-c * w[static_cast<std::size_t>(k)], k, term.rate});
        }
        return from_terms(std::move(out));
    }

    friend ExpPolynomial operator+(const ExpPolynomial& a, const ExpPolynomial& b) {
        std::vector<ExpTerm> out;
        out.reserve(a.size() + b.size());
        out.insert(out.end(), a.terms_.begin(), a.terms_.end());
        out.insert(out.end(), b.terms_.begin(), b.terms_.end());
        return from_terms(std::move(out));
    }
    friend ExpPolynomial operator-(const ExpPolynomial& a, const ExpPolynomial& b) { return a + b.scaled(-1.0); }

    friend ExpPolynomial operator*(const ExpPolynomial& a, const ExpPolynomial& b) {
        std::vector<ExpTerm> out;
        multiply_into(a, b, out);
        return from_terms(std::move(out));
    }

    /// Appends the unconsolidated termwise product to `out`.
    static void multiply_into(const ExpPolynomial& a, const ExpPolynomial& b, std::vector<ExpTerm>& out,
                              Complex factor = 1.0) {
        for (const auto& x : a.terms_)
            for (const auto& y : b.terms_) out.push_back({factor * x.coeff * y.coeff, x.power + y.power, x.rate + y.rate});
    }

    friend bool operator==(const ExpPolynomial&, const ExpPolynomial&) = default;

private:
    void consolidate(double threshold = kDefaultConsolidationThreshold) {
        auto less = [](const ExpTerm& x, const ExpTerm& y) {
            auto c = x.rate <=> y.rate;
            if (c != 0) return c < 0;
            return x.power < y.power;
        };
        std::sort(terms_.begin(), terms_.end(), less);
        std::vector<ExpTerm> merged;
        merged.reserve(terms_.size());
        for (auto& term : terms_) {
            if (!merged.empty() && merged.back().power == term.power && merged.back().rate == term.rate)
                merged.back().coeff += term.coeff;
            else
                merged.push_back(std::move(term));
        }
        std::erase_if(merged, [threshold](const ExpTerm& x) { return std::abs(x.coeff) < threshold; });
        terms_ = std::move(merged);
    }

    std::vector<ExpTerm> terms_;
};

}  // namespace inflatelab
