#pragma once

// Hand-rolled generators for property tests. Seeds are fixed so failures reproduce.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "inflatelab/trig_polynomial.hpp"

namespace testsupport {

using inflatelab::Complex;
using inflatelab::ExpPolynomial;
using inflatelab::Frequency;
using inflatelab::Rational;
using inflatelab::TrigPolynomial;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
    }
    bool coin() { return integer(0, 1) == 1; }

    Rational rational(std::int64_t max_num, std::int64_t max_den) {
        return Rational(integer(-max_num, max_num), integer(1, max_den));
    }

    Frequency frequency(int dim, std::int64_t max_component) {
        Frequency n(static_cast<std::size_t>(dim), 0);
        for (auto& c : n) c = integer(-max_component, max_component);
        return n;
    }

    /// Static field with up to `max_pairs` cosine/sine pairs plus an optional constant.
    TrigPolynomial static_field(int dim, int max_pairs, std::int64_t max_component, Rational scale = Rational(1)) {
        TrigPolynomial f(dim, scale);
        if (coin()) f = f + TrigPolynomial::constant(dim, uniform(-1, 1), scale);
        const int pairs = static_cast<int>(integer(1, max_pairs));
        for (int i = 0; i < pairs; ++i) {
            Frequency n = frequency(dim, max_component);
            f = f + (coin() ? TrigPolynomial::cosine(n, uniform(-1, 1), scale) : TrigPolynomial::sine(n, uniform(-1, 1), scale));
        }
        return f;
    }

    /// Exponential polynomial with small powers and rational rates in [0, max_rate].
    ExpPolynomial exp_poly(int max_terms, int max_power, std::int64_t max_rate) {
        std::vector<inflatelab::ExpTerm> terms;
        const int k = static_cast<int>(integer(1, max_terms));
        for (int i = 0; i < k; ++i)
            terms.push_back({Complex(uniform(-1, 1), uniform(-1, 1)), static_cast<int>(integer(0, max_power)),
                             Rational(integer(0, max_rate * 4), 4)});
        return ExpPolynomial::from_terms(std::move(terms));
    }

    std::vector<double> point(int dim, double period) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (auto& v : x) v = uniform(0, period);
        return x;
    }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testsupport
