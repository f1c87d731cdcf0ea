#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "inflatelab/trig_polynomial.hpp"

namespace inflatelab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Regularity s and integrability exponents p, q (each in [1, inf]).
struct BesovParams {
    double s = 0.0;
    double p = kInfinity;
    double q = kInfinity;

    void validate() const {
        if (!(p >= 1.0) || !(q >= 1.0)) throw ConfigError("Besov exponents p, q must lie in [1, inf]");
    }
};

/// Computed norm with a bound on its numerical error.
struct NormEstimate {
    double value = 0.0;
    double error_bound = 0.0;
};

/// Default ceiling on the number of sample points in grid quadrature.
inline constexpr std::size_t kDefaultMaxGridPoints = std::size_t{1} << 22;

/**
 * Littlewood-Paley block of a frequency with sharp dyadic cutoffs:
 * block 0 holds |xi| <= 1, block j >= 1 holds 2^{j-1} < |xi| <= 2^j.
 * Decided exactly on |xi|^2.
 */
inline int block_of(const Rational& xi2) {
    if (xi2 <= Rational(1)) return 0;
    auto four_pow = [](int j) { return Rational(BigInt(1) << (2 * j)); };
    int j = std::max(1, static_cast<int>(std::ceil(0.5 * std::log2(xi2.to_double()))));
    while (xi2 > four_pow(j)) ++j;
    while (j > 1 && xi2 <= four_pow(j - 1)) --j;
    return j;
}

inline int block_of(const TrigPolynomial& f, const Frequency& n) { return block_of(f.squared_magnitude(n)); }

inline TrigPolynomial lp_block(int j, const TrigPolynomial& f) {
    TrigPolynomial::ModeMap kept;
    for (const auto& [n, e] : f.modes())
        if (block_of(f, n) == j) kept.emplace(n, e);
    // Blocks are symmetric under n -> -n, so the pairs stay intact.
    return TrigPolynomial::from_modes(f.dimension(), f.scale(), kept);
}

/// Nonempty blocks, keyed by block index.
inline std::map<int, TrigPolynomial> lp_decomposition(const TrigPolynomial& f) {
    std::map<int, TrigPolynomial::ModeMap> parts;
    for (const auto& [n, e] : f.modes()) parts[block_of(f, n)].emplace(n, e);
    std::map<int, TrigPolynomial> out;
    for (auto& [j, m] : parts) out.emplace(j, TrigPolynomial::from_modes(f.dimension(), f.scale(), m));
    return out;
}

namespace detail {

// Grid covering one period in each axis with at least 8 points per highest component.
struct SampleGrid {
    std::vector<std::size_t> points;  // per axis
    std::vector<double> spacing;      // per axis
    std::size_t total = 1;
    bool refined_enough = true;       // false if the point cap forced a coarser grid
};

inline SampleGrid make_grid(const TrigPolynomial& f, std::size_t max_points, std::size_t oversample = 8) {
    const auto d = static_cast<std::size_t>(f.dimension());
    std::vector<std::int64_t> kmax(d, 0);
    for (const auto& [n, e] : f.modes())
        for (std::size_t k = 0; k < d; ++k) kmax[k] = std::max<std::int64_t>(kmax[k], n[k] < 0 ? -n[k] : n[k]);
    SampleGrid g;
    const double period = 2.0 * std::numbers::pi / f.scale().to_double();
    double wanted = 1;
    for (std::size_t k = 0; k < d; ++k) wanted *= kmax[k] == 0 ? 1.0 : static_cast<double>(oversample) * static_cast<double>(kmax[k]);
    double shrink = 1.0;
    if (wanted > static_cast<double>(max_points)) {
        std::size_t active = 0;
        for (auto v : kmax) active += v != 0;
        shrink = std::pow(static_cast<double>(max_points) / wanted, 1.0 / static_cast<double>(active));
        g.refined_enough = false;
    }
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t p = 1;
        if (kmax[k] != 0)
            p = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(static_cast<double>(oversample) * static_cast<double>(kmax[k]) * shrink)));
        g.points.push_back(p);
        g.spacing.push_back(period / static_cast<double>(p));
        g.total *= p;
    }
    return g;
}

// Calls fn(value) for every grid point.
template <class Fn>
void for_each_sample(const TrigPolynomial& f, const SampleGrid& g, Fn&& fn) {
    const auto d = g.points.size();
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d, 0.0);
    for (std::size_t count = 0; count < g.total; ++count) {
        for (std::size_t k = 0; k < d; ++k) x[k] = static_cast<double>(idx[k]) * g.spacing[k];
        fn(sample(f, x));
        for (std::size_t k = 0; k < d; ++k) {
            if (++idx[k] < g.points[k]) break;
            idx[k] = 0;
        }
    }
}

// sum_n |xi(n)| |c_n|, a Lipschitz constant of the field.
inline double gradient_bound(const TrigPolynomial& f) {
    double s = 0;
    for (const auto& [n, e] : f.modes()) s += std::sqrt(f.squared_magnitude(n).to_double()) * std::abs(e.constant_value());
    return s;
}

inline double half_diagonal(const SampleGrid& g) {
    double s = 0;
    for (auto h : g.spacing) s += 0.25 * h * h;
    return std::sqrt(s);
}

// Modes form {0}, {n,-n} or {0,n,-n}: sup is |c_0| + 2|c_n| (c_0 is real).
inline bool single_pair(const TrigPolynomial& f, double& sup) {
    if (f.support_size() > 3) return false;
    std::size_t nonzero = 0;
    double c0 = 0, cn = 0;
    for (const auto& [n, e] : f.modes()) {
        if (is_zero_frequency(n))
            c0 = std::abs(e.constant_value());
        else {
            ++nonzero;
            cn = std::abs(e.constant_value());
        }
    }
    if (nonzero != 0 && nonzero != 2) return false;
    sup = c0 + 2.0 * cn;
    return true;
}

inline double torus_volume(const TrigPolynomial& f) {
    return std::pow(2.0 * std::numbers::pi / f.scale().to_double(), f.dimension());
}

}  // namespace detail

/**
 * Sup norm of a static field.
 *
 * Exact for constants and a single cosine pair. Otherwise the maximum over an
 * oversampled grid, with error bound min(L * h, l1 - max) where L bounds the
 * gradient and h is the grid half-diagonal; the true value lies in
 * [value, value + error_bound].
 */
inline NormEstimate linf_norm(const TrigPolynomial& f, std::size_t max_grid_points = kDefaultMaxGridPoints,
                              std::size_t oversample = 8) {
    if (!f.is_static()) throw UsageError("linf_norm requires a static field");
    if (f.is_zero()) return {0.0, 0.0};
    double sup = 0;
    if (detail::single_pair(f, sup)) return {sup, 0.0};
    const double l1 = f.coefficient_l1();
    std::vector<double> origin(static_cast<std::size_t>(f.dimension()), 0.0);
    const double at_origin = std::abs(sample(f, origin));
    if (at_origin >= l1 * (1.0 - 1e-14)) return {at_origin, std::max(0.0, l1 - at_origin)};
    const auto grid = detail::make_grid(f, max_grid_points, oversample);
    double best = at_origin;
    detail::for_each_sample(f, grid, [&](double v) { best = std::max(best, std::abs(v)); });
    const double err = std::min(detail::gradient_bound(f) * detail::half_diagonal(grid), std::max(0.0, l1 - best));
    return {best, err};
}

/// L^p norm over one period (Lebesgue measure on [0, 2pi/scale)^d).
inline NormEstimate lp_norm(const TrigPolynomial& f, double p, std::size_t max_grid_points = kDefaultMaxGridPoints,
                            std::size_t oversample = 8) {
    if (std::isinf(p)) return linf_norm(f, max_grid_points, oversample);
    if (!(p >= 1.0)) throw ConfigError("L^p exponent must be at least 1");
    if (!f.is_static()) throw UsageError("lp_norm requires a static field");
    if (f.is_zero()) return {0.0, 0.0};
    const double vol = detail::torus_volume(f);
    double sup = 0;
    if (detail::single_pair(f, sup) && f.support_size() <= 2) {
        // A cos: mean |cos|^p = Gamma((p+1)/2) / (sqrt(pi) Gamma(p/2 + 1)).
        double mean = f.support_size() == 1 ? 1.0
                                            : std::exp(std::lgamma((p + 1) / 2) - std::lgamma(p / 2 + 1)) / std::sqrt(std::numbers::pi);
        return {sup * std::pow(vol * mean, 1.0 / p), 0.0};
    }
    const auto grid = detail::make_grid(f, max_grid_points, oversample);
    double acc = 0;
    detail::for_each_sample(f, grid, [&](double v) { acc += std::pow(std::abs(v), p); });
    const double mean = acc / static_cast<double>(grid.total);
    const double value = std::pow(vol * mean, 1.0 / p);
    // Even integer p: |f|^p is a trigonometric polynomial the grid integrates exactly.
    const bool exact = grid.refined_enough && p < 8.0 && p == std::floor(p) && static_cast<long>(p) % 2 == 0;
    if (exact) return {value, 64 * std::numeric_limits<double>::epsilon() * value};
    const double m = f.coefficient_l1();
    const double lip = p * std::pow(m, p - 1) * detail::gradient_bound(f);
    const double mean_err = lip * detail::half_diagonal(grid);
    return {value, std::pow(vol * mean_err, 1.0 / p)};
}

/**
 * Besov norm: l^q over blocks of 2^{js} ||P_j f||_{L^p}. With p = q = inf this is
 * the Hoelder-Besov C^s norm.
 */
inline NormEstimate besov_norm(const TrigPolynomial& f, const BesovParams& params,
                               std::size_t max_grid_points = kDefaultMaxGridPoints) {
    params.validate();
    if (!f.is_static()) throw UsageError("besov_norm requires a static field");
    double value = 0, upper = 0;
    for (const auto& [j, block] : lp_decomposition(f)) {
        const auto est = lp_norm(block, params.p, max_grid_points);
        const double w = std::exp2(static_cast<double>(j) * params.s);
        const double lo = w * est.value;
        const double hi = w * (est.value + est.error_bound);
        if (std::isinf(params.q)) {
            value = std::max(value, lo);
            upper = std::max(upper, hi);
        } else {
            value += std::pow(lo, params.q);
            upper += std::pow(hi, params.q);
        }
    }
    if (!std::isinf(params.q)) {
        value = std::pow(value, 1.0 / params.q);
        upper = std::pow(upper, 1.0 / params.q);
    }
    return {value, upper - value};
}

/// Coefficient of the zero mode of a static field.
inline double zero_mode(const TrigPolynomial& f) {
    Frequency zero(static_cast<std::size_t>(f.dimension()), 0);
    return f.value_at(zero).real();
}

/// ||P_0 f||_{L^inf}.
inline NormEstimate p0_norm(const TrigPolynomial& f) { return linf_norm(lp_block(0, f)); }

}  // namespace inflatelab
