#pragma once

// Randomized algebra properties shared by the property suite and the acceptance binary.
// Each check runs `instances` independent draws and reports how many held.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inflatelab/picard.hpp"
#include "support.hpp"

namespace properties {

using namespace inflatelab;

struct Outcome {
    int passed = 0;
    int total = 0;
    double worst = 0;  // largest normalized defect seen

    bool ok() const { return total > 0 && passed == total; }
    void record(double defect, double tol) {
        ++total;
        worst = std::max(worst, defect);
        if (defect <= tol) ++passed;
    }
};

inline constexpr double kTwoPi = 2 * std::numbers::pi;

/// Coefficient at -n is the conjugate of the one at n; samples are real to 1e-12 relative.
inline Outcome hermitian_symmetry(int instances, std::uint64_t seed = 101) {
    testsupport::Gen g(seed);
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const int dim = static_cast<int>(g.integer(1, 2));
        auto a = g.static_field(dim, 3, 4), b = g.static_field(dim, 3, 4);
        const auto la = apply_semigroup(LinearMultiplier::heat(), a);
        const TrigPolynomial results[] = {
            a + b,
            a * b,
            apply_operator(Operator::partial(static_cast<int>(g.integer(0, dim - 1))), a),
            apply_operator(Operator::bilaplacian(), b),
            evaluate_at(apply_semigroup(LinearMultiplier::allen_cahn(), b), g.uniform(0, 1)),
            evaluate_at(duhamel(LinearMultiplier::heat(), la * la * la, -1), g.uniform(0, 1))};
        double defect = 0;
        for (const auto& r : results) {
            const double scale = std::max(r.coefficient_l1(), 1e-300);
            for (const auto& [n, e] : r.modes())
                defect = std::max(defect, (r.coefficient(negate(n)) - e.conj()).max_abs_coeff() / scale);
            if (!r.is_static()) continue;
            for (int k = 0; k < 64; ++k)
                defect = std::max(defect, std::abs(sample_complex(r, g.point(dim, kTwoPi)).imag()) / scale);
        }
        out.record(defect, 1e-12);
    }
    return out;
}

/// sample(a * b) = sample(a) sample(b) to 1e-12 relative to ||a||_l1 ||b||_l1.
inline Outcome product_identity(int instances, std::uint64_t seed = 103) {
    testsupport::Gen g(seed);
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const int dim = static_cast<int>(g.integer(1, 3));
        auto a = g.static_field(dim, 4, 5), b = g.static_field(dim, 4, 5);
        const auto p = a * b;
        const double scale = std::max(1e-300, a.coefficient_l1() * b.coefficient_l1());
        double defect = 0;
        for (int k = 0; k < 64; ++k) {
            const auto x = g.point(dim, kTwoPi);
            defect = std::max(defect, std::abs(sample(p, x) - sample(a, x) * sample(b, x)) / scale);
        }
        out.record(defect, 1e-12);
    }
    return out;
}

/// d/dt D + mu D - sign f vanishes as an exponential polynomial (coefficients < 1e-14 relative).
inline Outcome duhamel_ode(int instances, std::uint64_t seed = 107) {
    testsupport::Gen g(seed);
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const auto f = g.exp_poly(4, 3, 6);
        const Rational mu(g.integer(-4, 24), 4);  // overlaps the integrand rates, so resonances occur
        const int sign = g.coin() ? 1 : -1;
        const auto D = f.duhamel(mu, sign);
        const auto residual = D.derivative() + D.scaled(mu.to_double()) - f.scaled(sign);
        const double scale = std::max({1.0, f.max_abs_coeff(), D.max_abs_coeff() * std::max(1.0, std::abs(mu.to_double()))});
        out.record(std::max(residual.max_abs_coeff(), std::abs(D.evaluate(0.0))) / scale, 1e-14);
    }
    return out;
}

/// S(t2) S(t1) f = S(t1 + t2) f on evaluated coefficients, to 1e-12 relative.
inline Outcome semigroup_additivity(int instances, std::uint64_t seed = 109) {
    testsupport::Gen g(seed);
    const LinearMultiplier mults[] = {LinearMultiplier::heat(), LinearMultiplier::allen_cahn(), LinearMultiplier::bilaplacian()};
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const int dim = static_cast<int>(g.integer(1, 2));
        const auto f = g.static_field(dim, 3, 3);
        const auto& m = mults[g.integer(0, 2)];
        const double t1 = g.uniform(0, 0.5), t2 = g.uniform(0, 0.5);
        const auto two_steps = evaluate_at(apply_semigroup(m, evaluate_at(apply_semigroup(m, f), t1)), t2);
        const auto one_step = evaluate_at(apply_semigroup(m, f), t1 + t2);
        // coefficients under the absolute pruning threshold may vanish from one side
        const double pruned = kDefaultConsolidationThreshold * static_cast<double>(f.support_size());
        const double excess = std::max(0.0, coefficient_distance(two_steps, one_step) - pruned);
        out.record(excess / std::max(1e-300, one_step.coefficient_l1()), 1e-12);
    }
    return out;
}

/// Xi_j(c u0) = c^{2j+1} Xi_j(u0) termwise to 1e-12 relative, j = 0..2, c in [1/2, 2].
inline Outcome homogeneity(int instances, std::uint64_t seed = 113) {
    testsupport::Gen g(seed);
    const char* ids[] = {"nlh", "nlh-focusing", "allen-cahn", "ch-var1", "ch-var2"};
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const auto eq = make_equation(ids[g.integer(0, 4)]);
        const auto u0 = g.static_field(1, 2, 3);
        const double c = g.uniform(0.5, 2.0);
        PicardExpansion a(u0, eq, 2), b(scaled(u0, c), eq, 2);
        double defect = 0;
        for (int j = 0; j <= 2; ++j) {
            const auto want = scaled(a.xi(j), std::pow(c, 2 * j + 1));
            defect = std::max(defect, max_term_coefficient(b.xi(j) - want) / std::max(1e-300, max_term_coefficient(want)));
        }
        out.record(defect, 1e-12);
    }
    return out;
}

/// Heat flow: modes at scale 1/lambda with amplitudes / lambda, evaluated at lambda^2 t,
/// give Psi(T)(t) / lambda mode by mode, for random trees with j <= 2 and rational lambda.
inline Outcome scaling_symmetry(int instances, std::uint64_t seed = 127) {
    testsupport::Gen g(seed);
    const auto eq = make_equation("nlh");
    const std::vector<Tree> trees = [] {
        std::vector<Tree> all;
        for (int j = 0; j <= 2; ++j)
            for (auto& t : enumerate(j, AritySet::ternary)) all.push_back(t);
        return all;
    }();
    Outcome out;
    for (int i = 0; i < instances; ++i) {
        const Rational lambda(g.integer(1, 5), g.integer(1, 5));
        const double l = lambda.to_double();
        const auto u0 = g.static_field(1, 2, 3);
        TrigPolynomial::ModeMap modes;
        for (const auto& [n, e] : u0.modes()) modes.emplace(n, e.scaled(1.0 / l));
        const auto v0 = TrigPolynomial::from_modes(1, Rational(1) / lambda, modes);
        const Tree& tree = trees[static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(trees.size()) - 1))];
        const double t = g.uniform(0.01, 0.5);
        const auto a = evaluate_at(psi(tree, u0, eq), t);
        const auto b = evaluate_at(psi(tree, v0, eq), l * l * t);
        double defect = a.support_size() == b.support_size() ? 0.0 : 1.0;
        for (const auto& [n, e] : a.modes())
            defect = std::max(defect, std::abs(b.value_at(n) - e.constant_value() / l) / std::max(1e-300, a.coefficient_l1() / l));
        out.record(defect, 1e-12);
    }
    return out;
}

}  // namespace properties
