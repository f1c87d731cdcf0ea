#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "inflatelab/norms.hpp"
#include "inflatelab/parallel.hpp"
#include "inflatelab/trees.hpp"
#include "inflatelab/trig_polynomial.hpp"

namespace inflatelab {

/// coefficient * op_1(u) * ... * op_k(u) on the right-hand side of u_t + mu(D) u = F(u).
struct NonlinearTerm {
    Rational coefficient;
    std::vector<Operator> factors;

    std::size_t arity() const noexcept { return factors.size(); }
};

/**
 * u_t + mu(D) u = sum of nonlinear terms.
 *
 * The Duhamel sign lives in each term's coefficient: the cubic heat equation
 * u_t - Delta u + u^3 = 0 is the heat multiplier with the single term -u^3.
 */
struct EquationSpec {
    std::string name;
    LinearMultiplier multiplier;
    std::vector<NonlinearTerm> terms;

    bool has_arity(std::size_t k) const {
        for (const auto& t : terms)
            if (t.arity() == k) return true;
        return false;
    }
    AritySet arity_set() const { return has_arity(1) ? AritySet::unary_ternary : AritySet::ternary; }
    bool is_fourth_order() const { return multiplier.is_fourth_order(); }

    void validate(int dimension) const {
        if (terms.empty()) throw StructuralError("equation '" + name + "' has no nonlinear terms");
        for (const auto& t : terms) {
            if (t.arity() != 1 && t.arity() != 3)
                throw StructuralError("equation '" + name + "': terms must have one or three factors");
            for (const auto& op : t.factors)
                if (op.kind == Operator::Kind::partial && (op.axis < 0 || op.axis >= dimension))
                    throw StructuralError("equation '" + name + "': derivative axis out of range");
        }
        if (!has_arity(3)) throw StructuralError("equation '" + name + "' has no cubic term");
    }
};

inline const std::vector<std::string>& equation_ids() {
    static const std::vector<std::string> ids = {"nlh",    "nlh-focusing", "allen-cahn", "allen-cahn-mixed",
                                                 "ch-var1", "ch-var2"};
    return ids;
}

/**
 * Registered equations.
 *
 *   nlh               u_t - Delta u + u^3 = 0
 *   nlh-focusing      u_t - Delta u - u^3 = 0
 *   allen-cahn        u_t - Delta u - u + u^3 = 0, linear part e^{t(Delta + 1)}
 *   allen-cahn-mixed  same equation, heat semigroup with +u as a unary term
 *   ch-var1           u_t + Delta^2 u - u^2 Delta u = 0
 *   ch-var2           u_t + Delta^2 u - u sum_k (d_k u)^2 = 0
 */
inline EquationSpec make_equation(std::string_view id, int dimension = 1) {
    const auto I = Operator::identity();
    EquationSpec eq;
    eq.name = std::string(id);
    if (id == "nlh") {
        eq.multiplier = LinearMultiplier::heat();
        eq.terms = {{Rational(-1), {I, I, I}}};
    } else if (id == "nlh-focusing") {
        eq.multiplier = LinearMultiplier::heat();
        eq.terms = {{Rational(1), {I, I, I}}};
    } else if (id == "allen-cahn") {
        eq.multiplier = LinearMultiplier::allen_cahn();
        eq.terms = {{Rational(-1), {I, I, I}}};
    } else if (id == "allen-cahn-mixed") {
        eq.multiplier = LinearMultiplier::heat();
        eq.terms = {{Rational(1), {I}}, {Rational(-1), {I, I, I}}};
    } else if (id == "ch-var1") {
        eq.multiplier = LinearMultiplier::bilaplacian();
        eq.terms = {{Rational(1), {I, I, Operator::laplacian()}}};
    } else if (id == "ch-var2") {
        eq.multiplier = LinearMultiplier::bilaplacian();
        for (int k = 0; k < dimension; ++k) eq.terms.push_back({Rational(1), {I, Operator::partial(k), Operator::partial(k)}});
    } else {
        throw ConfigError("unknown equation '" + std::string(id) + "'");
    }
    eq.validate(dimension);
    return eq;
}

namespace detail {

// Duhamel integral of the arity-k terms applied to the given factor fields.
inline TrigPolynomial node_value(const EquationSpec& eq, const std::vector<const TrigPolynomial*>& children) {
    const std::size_t k = children.size();
    std::optional<TrigPolynomial> integrand;
    for (const auto& term : eq.terms) {
        if (term.arity() != k) continue;
        TrigPolynomial product = apply_operator(term.factors[0], *children[0]);
        for (std::size_t i = 1; i < k; ++i) product = product * apply_operator(term.factors[i], *children[i]);
        product = scaled(product, term.coefficient.to_double());
        integrand = integrand ? *integrand + product : product;
    }
    if (!integrand)
        throw StructuralError("equation '" + eq.name + "' has no term of arity " + std::to_string(k));
    return duhamel(eq.multiplier, *integrand, +1);
}

}  // namespace detail

/// Linear solution e^{-t mu(D)} u0.
inline TrigPolynomial linear_solution(const TrigPolynomial& u0, const EquationSpec& eq) {
    return apply_semigroup(eq.multiplier, u0);
}

/**
 * Psi(tree): leaves become the linear solution, a node with k children
 * becomes the Duhamel integral of the arity-k nonlinear terms evaluated on
 * its children (child i feeds factor i).
 */
inline TrigPolynomial psi(const Tree& tree, const TrigPolynomial& u0, const EquationSpec& eq) {
    if (!u0.is_static()) throw UsageError("psi requires static initial data");
    if (tree.is_leaf()) return linear_solution(u0, eq);
    std::vector<TrigPolynomial> values;
    values.reserve(tree.arity());
    for (const auto& ch : tree.children()) values.push_back(psi(ch, u0, eq));
    std::vector<const TrigPolynomial*> ptrs;
    for (const auto& v : values) ptrs.push_back(&v);
    return detail::node_value(eq, ptrs);
}

/// Per-generation summary of a partial sum at a fixed time.
struct GenerationDiagnostics {
    int generation = 0;
    std::size_t tree_count = 0;
    std::size_t mode_count = 0;
    std::size_t term_count = 0;  // exponential terms in the symbolic Xi_j
    double l1 = 0.0;             // coefficient l1 norm of Xi_j(t): upper bound for its sup norm
    double linf = 0.0;           // sampled sup norm of Xi_j(t)
};

struct SeriesDiagnostics {
    std::vector<GenerationDiagnostics> generations;
    double u0_sup = 0.0;
    double tail_bound = 0.0;  // majorant of sum_{j > J} ||Xi_j(t)||
    bool within_radius = false;
};

struct PartialSum {
    TrigPolynomial value;
    SeriesDiagnostics diagnostics;
};

/// C0 * t * u0_sup^2 < 1 (t^{1/2} for fourth-order equations).
inline bool radius_check(double t, double u0_sup, double c0 = 6.75, bool fourth_order = false) {
    const double r = c0 * (fourth_order ? std::sqrt(t) : t) * u0_sup * u0_sup;
    return r < 1.0;
}

/**
 * Geometric majorant sum_{j > J} C0^j t^j u0_sup^{2j+1}, in closed form
 * (t^{j/2} for fourth-order equations). Infinite outside the radius.
 */
inline double tail_bound(int J, double t, double u0_sup, double c0 = 6.75, bool fourth_order = false) {
    if (u0_sup <= 0) throw UsageError("tail_bound requires a positive sup norm");
    if (t == 0.0) return 0.0;
    const double r = c0 * (fourth_order ? std::sqrt(t) : t) * u0_sup * u0_sup;
    if (r >= 1.0) return kInfinity;
    return u0_sup * std::pow(r, J + 1) / (1.0 - r);
}

/// Majorant for a single generation: C0^j t^j u0_sup^{2j+1} (t^{j/2} for fourth order).
inline double generation_majorant(int j, double t, double u0_sup, double c0, bool fourth_order = false) {
    return std::pow(c0, j) * std::pow(fourth_order ? std::sqrt(t) : t, j) * std::pow(u0_sup, 2 * j + 1);
}

/**
 * Tree-indexed power series of the solution for fixed data and equation.
 *
 * Psi is memoized per subtree: generation g is built from the cached values
 * of generations < g, trees within a generation are evaluated in parallel,
 * and Xi_j sums them in canonical tree order so the result does not depend
 * on scheduling. Not thread-safe itself; use one instance per thread.
 */
class PicardExpansion {
public:
    PicardExpansion(TrigPolynomial u0, EquationSpec eq, int cap = kDefaultEnumerationCap)
        : u0_(std::move(u0)), eq_(std::move(eq)), cap_(cap) {
        if (!u0_.is_static()) throw UsageError("initial data must be static");
        eq_.validate(u0_.dimension());
        arity_ = eq_.arity_set();
    }

    const TrigPolynomial& initial_data() const noexcept { return u0_; }
    const EquationSpec& equation() const noexcept { return eq_; }
    int cap() const noexcept { return cap_; }

    const std::vector<Tree>& trees(int j) {
        ensure(j);
        return gens_[static_cast<std::size_t>(j)].trees;
    }
    const TrigPolynomial& psi(int j, std::size_t index) {
        ensure(j);
        return gens_[static_cast<std::size_t>(j)].psi.at(index);
    }

    /// Xi_j: sum of Psi over all trees of generation j.
    const TrigPolynomial& xi(int j) {
        ensure(j);
        auto& g = gens_[static_cast<std::size_t>(j)];
        if (!g.xi) {
            TrigPolynomial sum(u0_.dimension(), u0_.scale());
            for (const auto& p : g.psi) sum = sum + p;
            g.xi = std::move(sum);
        }
        return *g.xi;
    }

    /**
     * Xi_j from the one-level expansion of the Duhamel formula:
     * Xi_j = sum over terms and generation compositions of the Duhamel integral of
     * op_1(Xi_a) op_2(Xi_b) op_3(Xi_c), a + b + c = j - 1 (plus op(Xi_{j-1}) for unary terms).
     * Agrees with xi() by linearity; much cheaper for large j.
     */
    const TrigPolynomial& xi_recursive(int j) {
        if (j < 0) throw UsageError("generation must be nonnegative");
        if (j > cap_) throw ResourceError("generation " + std::to_string(j) + " exceeds cap " + std::to_string(cap_));
        while (static_cast<int>(rec_.size()) <= j) {
            const int g = static_cast<int>(rec_.size());
            if (g == 0) {
                rec_.push_back(linear_solution(u0_, eq_));
                continue;
            }
            TrigPolynomial integrand(u0_.dimension(), u0_.scale());
            for (const auto& term : eq_.terms) {
                const double c = term.coefficient.to_double();
                if (term.arity() == 1) {
                    integrand = integrand + scaled(apply_operator(term.factors[0], rec_[static_cast<std::size_t>(g - 1)]), c);
                    continue;
                }
                for (int a = 0; a <= g - 1; ++a) {
                    for (int b = 0; a + b <= g - 1; ++b) {
                        const int cc = g - 1 - a - b;
                        TrigPolynomial prod = apply_operator(term.factors[0], rec_[static_cast<std::size_t>(a)]) *
                                              apply_operator(term.factors[1], rec_[static_cast<std::size_t>(b)]);
                        prod = prod * apply_operator(term.factors[2], rec_[static_cast<std::size_t>(cc)]);
                        integrand = integrand + scaled(prod, c);
                    }
                }
            }
            rec_.push_back(duhamel(eq_.multiplier, integrand, +1));
        }
        return rec_[static_cast<std::size_t>(j)];
    }

    /**
     * Sum of Psi over mixed-arity trees with exactly k ternary and m unary nodes.
     * For a ternary equation only m = 0 is nonzero and graded(k, 0) = Xi_k.
     */
    const TrigPolynomial& graded(int k, int m) {
        if (k < 0 || m < 0) throw UsageError("node counts must be nonnegative");
        if (auto it = graded_.find({k, m}); it != graded_.end()) return it->second;
        TrigPolynomial integrand(u0_.dimension(), u0_.scale());
        if (k == 0 && m == 0) return graded_.emplace(std::pair{0, 0}, linear_solution(u0_, eq_)).first->second;
        for (const auto& term : eq_.terms) {
            const double c = term.coefficient.to_double();
            if (term.arity() == 1) {
                if (m > 0) integrand = integrand + scaled(apply_operator(term.factors[0], graded(k, m - 1)), c);
                continue;
            }
            if (k == 0) continue;
            for (int k1 = 0; k1 <= k - 1; ++k1)
                for (int k2 = 0; k1 + k2 <= k - 1; ++k2)
                    for (int m1 = 0; m1 <= m; ++m1)
                        for (int m2 = 0; m1 + m2 <= m; ++m2) {
                            const int k3 = k - 1 - k1 - k2, m3 = m - m1 - m2;
                            TrigPolynomial prod = apply_operator(term.factors[0], graded(k1, m1)) *
                                                  apply_operator(term.factors[1], graded(k2, m2));
                            prod = prod * apply_operator(term.factors[2], graded(k3, m3));
                            integrand = integrand + scaled(prod, c);
                        }
        }
        return graded_.emplace(std::pair{k, m}, duhamel(eq_.multiplier, integrand, +1)).first->second;
    }

    /**
     * sum_{k <= J, m <= unary_order} graded(k, m) at time t: the mixed-arity series
     * regrouped by cubic order, with unary nodes summed up to unary_order.
     */
    TrigPolynomial regrouped_partial_sum(int J, int unary_order, double t) {
        if (t < 0) throw UsageError("regrouped_partial_sum requires t >= 0");
        TrigPolynomial out(u0_.dimension(), u0_.scale());
        const int mmax = eq_.has_arity(1) ? unary_order : 0;
        for (int k = 0; k <= J; ++k)
            for (int m = 0; m <= mmax; ++m) out = out + evaluate_at(graded(k, m), t);
        return out;
    }

    /// Route used to form Xi_j inside partial sums.
    enum class Route { tree_sum, recursion };

    /**
     * sum_{j <= J} Xi_j(t), with per-generation diagnostics and the tail majorant
     * for the given C0.
     */
    PartialSum partial_sum(int J, double t, double c0 = 6.75, Route route = Route::tree_sum,
                           std::size_t linf_grid_cap = std::size_t{1} << 16) {
        if (t < 0) throw UsageError("partial_sum requires t >= 0");
        if (J > cap_) throw ResourceError("generation " + std::to_string(J) + " exceeds cap " + std::to_string(cap_));
        PartialSum out{TrigPolynomial(u0_.dimension(), u0_.scale()), {}};
        for (int j = 0; j <= J; ++j) {
            const TrigPolynomial& x = route == Route::tree_sum ? xi(j) : xi_recursive(j);
            TrigPolynomial at_t = evaluate_at(x, t);
            GenerationDiagnostics gd;
            gd.generation = j;
            gd.tree_count = route == Route::tree_sum ? trees(j).size() : count(j, arity_).convert_to<std::size_t>();
            gd.mode_count = x.support_size();
            gd.term_count = x.term_count();
            gd.l1 = at_t.coefficient_l1();
            gd.linf = linf_norm(at_t, linf_grid_cap).value;
            out.diagnostics.generations.push_back(gd);
            out.value = out.value + at_t;
        }
        const auto sup = linf_norm(u0_);
        out.diagnostics.u0_sup = sup.value + sup.error_bound;
        const bool fourth = eq_.is_fourth_order();
        if (out.diagnostics.u0_sup > 0) {
            out.diagnostics.within_radius = radius_check(t, out.diagnostics.u0_sup, c0, fourth);
            out.diagnostics.tail_bound = tail_bound(J, t, out.diagnostics.u0_sup, c0, fourth);
        }
        return out;
    }

private:
    struct Generation {
        std::vector<Tree> trees;
        std::vector<TrigPolynomial> psi;
        std::map<std::string, std::size_t> index;
        std::optional<TrigPolynomial> xi;
    };

    std::map<std::pair<int, int>, TrigPolynomial> graded_;

    std::size_t lookup(const Tree& t) const {
        const auto g = tree_index(t).generation();
        return gens_[g].index.at(serialize(t));
    }

    void ensure(int j) {
        if (j < 0) throw UsageError("generation must be nonnegative");
        if (j > cap_) throw ResourceError("generation " + std::to_string(j) + " exceeds cap " + std::to_string(cap_));
        while (static_cast<int>(gens_.size()) <= j) {
            const int g = static_cast<int>(gens_.size());
            Generation gen;
            gen.trees = enumerate(g, arity_, cap_);
            for (std::size_t i = 0; i < gen.trees.size(); ++i) gen.index.emplace(serialize(gen.trees[i]), i);
            gen.psi.assign(gen.trees.size(), TrigPolynomial(u0_.dimension(), u0_.scale()));
            if (g == 0) {
                gen.psi[0] = linear_solution(u0_, eq_);
            } else {
                parallel_for(gen.trees.size(), [&](std::size_t i) {
                    const Tree& t = gen.trees[i];
                    std::vector<const TrigPolynomial*> children;
                    for (const auto& ch : t.children()) {
                        const auto cg = tree_index(ch).generation();
                        children.push_back(&gens_[cg].psi[gens_[cg].index.at(serialize(ch))]);
                    }
                    gen.psi[i] = detail::node_value(eq_, children);
                });
            }
            gens_.push_back(std::move(gen));
        }
    }

    TrigPolynomial u0_;
    EquationSpec eq_;
    int cap_;
    AritySet arity_;
    std::vector<Generation> gens_;
    std::vector<TrigPolynomial> rec_;
};

/// Xi_j by direct tree summation.
inline TrigPolynomial xi(int j, const TrigPolynomial& u0, const EquationSpec& eq, int cap = kDefaultEnumerationCap) {
    PicardExpansion expansion(u0, eq, cap);
    return expansion.xi(j);
}

inline PartialSum partial_sum(int J, const TrigPolynomial& u0, const EquationSpec& eq, double t, double c0 = 6.75,
                              int cap = kDefaultEnumerationCap) {
    PicardExpansion expansion(u0, eq, cap);
    return expansion.partial_sum(J, t, c0);
}

}  // namespace inflatelab
