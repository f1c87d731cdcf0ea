#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "inflatelab/norms.hpp"
#include "inflatelab/picard.hpp"
#include "inflatelab/trig_polynomial.hpp"

namespace inflatelab {

inline constexpr double kBlowUpGuard = 1e12;

/// Galerkin truncation of u_t + mu(D) u = F(u) to a finite mode set closed under negation.
class GalerkinSystem {
public:
    /**
     * Modes: all sums of data modes reachable within |n|_inf <= M * h, where h is
     * the gcd of the data's frequency components. M <= 0 picks the default
     * 2 (2J + 1) * (largest data harmonic in units of h).
     */
    GalerkinSystem(const TrigPolynomial& u0, EquationSpec eq, int truncation, int J_hint = 6)
        : eq_(std::move(eq)), dim_(u0.dimension()), scale_(u0.scale()) {
        if (!u0.is_static()) throw UsageError("oracle requires static initial data");
        eq_.validate(dim_);
        std::vector<Frequency> gens;
        std::int64_t h = 0, top = 0;
        for (const auto& [n, e] : u0.modes()) {
            if (is_zero_frequency(n)) continue;
            gens.push_back(n);
            for (auto c : n) {
                h = std::gcd(h, c < 0 ? -c : c);
                top = std::max<std::int64_t>(top, c < 0 ? -c : c);
            }
        }
        if (h == 0) h = 1;
        if (truncation <= 0) truncation = static_cast<int>(2 * (2 * J_hint + 1) * (top / h));
        truncation_ = std::max(truncation, 0);
        const std::int64_t box = static_cast<std::int64_t>(truncation_) * h;
        build_modes(gens, box);
        for (std::size_t i = 0; i < modes_.size(); ++i) index_.emplace(modes_[i], i);
        state0_.assign(modes_.size(), Complex{});
        for (const auto& [n, e] : u0.modes()) {
            auto it = index_.find(n);
            if (it == index_.end()) throw UsageError("truncation excludes a data mode");
            state0_[it->second] = e.constant_value();
        }
        build_tables();
    }

    const std::vector<Frequency>& modes() const noexcept { return modes_; }
    int truncation() const noexcept { return truncation_; }
    const EquationSpec& equation() const noexcept { return eq_; }
    const std::vector<Complex>& initial_state() const noexcept { return state0_; }

    /// Right-hand side F(u) restricted to the mode set.
    std::vector<Complex> nonlinearity(const std::vector<Complex>& u) const {
        std::vector<Complex> out(modes_.size(), Complex{});
        std::vector<Complex> pair(pair_modes_, Complex{});
        for (const auto& term : eq_.terms) {
            const double c = term.coefficient.to_double();
            if (term.arity() == 1) {
                const auto& m = symbol(term.factors[0]);
                for (std::size_t i = 0; i < u.size(); ++i) out[i] += c * m[i] * u[i];
                continue;
            }
            const auto v1 = applied(term.factors[0], u);
            const auto v2 = applied(term.factors[1], u);
            const auto v3 = applied(term.factors[2], u);
            std::fill(pair.begin(), pair.end(), Complex{});
            for (const auto& e : pair_table_) pair[e.out] += v1[e.a] * v2[e.b];
            for (const auto& e : triple_table_) out[e.out] += c * pair[e.a] * v3[e.b];
        }
        return out;
    }

    /**
     * Exponential Euler: u <- e^{-mu dt} u + dt phi1(-mu dt) F(u), with the
     * linear part exact per mode. Throws NumericalGuardError past the blow-up guard.
     */
    std::vector<Complex> integrate_state(double t_end, std::size_t steps, bool nonlinear = true) const {
        if (steps == 0) throw UsageError("oracle needs at least one step");
        const double dt = t_end / static_cast<double>(steps);
        std::vector<double> decay(modes_.size()), phi(modes_.size());
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const double mu = mu_[i];
            decay[i] = std::exp(-mu * dt);
            phi[i] = mu == 0.0 ? dt : -std::expm1(-mu * dt) / mu;
        }
        std::vector<Complex> u = state0_;
        for (std::size_t s = 0; s < steps; ++s) {
            if (nonlinear) {
                const auto f = nonlinearity(u);
                for (std::size_t i = 0; i < u.size(); ++i) u[i] = decay[i] * u[i] + phi[i] * f[i];
            } else {
                for (std::size_t i = 0; i < u.size(); ++i) u[i] *= decay[i];
            }
            for (const auto& c : u)
                if (!(std::abs(c) <= kBlowUpGuard))
                    throw NumericalGuardError("oracle blow-up guard tripped at t = " +
                                              std::to_string(dt * static_cast<double>(s + 1)) +
                                              " (coefficient magnitude above 1e12)");
        }
        return u;
    }

    /// Largest |c(-n) - conj c(n)| in a state.
    double hermitian_defect(const std::vector<Complex>& u) const {
        double d = 0;
        for (std::size_t i = 0; i < modes_.size(); ++i)
            d = std::max(d, std::abs(u[neg_[i]] - std::conj(u[i])));
        return d;
    }

    /// Static field from a state, symmetrized.
    TrigPolynomial to_field(const std::vector<Complex>& u) const {
        TrigPolynomial::ModeMap m;
        for (std::size_t i = 0; i < modes_.size(); ++i)
            if (u[i] != Complex{}) m.emplace(modes_[i], ExpPolynomial(u[i]));
        return TrigPolynomial::from_modes(dim_, scale_, m);
    }

private:
    struct Entry {
        std::size_t a, b, out;
    };

    void build_modes(const std::vector<Frequency>& gens, std::int64_t box) {
        std::map<Frequency, bool> seen;
        std::queue<Frequency> q;
        Frequency zero(static_cast<std::size_t>(dim_), 0);
        seen[zero] = true;
        q.push(zero);
        auto inside = [&](const Frequency& n) {
            for (auto c : n)
                if ((c < 0 ? -c : c) > box) return false;
            return true;
        };
        while (!q.empty()) {
            Frequency n = q.front();
            q.pop();
            for (const auto& g : gens)
                for (const auto& step : {g, negate(g)}) {
                    Frequency k = add_frequencies(n, step);
                    if (!inside(k) || seen.count(k)) continue;
                    seen[k] = true;
                    q.push(k);
                }
        }
        for (const auto& [n, _] : seen) modes_.push_back(n);
    }

    void build_tables() {
        const std::size_t n = modes_.size();
        mu_.resize(n);
        neg_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            mu_[i] = eq_.multiplier.at(scale_ * scale_ * lattice_norm2(modes_[i])).to_double();
            neg_[i] = index_.at(negate(modes_[i]));
        }
        // Intermediate products live on all pairwise sums.
        std::map<Frequency, std::size_t> pair_index;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                Frequency k = add_frequencies(modes_[a], modes_[b]);
                auto [it, inserted] = pair_index.emplace(k, pair_index.size());
                pair_table_.push_back({a, b, it->second});
            }
        pair_modes_ = pair_index.size();
        for (const auto& [k, p] : pair_index)
            for (std::size_t c = 0; c < n; ++c) {
                auto it = index_.find(add_frequencies(k, modes_[c]));
                if (it != index_.end()) triple_table_.push_back({p, c, it->second});
            }
        for (const auto& term : eq_.terms)
            for (const auto& op : term.factors) symbol(op);
    }

    const std::vector<Complex>& symbol(const Operator& op) const {
        const int key = op.kind == Operator::Kind::partial ? 16 + op.axis : static_cast<int>(op.kind);
        auto it = symbols_.find(key);
        if (it != symbols_.end()) return it->second;
        std::vector<Complex> s(modes_.size());
        for (std::size_t i = 0; i < modes_.size(); ++i) {
            const double x2 = (scale_ * scale_ * lattice_norm2(modes_[i])).to_double();
            switch (op.kind) {
                case Operator::Kind::identity: s[i] = 1.0; break;
                case Operator::Kind::laplacian: s[i] = -x2; break;
                case Operator::Kind::bilaplacian: s[i] = x2 * x2; break;
                case Operator::Kind::partial:
                    s[i] = Complex(0.0, (scale_ * Rational(modes_[i][static_cast<std::size_t>(op.axis)])).to_double());
                    break;
            }
        }
        return symbols_.emplace(key, std::move(s)).first->second;
    }

    std::vector<Complex> applied(const Operator& op, const std::vector<Complex>& u) const {
        if (op.kind == Operator::Kind::identity) return u;
        const auto& s = symbol(op);
        std::vector<Complex> v(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = s[i] * u[i];
        return v;
    }

    EquationSpec eq_;
    int dim_;
    Rational scale_;
    int truncation_ = 0;
    std::vector<Frequency> modes_;
    std::map<Frequency, std::size_t> index_;
    std::vector<Complex> state0_;
    std::vector<double> mu_;
    std::vector<std::size_t> neg_;
    std::vector<Entry> pair_table_, triple_table_;
    std::size_t pair_modes_ = 0;
    mutable std::map<int, std::vector<Complex>> symbols_;
};

struct OracleOptions {
    double dt = 0.0;          // 0: 1e-5 * t_end
    int truncation = 0;       // 0: default from the data
    int J_hint = 6;
    double c0 = 6.75;
    bool enforce_radius = true;
};

namespace detail {
inline void require_radius(const TrigPolynomial& u0, const EquationSpec& eq, double t, double c0) {
    const auto sup = linf_norm(u0);
    const double s = sup.value + sup.error_bound;
    if (s > 0 && !radius_check(t, s, c0, eq.is_fourth_order()))
        throw ConfigError("oracle refused: t * C0 * ||u0||^2 >= 1 lies outside the contraction window");
}
}  // namespace detail

/// Final state of the exponential-Euler integration, Hermitian symmetry enforced.
inline TrigPolynomial integrate(const TrigPolynomial& u0, const EquationSpec& eq, double t_end,
                                const OracleOptions& opt = {}) {
    if (t_end < 0) throw UsageError("t_end must be nonnegative");
    if (opt.enforce_radius) detail::require_radius(u0, eq, t_end, opt.c0);
    if (t_end == 0) return u0;
    const double dt = opt.dt > 0 ? opt.dt : 1e-5 * t_end;
    GalerkinSystem sys(u0, eq, opt.truncation, opt.J_hint);
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    return sys.to_field(sys.integrate_state(t_end, std::max<std::size_t>(steps, 1)));
}

/// Result of Richardson-refined integration.
struct RefinedSolution {
    TrigPolynomial value;
    std::size_t steps = 0;    // finest step count used
    double error_estimate = 0;  // distance between the last two extrapolants
    bool converged = false;
};

/**
 * Doubles the step count from `initial_steps` until two consecutive
 * Richardson extrapolants 2 u_{2n} - u_n agree within `tol` in coefficient sup.
 */
inline RefinedSolution integrate_refined(const GalerkinSystem& sys, double t_end, double tol,
                                         std::size_t initial_steps = 64, std::size_t max_steps = std::size_t{1} << 20) {
    RefinedSolution out{sys.to_field(sys.initial_state()), 0, 0.0, t_end == 0};
    if (t_end == 0) return out;
    std::size_t n = std::max<std::size_t>(initial_steps, 1);
    auto coarse = sys.integrate_state(t_end, n);
    std::vector<Complex> prev_extrap;
    while (true) {
        auto fine = sys.integrate_state(t_end, 2 * n);
        std::vector<Complex> extrap(fine.size());
        for (std::size_t i = 0; i < fine.size(); ++i) extrap[i] = 2.0 * fine[i] - coarse[i];
        if (!prev_extrap.empty()) {
            double d = 0;
            for (std::size_t i = 0; i < extrap.size(); ++i) d = std::max(d, std::abs(extrap[i] - prev_extrap[i]));
            out.error_estimate = d;
            out.steps = 2 * n;
            out.value = sys.to_field(extrap);
            if (d < tol) {
                out.converged = true;
                return out;
            }
        }
        if (4 * n > max_steps) {
            out.steps = 2 * n;
            out.value = sys.to_field(extrap);
            return out;
        }
        prev_extrap = std::move(extrap);
        coarse = std::move(fine);
        n *= 2;
    }
}

struct ComparisonReport {
    double t = 0;
    int J = 0;
    int truncation = 0;
    std::size_t mode_count = 0;
    std::size_t steps = 0;
    double dt = 0;
    double dt_error = 0;        // Richardson self-consistency estimate
    bool dt_converged = false;
    double u0_sup = 0;
    bool within_radius = false;
    std::vector<double> deviations;  // coefficient sup distance of partial_sum(j) to the oracle, j = 0..J
    double deviation = 0;            // deviations[J]
    double tail_bound = 0;
    double geometric_ratio = 0;      // fitted ratio of successive deviations (NaN if < 2 usable points)
    std::size_t fit_points = 0;
    bool pass = false;
};

/**
 * Integrates with Richardson refinement to `tol` and compares with the
 * partial sums of the Picard series for J' = 0..J. The ratio fit only uses
 * deviations above 10x the oracle's error estimate.
 */
inline ComparisonReport compare_with_series(const TrigPolynomial& u0, const EquationSpec& eq, double t, int J,
                                            const OracleOptions& opt = {}, double tol = 1e-8) {
    ComparisonReport r;
    r.t = t;
    r.J = J;
    const auto sup = linf_norm(u0);
    r.u0_sup = sup.value + sup.error_bound;
    r.within_radius = r.u0_sup == 0 || radius_check(t, r.u0_sup, opt.c0, eq.is_fourth_order());
    if (!r.within_radius)
        throw ConfigError("comparison refused: t * C0 * ||u0||^2 >= 1 lies outside the contraction window");
    GalerkinSystem sys(u0, eq, opt.truncation, std::max(J, opt.J_hint));
    r.truncation = sys.truncation();
    r.mode_count = sys.modes().size();
    std::size_t initial = 64;
    if (opt.dt > 0 && t > 0) initial = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / opt.dt)));
    const auto oracle = integrate_refined(sys, t, tol, initial);
    r.steps = oracle.steps;
    r.dt = oracle.steps ? t / static_cast<double>(oracle.steps) : 0.0;
    r.dt_error = oracle.error_estimate;
    r.dt_converged = oracle.converged;

    PicardExpansion series(u0, eq, std::max(J, kDefaultEnumerationCap));
    TrigPolynomial sum(u0.dimension(), u0.scale());
    for (int j = 0; j <= J; ++j) {
        if (j == 0 || t > 0) sum = sum + evaluate_at(series.xi_recursive(j), t);  // Xi_j(0) = 0 for j >= 1
        r.deviations.push_back(coefficient_distance(sum, oracle.value));
    }
    r.deviation = r.deviations.back();
    r.tail_bound = r.u0_sup > 0 ? tail_bound(J, t, r.u0_sup, opt.c0, eq.is_fourth_order()) : 0.0;

    // log d_j = a + j log rho over the deviations above the oracle floor.
    const double floor = 10.0 * r.dt_error;
    std::vector<double> xs, ys;
    for (int j = 0; j <= J; ++j) {
        const double d = r.deviations[static_cast<std::size_t>(j)];
        if (d > floor && d > 0) {
            xs.push_back(j);
            ys.push_back(std::log(d));
        }
    }
    r.fit_points = xs.size();
    if (xs.size() >= 2) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        r.geometric_ratio = std::exp(sxy / sxx);
    } else {
        r.geometric_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    r.pass = r.deviation <= r.tail_bound + 10.0 * r.dt_error;
    return r;
}

}  // namespace inflatelab
