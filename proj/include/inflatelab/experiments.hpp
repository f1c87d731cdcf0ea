#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "inflatelab/norms.hpp"
#include "inflatelab/parallel.hpp"
#include "inflatelab/picard.hpp"

namespace inflatelab {

/// Data N^{-s-eps} (cos(n1.x) + cos(2 n1.x)), n1 = (N, 0, ..., 0).
struct NonEndpointParams {
    std::int64_t N = 64;
    double s = -0.8;
    double eps = 0.01;
    double delta = 0.1;
    int d = 1;
    double amplitude_scale = 1.0;  // multiplies N^{-s-eps}; 1 for the inflation data

    void validate() const {
        if (N < 2) throw ConfigError("N must be at least 2");
        if (d < 1) throw ConfigError("dimension must be at least 1");
        if (!(eps >= 0)) throw ConfigError("eps must be nonnegative");
        if (!(delta > 0)) throw ConfigError("delta must be positive");
        if (!(-1.0 + delta - eps < s && s < -2.0 / 3.0 - eps)) {
            std::ostringstream os;
            os << "s = " << s << " violates the parameter window -1 + delta - eps < s < -2/3 - eps (here "
               << -1.0 + delta - eps << " < s < " << -2.0 / 3.0 - eps << ")";
            throw ConfigError(os.str());
        }
    }
    double amplitude() const { return amplitude_scale * std::pow(static_cast<double>(N), -s - eps); }
};

/// Lacunary data (1/log K) sum_{k=1..K} (a_k N)^{2/3} (cos(a_k n1.x) + cos(2 a_k n1.x)), a_k = 2^{2^k}.
struct EndpointParams {
    std::int64_t N = 256;
    int K = 2;
    double delta = 0.1;
    int d = 1;

    void validate() const {
        if (N < 2) throw ConfigError("N must be at least 2");
        if (K < 2) throw ConfigError("K must be at least 2");
        if (d < 1) throw ConfigError("dimension must be at least 1");
        if (!(delta > 0)) throw ConfigError("delta must be positive");
    }
};

/// a_k = 2^{2^k} exactly.
inline BigInt lacunary_frequency(int k) {
    if (k < 0) throw UsageError("lacunary index must be nonnegative");
    return BigInt(1) << (std::size_t{1} << k);
}

inline Frequency axis_frequency(int d, std::int64_t m) {
    Frequency n(static_cast<std::size_t>(d), 0);
    n[0] = m;
    return n;
}

inline TrigPolynomial make_data_nonendpoint(const NonEndpointParams& p) {
    p.validate();
    const double A = p.amplitude();
    if (p.N > std::numeric_limits<std::int64_t>::max() / 2) throw ResourceError("frequency 2N exceeds 64-bit range");
    return TrigPolynomial::cosine(axis_frequency(p.d, p.N), A) + TrigPolynomial::cosine(axis_frequency(p.d, 2 * p.N), A);
}

inline TrigPolynomial make_data_endpoint(const EndpointParams& p) {
    p.validate();
    TrigPolynomial u(p.d);
    const double L = std::log(static_cast<double>(p.K));
    const BigInt limit = std::numeric_limits<std::int64_t>::max();
    for (int k = 1; k <= p.K; ++k) {
        const BigInt f = lacunary_frequency(k) * p.N;
        if (2 * f > limit)
            throw ResourceError("endpoint frequency 2 a_" + std::to_string(k) + " N exceeds the 64-bit lattice range");
        const auto m = f.convert_to<std::int64_t>();
        const double amp = std::pow(static_cast<double>(m), 2.0 / 3.0) / L;
        u = u + TrigPolynomial::cosine(axis_frequency(p.d, m), amp) + TrigPolynomial::cosine(axis_frequency(p.d, 2 * m), amp);
    }
    return u;
}

/// Default observation time N^{-2+delta}, or N^{-4+delta} for fourth-order equations.
inline double default_time(std::int64_t N, double delta, bool fourth_order = false) {
    return std::pow(static_cast<double>(N), (fourth_order ? -4.0 : -2.0) + delta);
}

/// |P_0 Xi_1(t)| = (1/8) N^{-2-3s-3eps} (1 - e^{-6 t N^2}) for the heat equation.
inline double closed_form_p0_xi1(const NonEndpointParams& p, double t) {
    const double N = static_cast<double>(p.N);
    const double A = p.amplitude();
    return A * A * A / (8.0 * N * N) * -std::expm1(-6.0 * t * N * N);
}

/// (1/(8 (log K)^3)) sum_k (1 - e^{-6 t (a_k N)^2}).
inline double endpoint_closed_form(const EndpointParams& p, double t) {
    const double L = std::log(static_cast<double>(p.K));
    double s = 0;
    for (int k = 1; k <= p.K; ++k) {
        const double f = lacunary_frequency(k).convert_to<double>() * static_cast<double>(p.N);
        s += -std::expm1(-6.0 * t * f * f);
    }
    return s / (8.0 * L * L * L);
}

/**
 * Signed P_0 Xi_1(t) straight from the data, without the symbolic engine:
 * the zero-frequency part of the Duhamel integral of each nonlinear term,
 * summed over ordered mode triples with n1 + n2 + n3 = 0.
 */
inline double derive_p0_profile(const TrigPolynomial& u0, const EquationSpec& eq, double t) {
    if (!u0.is_static()) throw UsageError("derive_p0_profile requires static data");
    struct Mode {
        Frequency n;
        Complex c;
        Rational xi2;
    };
    std::vector<Mode> modes;
    for (const auto& [n, e] : u0.modes()) modes.push_back({n, e.constant_value(), u0.squared_magnitude(n)});
    const Rational mu0 = eq.multiplier.at(Rational(0));
    auto symbol = [&](const Operator& op, const Mode& m) -> Complex {
        const double x2 = m.xi2.to_double();
        switch (op.kind) {
            case Operator::Kind::identity: return 1.0;
            case Operator::Kind::laplacian: return -x2;
            case Operator::Kind::bilaplacian: return x2 * x2;
            case Operator::Kind::partial:
                return Complex(0.0, (u0.scale() * Rational(m.n[static_cast<std::size_t>(op.axis)])).to_double());
        }
        return 0.0;
    };
    // \int_0^t e^{-(t-s) mu0} e^{-lambda s} ds
    auto kernel = [&](const Rational& lambda) {
        return ExpPolynomial(Complex(1.0), 0, lambda).duhamel(mu0, 1).evaluate(t).real();
    };
    Complex total{};
    for (const auto& term : eq.terms) {
        const Complex c(term.coefficient.to_double());
        if (term.arity() == 1) {
            for (const auto& m : modes)
                if (is_zero_frequency(m.n)) total += c * symbol(term.factors[0], m) * m.c * kernel(eq.multiplier.at(m.xi2));
            continue;
        }
        for (const auto& a : modes)
            for (const auto& b : modes) {
                const Frequency ab = add_frequencies(a.n, b.n);
                for (const auto& m3 : modes) {
                    if (!is_zero_frequency(add_frequencies(ab, m3.n))) continue;
                    const Rational lambda = eq.multiplier.at(a.xi2) + eq.multiplier.at(b.xi2) + eq.multiplier.at(m3.xi2);
                    total += c * symbol(term.factors[0], a) * a.c * symbol(term.factors[1], b) * b.c *
                             symbol(term.factors[2], m3) * m3.c * kernel(lambda);
                }
            }
    }
    return total.real();
}

/// Signed P_0 Xi_1(t) from the symbolic pipeline.
inline double pipeline_p0_xi1(const TrigPolynomial& u0, const EquationSpec& eq, double t) {
    PicardExpansion expansion(u0, eq, 1);
    return zero_mode(evaluate_at(expansion.xi(1), t));
}

/// Closed forms of the signed zero mode of Xi_1 on the non-endpoint data, per equation.
inline double closed_form_p0_xi1_signed(const std::string& equation, const NonEndpointParams& p, double t) {
    const double N = static_cast<double>(p.N);
    const double A = p.amplitude();
    const double A3 = A * A * A;
    if (equation == "nlh" || equation == "allen-cahn-mixed") return -closed_form_p0_xi1(p, t);
    if (equation == "nlh-focusing") return closed_form_p0_xi1(p, t);
    if (equation == "allen-cahn") {
        const double g = 6.0 * N * N - 2.0;
        return -0.75 * A3 * std::exp(t) * -std::expm1(-g * t) / g;
    }
    const double decay = -std::expm1(-18.0 * t * N * N * N * N);
    if (equation == "ch-var1") return -A3 / (12.0 * N * N) * decay;
    if (equation == "ch-var2") return A3 / (24.0 * N * N) * decay;
    throw ConfigError("no closed form for equation '" + equation + "'");
}

/// P_0 Xi_1 for the endpoint data minus the lacunary sum: the resonant cross term between a_1 = 4 and a_2 = 16.
inline double endpoint_cross_term(const EndpointParams& p, double t) {
    const double L = std::log(static_cast<double>(p.K));
    const double N = static_cast<double>(p.N);
    return std::pow(2.0, 16.0 / 3.0) * -std::expm1(-384.0 * t * N * N) / (512.0 * L * L * L);
}

struct InflationRecord {
    std::string experiment;
    std::string equation;
    std::int64_t N = 0;
    int K = 0;
    double s = 0, eps = 0, delta = 0;
    double t = 0;
    double norm_u0_Cs = 0;
    double p0_xi1_closed = 0;    // |P_0 Xi_1(t)| from the closed form
    double p0_xi1_pipeline = 0;  // |P_0 Xi_1(t)| from the symbolic engine
    double p0_xi1_signed = 0;    // signed pipeline value
    double u0_sup = 0;
    double tail_bound = 0;       // majorant of sum_{j >= 2} ||Xi_j(t)||
    double lower_bound = 0;      // |P_0 Xi_1| - ||P_0 linear|| - tail
    double wall_ms = 0;
    bool closed_form_only = false;  // endpoint lattice beyond 64 bits: pipeline fields are NaN
    std::string error;           // nonempty if the point failed

    bool ok() const { return error.empty(); }
};

struct ScanConfig {
    std::string experiment = "nonendpoint";  // nonendpoint | endpoint | allen-cahn | ch-var1 | ch-var2
    std::string equation;                    // empty: chosen by the experiment
    double s = -0.8;
    double eps = 0.01;
    double delta = 0.1;
    std::vector<std::int64_t> N_list;
    std::vector<int> K_list;
    int J_max = 4;
    double C0 = 6.75;
    int generation_cap = kDefaultEnumerationCap;
    int d = 1;
    bool timing = true;

    std::string effective_equation() const {
        if (!equation.empty()) return equation;
        if (experiment == "nonendpoint" || experiment == "endpoint") return "nlh";
        return experiment;
    }
};

inline const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids = {"nonendpoint", "endpoint", "allen-cahn", "ch-var1", "ch-var2"};
    return ids;
}

/// Fills the default N/K ranges and checks every point's window.
inline void prepare_scan(ScanConfig& cfg) {
    if (std::find(experiment_ids().begin(), experiment_ids().end(), cfg.experiment) == experiment_ids().end())
        throw ConfigError("unknown experiment '" + cfg.experiment + "'");
    const auto eq = cfg.effective_equation();
    if (std::find(equation_ids().begin(), equation_ids().end(), eq) == equation_ids().end())
        throw ConfigError("unknown equation '" + eq + "'");
    if (cfg.experiment == "endpoint") {
        if (cfg.K_list.empty()) cfg.K_list = {2, 3, 4};
        if (cfg.N_list.empty()) cfg.N_list = {256};
        for (int K : cfg.K_list) EndpointParams{cfg.N_list.front(), K, cfg.delta, cfg.d}.validate();
    } else {
        if (cfg.N_list.empty())
            for (int k = 6; k <= 14; ++k) cfg.N_list.push_back(std::int64_t{1} << k);
        for (auto N : cfg.N_list) NonEndpointParams{N, cfg.s, cfg.eps, cfg.delta, cfg.d, 1.0}.validate();
    }
    if (!(cfg.C0 > 0)) throw ConfigError("C0 must be positive");
    if (cfg.J_max < 0) throw ConfigError("J_max must be nonnegative");
    if (cfg.J_max > cfg.generation_cap) throw ConfigError("J_max exceeds generation_cap");
}

namespace detail {

/// Endpoint point whose rates leave the 64-bit lattice: floating-rate closed form only.
inline void fill_closed_form_only(InflationRecord& r, const EndpointParams& p, double c0, bool fourth) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double L = std::log(static_cast<double>(p.K));
    r.closed_form_only = true;
    // every mode sits alone in its dyadic block; a_k is a power of two, so each
    // block weight 2^{-2j/3} m^{2/3} reduces to (N / 2^{floor log2 N})^{2/3}
    const double Nd = static_cast<double>(p.N);
    r.norm_u0_Cs = std::pow(Nd / std::exp2(std::floor(std::log2(Nd))), 2.0 / 3.0) / L;
    double l1 = 0;
    for (int k = 1; k <= p.K; ++k)
        l1 += 2.0 * std::pow(lacunary_frequency(k).convert_to<double>() * static_cast<double>(p.N), 2.0 / 3.0) / L;
    r.u0_sup = l1;
    r.p0_xi1_pipeline = r.p0_xi1_signed = nan;
    r.tail_bound = tail_bound(1, r.t, r.u0_sup, c0, fourth);
    r.lower_bound = r.p0_xi1_closed - r.tail_bound;  // P_0 of the linear flow vanishes
}

inline InflationRecord run_point(const ScanConfig& cfg, std::int64_t N, int K) {
    InflationRecord r;
    r.experiment = cfg.experiment;
    r.equation = cfg.effective_equation();
    r.N = N;
    r.K = K;
    r.delta = cfg.delta;
    const auto start = std::chrono::steady_clock::now();
    try {
        const EquationSpec eq = make_equation(r.equation, cfg.d);
        const bool fourth = eq.is_fourth_order();
        TrigPolynomial u0(cfg.d);
        if (cfg.experiment == "endpoint") {
            EndpointParams p{N, K, cfg.delta, cfg.d};
            r.s = -2.0 / 3.0;
            r.eps = 0.0;
            r.t = default_time(N, cfg.delta, fourth);
            r.p0_xi1_closed = endpoint_closed_form(p, r.t);
            try {
                u0 = make_data_endpoint(p);
            } catch (const ResourceError&) {
                fill_closed_form_only(r, p, cfg.C0, fourth);
                r.wall_ms = cfg.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() : 0.0;
                return r;
            }
        } else {
            NonEndpointParams p{N, cfg.s, cfg.eps, cfg.delta, cfg.d, 1.0};
            r.s = cfg.s;
            r.eps = cfg.eps;
            u0 = make_data_nonendpoint(p);
            r.t = default_time(N, cfg.delta, fourth);
            r.p0_xi1_closed = std::abs(closed_form_p0_xi1_signed(r.equation, p, r.t));
        }
        r.norm_u0_Cs = besov_norm(u0, {r.s, kInfinity, kInfinity}).value;
        r.p0_xi1_signed = pipeline_p0_xi1(u0, eq, r.t);
        r.p0_xi1_pipeline = std::abs(r.p0_xi1_signed);
        const auto sup = linf_norm(u0);
        r.u0_sup = sup.value + sup.error_bound;
        r.tail_bound = tail_bound(1, r.t, r.u0_sup, cfg.C0, fourth);
        const double p0_linear = p0_norm(evaluate_at(linear_solution(u0, eq), r.t)).value;
        r.lower_bound = r.p0_xi1_pipeline - p0_linear - r.tail_bound;
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    r.wall_ms = cfg.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count() : 0.0;
    return r;
}

}  // namespace detail

/**
 * Runs every scan point concurrently. `sink` receives records in parameter
 * order as soon as each prefix is complete; failures are recorded in the
 * record and the scan continues.
 */
inline std::vector<InflationRecord> run_inflation_scan(ScanConfig cfg,
                                                       const std::function<void(const InflationRecord&)>& sink = {}) {
    prepare_scan(cfg);
    std::vector<std::pair<std::int64_t, int>> points;
    if (cfg.experiment == "endpoint")
        for (int K : cfg.K_list) points.emplace_back(cfg.N_list.front(), K);
    else
        for (auto N : cfg.N_list) points.emplace_back(N, 0);
    std::vector<std::optional<InflationRecord>> slots(points.size());
    std::mutex m;
    std::size_t flushed = 0;
    parallel_for(points.size(), [&](std::size_t i) {
        auto rec = detail::run_point(cfg, points[i].first, points[i].second);
        std::lock_guard lock(m);
        slots[i] = std::move(rec);
        while (flushed < slots.size() && slots[flushed]) {
            if (sink) sink(*slots[flushed]);
            ++flushed;
        }
    });
    std::vector<InflationRecord> out;
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double stderr_slope = 0;  // NaN when undefined (two points)
    std::size_t points = 0;
    bool stderr_defined = false;
};

/// Least squares of log y on log x.
inline FitResult fit_scaling(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw UsageError("fit_scaling: x and y differ in length");
    if (x.size() < 2) throw UsageError("fit_scaling needs at least two points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw UsageError("fit_scaling: nonpositive value in a log-log fit");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0) throw UsageError("fit_scaling: all x values coincide");
    FitResult f;
    f.points = lx.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (lx.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double r = ly[i] - f.intercept - f.slope * lx[i];
            rss += r * r;
        }
        f.stderr_slope = std::sqrt(rss / (n - 2) / sxx);
        f.stderr_defined = true;
    } else {
        f.stderr_slope = std::numeric_limits<double>::quiet_NaN();
    }
    return f;
}

inline FitResult fit_scaling(const std::vector<InflationRecord>& records, const std::string& x_field = "N",
                             const std::string& y_field = "p0_xi1_pipeline") {
    std::vector<double> x, y;
    auto pick = [](const InflationRecord& r, const std::string& f) -> double {
        if (f == "N") return static_cast<double>(r.N);
        if (f == "K") return r.K;
        if (f == "t") return r.t;
        if (f == "norm_u0_Cs") return r.norm_u0_Cs;
        if (f == "p0_xi1_closed") return r.p0_xi1_closed;
        if (f == "p0_xi1_pipeline") return r.p0_xi1_pipeline;
        if (f == "lower_bound") return r.lower_bound;
        throw UsageError("unknown record field '" + f + "'");
    };
    for (const auto& r : records) {
        if (!r.ok()) continue;
        const double a = pick(r, x_field), b = pick(r, y_field);
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        x.push_back(a);
        y.push_back(b);
    }
    return fit_scaling(x, y);
}

struct HigherOrderRow {
    int j = 0;
    double l1 = 0;        // coefficient l1 norm of Xi_j(t)
    double majorant = 0;  // C0^j t^j ||u0||^{2j+1}, t^{j/2} for fourth order
    double ratio = 0;     // l1 / majorant
    bool pass = false;
};

/// Measured ||Xi_j(t)||_{l1} against the geometric majorant for j = 0..J_max.
inline std::vector<HigherOrderRow> higher_order_report(const TrigPolynomial& u0, const EquationSpec& eq, double t,
                                                       int J_max, double c0, int cap = kDefaultEnumerationCap) {
    if (J_max > cap) throw ResourceError("J_max " + std::to_string(J_max) + " exceeds cap " + std::to_string(cap));
    PicardExpansion expansion(u0, eq, cap);
    const auto sup = linf_norm(u0);
    const double u = sup.value + sup.error_bound;
    std::vector<HigherOrderRow> rows;
    for (int j = 0; j <= J_max; ++j) {
        HigherOrderRow r;
        r.j = j;
        r.l1 = evaluate_at(expansion.xi(j), t).coefficient_l1();
        r.majorant = generation_majorant(j, t, u, c0, eq.is_fourth_order());
        r.ratio = r.majorant > 0 ? r.l1 / r.majorant : kInfinity;
        r.pass = r.l1 <= r.majorant;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace inflatelab
