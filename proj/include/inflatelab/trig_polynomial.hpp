#pragma once

#include <boost/container/small_vector.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "inflatelab/exp_polynomial.hpp"

namespace inflatelab {

/// Integer lattice point; the physical frequency is scale * components.
using Frequency = boost::container::small_vector<std::int64_t, 3>;

inline Frequency negate(const Frequency& n) {
    Frequency r(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] == INT64_MIN) throw ResourceError("frequency component out of 64-bit range");
        r[i] = -n[i];
    }
    return r;
}

inline Frequency add_frequencies(const Frequency& a, const Frequency& b) {
    Frequency r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (__builtin_add_overflow(a[i], b[i], &r[i])) throw ResourceError("frequency component out of 64-bit range");
    return r;
}

/// True for the representative of the pair {n, -n}: zero, or first nonzero component positive.
inline bool is_canonical_half(const Frequency& n) {
    for (auto c : n) {
        if (c > 0) return true;
        if (c < 0) return false;
    }
    return true;
}

inline bool is_zero_frequency(const Frequency& n) {
    for (auto c : n)
        if (c != 0) return false;
    return true;
}

/// Sum of squared components, exact.
inline Rational lattice_norm2(const Frequency& n) {
    Rational s(0);
    for (auto c : n) s += Rational(c) * Rational(c);
    return s;
}

/// Spatial operator applied to a single factor of a nonlinearity.
struct Operator {
    enum class Kind { identity, laplacian, bilaplacian, partial };
    Kind kind = Kind::identity;
    int axis = 0;

    static Operator identity() { return {Kind::identity, 0}; }
    static Operator laplacian() { return {Kind::laplacian, 0}; }
    static Operator bilaplacian() { return {Kind::bilaplacian, 0}; }
    static Operator partial(int k) { return {Kind::partial, k}; }

    bool operator==(const Operator&) const = default;
};

/// Per-mode decay rate mu(xi) = constant + quadratic |xi|^2 + quartic |xi|^4.
struct LinearMultiplier {
    Rational constant{0};
    Rational quadratic{0};
    Rational quartic{0};

    static LinearMultiplier heat() { return {Rational(0), Rational(1), Rational(0)}; }
    /// Linear part of Allen-Cahn, u_t = Delta u + u.
    static LinearMultiplier allen_cahn() { return {Rational(-1), Rational(1), Rational(0)}; }
    static LinearMultiplier bilaplacian() { return {Rational(0), Rational(0), Rational(1)}; }
    static LinearMultiplier zero() { return {}; }

    Rational at(const Rational& xi2) const {
        Rational r = constant;
        if (!quadratic.is_zero()) r += quadratic * xi2;
        if (!quartic.is_zero()) r += quartic * xi2 * xi2;
        return r;
    }
    bool is_zero() const { return constant.is_zero() && quadratic.is_zero() && quartic.is_zero(); }
    bool is_fourth_order() const { return !quartic.is_zero(); }

    bool operator==(const LinearMultiplier&) const = default;
};

/**
 * Real trigonometric polynomial with exponential-polynomial coefficients.
 *
 * Stored in the complex exponential basis: the coefficient of e^{i xi(n).x}
 * for xi(n) = scale * n. Every stored mode n has its partner -n carrying the
 * complex-conjugate coefficient, so all samples are real. A field is
 * "static" when every coefficient is time-independent.
 */
class TrigPolynomial {
public:
    using ModeMap = std::map<Frequency, ExpPolynomial>;

    explicit TrigPolynomial(int dimension, Rational scale = Rational(1)) : dim_(dimension), scale_(std::move(scale)) {
        if (dim_ < 1) throw StructuralError("dimension must be at least 1");
        if (scale_.sign() <= 0) throw StructuralError("global scale must be positive");
    }

    /// Builds from arbitrary modes, averaging each pair so that Hermitian symmetry holds exactly.
    static TrigPolynomial from_modes(int dimension, Rational scale, const ModeMap& modes) {
        TrigPolynomial f(dimension, std::move(scale));
        for (const auto& [n, e] : modes) {
            if (static_cast<int>(n.size()) != dimension) throw StructuralError("mode has wrong dimension");
            if (!is_canonical_half(n)) {
                if (modes.count(negate(n)) == 0) f.set_pair(negate(n), e.conj().scaled(0.5));
                continue;
            }
            auto it = modes.find(negate(n));
            ExpPolynomial partner = it == modes.end() ? ExpPolynomial{} : it->second.conj();
            if (is_zero_frequency(n))
                f.set_pair(n, (e + e.conj()).scaled(0.5));
            else
                f.set_pair(n, (e + partner).scaled(0.5));
        }
        return f;
    }

    static TrigPolynomial constant(int dimension, double value, Rational scale = Rational(1)) {
        TrigPolynomial f(dimension, std::move(scale));
        f.set_pair(Frequency(static_cast<std::size_t>(dimension), 0), ExpPolynomial(Complex(value)));
        return f;
    }

    /// amplitude * cos(xi(n) . x)
    static TrigPolynomial cosine(const Frequency& n, double amplitude, Rational scale = Rational(1)) {
        TrigPolynomial f(static_cast<int>(n.size()), std::move(scale));
        if (is_zero_frequency(n)) {
            f.set_pair(n, ExpPolynomial(Complex(amplitude)));
        } else {
            f.set_pair(is_canonical_half(n) ? n : negate(n), ExpPolynomial(Complex(amplitude / 2)));
        }
        return f;
    }

    /// amplitude * sin(xi(n) . x)
    static TrigPolynomial sine(const Frequency& n, double amplitude, Rational scale = Rational(1)) {
        TrigPolynomial f(static_cast<int>(n.size()), std::move(scale));
        if (is_zero_frequency(n)) return f;
        // sin = (e^{i} - e^{-i}) / 2i
        Complex c(0.0, -amplitude / 2);
        if (is_canonical_half(n))
            f.set_pair(n, ExpPolynomial(c));
        else
            f.set_pair(negate(n), ExpPolynomial(std::conj(c)));
        return f;
    }

    int dimension() const noexcept { return dim_; }
    const Rational& scale() const noexcept { return scale_; }
    const ModeMap& modes() const noexcept { return modes_; }
    std::size_t support_size() const noexcept { return modes_.size(); }
    bool is_zero() const noexcept { return modes_.empty(); }

    bool is_static() const {
        for (const auto& [n, e] : modes_)
            if (!e.is_constant()) return false;
        return true;
    }

    const ExpPolynomial& coefficient(const Frequency& n) const {
        static const ExpPolynomial zero;
        auto it = modes_.find(n);
        return it == modes_.end() ? zero : it->second;
    }

    /// Constant coefficient of a static field (0 if absent).
    Complex value_at(const Frequency& n) const { return coefficient(n).constant_value(); }

    /// |xi(n)|^2 = scale^2 * sum n_k^2, exact.
    Rational squared_magnitude(const Frequency& n) const { return scale_ * scale_ * lattice_norm2(n); }

    std::size_t term_count() const {
        std::size_t c = 0;
        for (const auto& [n, e] : modes_) c += e.size();
        return c;
    }

    /// Sum over modes of |coefficient| (static fields); an upper bound for the sup norm.
    double coefficient_l1() const {
        double s = 0;
        for (const auto& [n, e] : modes_) s += std::abs(e.constant_value());
        return s;
    }

    /// Largest |coefficient| (static fields).
    double coefficient_sup() const {
        double s = 0;
        for (const auto& [n, e] : modes_) s = std::max(s, std::abs(e.constant_value()));
        return s;
    }

    void check_compatible(const TrigPolynomial& other) const {
        if (dim_ != other.dim_) throw StructuralError("dimension mismatch between fields");
        if (scale_ != other.scale_) throw StructuralError("global scale mismatch between fields");
    }

    /// Applies `fn` to the canonical half and mirrors conjugates; keeps symmetry exact.
    template <class Fn>
    TrigPolynomial map_modes(Fn&& fn) const {
        TrigPolynomial out(dim_, scale_);
        for (const auto& [n, e] : modes_) {
            if (!is_canonical_half(n)) continue;
            out.set_pair(n, fn(n, e));
        }
        return out;
    }

    bool operator==(const TrigPolynomial&) const = default;

private:
    friend TrigPolynomial multiply(const TrigPolynomial&, const TrigPolynomial&);
    friend TrigPolynomial operator+(const TrigPolynomial&, const TrigPolynomial&);

    // Stores e at n and its conjugate at -n; n must be the canonical representative.
    void set_pair(const Frequency& n, ExpPolynomial e) {
        if (e.empty()) return;
        if (is_zero_frequency(n)) {
            // the zero mode is real; drop rounding-level imaginary parts
            std::vector<ExpTerm> terms = e.terms();
            for (auto& t : terms) t.coeff = Complex(t.coeff.real(), 0.0);
            e = ExpPolynomial::from_terms(std::move(terms));
            if (!e.empty()) modes_[n] = std::move(e);
            return;
        }
        modes_[negate(n)] = e.conj();
        modes_[n] = std::move(e);
    }

    int dim_;
    Rational scale_;
    ModeMap modes_;
};

inline TrigPolynomial operator+(const TrigPolynomial& a, const TrigPolynomial& b) {
    a.check_compatible(b);
    TrigPolynomial out = a;
    for (const auto& [n, e] : b.modes()) {
        if (!is_canonical_half(n)) continue;
        out.modes_.erase(negate(n));
        auto it = a.modes().find(n);
        ExpPolynomial sum = it == a.modes().end() ? e : it->second + e;
        out.modes_.erase(n);
        out.set_pair(n, std::move(sum));
    }
    return out;
}

inline TrigPolynomial scaled(const TrigPolynomial& f, double factor) {
    return f.map_modes([&](const Frequency&, const ExpPolynomial& e) { return e.scaled(factor); });
}

inline TrigPolynomial operator-(const TrigPolynomial& a, const TrigPolynomial& b) { return a + scaled(b, -1.0); }

inline TrigPolynomial add(const TrigPolynomial& a, const TrigPolynomial& b) { return a + b; }

/// Exact product: convolution of supports, termwise product of time profiles.
inline TrigPolynomial multiply(const TrigPolynomial& a, const TrigPolynomial& b) {
    a.check_compatible(b);
    std::map<Frequency, std::vector<ExpTerm>> acc;
    for (const auto& [na, ea] : a.modes()) {
        for (const auto& [nb, eb] : b.modes()) {
            Frequency k = add_frequencies(na, nb);
            if (!is_canonical_half(k)) continue;
            ExpPolynomial::multiply_into(ea, eb, acc[k]);
        }
    }
    TrigPolynomial out(a.dimension(), a.scale());
    for (auto& [k, terms] : acc) out.set_pair(k, ExpPolynomial::from_terms(std::move(terms)));
    return out;
}

inline TrigPolynomial operator*(const TrigPolynomial& a, const TrigPolynomial& b) { return multiply(a, b); }

inline TrigPolynomial apply_operator(const Operator& op, const TrigPolynomial& f) {
    switch (op.kind) {
        case Operator::Kind::identity:
            return f;
        case Operator::Kind::laplacian:
            return f.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
                return e.scaled(-f.squared_magnitude(n).to_double());
            });
        case Operator::Kind::bilaplacian:
            return f.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
                double x = f.squared_magnitude(n).to_double();
                return e.scaled(x * x);
            });
        case Operator::Kind::partial:
            if (op.axis < 0 || op.axis >= f.dimension())
                throw StructuralError("partial derivative axis " + std::to_string(op.axis) + " out of range");
            return f.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
                double xi = (f.scale() * Rational(n[static_cast<std::size_t>(op.axis)])).to_double();
                return e.scaled(Complex(0.0, xi));
            });
    }
    throw StructuralError("unknown operator");
}

/// Multiplies every mode by exp(-mu(xi) t).
inline TrigPolynomial apply_semigroup(const LinearMultiplier& mult, const TrigPolynomial& f) {
    if (mult.is_zero()) return f;
    return f.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
        return e.shifted(mult.at(f.squared_magnitude(n)));
    });
}

/// sign * \int_0^t exp(-(t - s) mu(xi)) f(s) ds, mode by mode.
inline TrigPolynomial duhamel(const LinearMultiplier& mult, const TrigPolynomial& integrand, int sign = 1) {
    return integrand.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
        return e.duhamel(mult.at(integrand.squared_magnitude(n)), sign);
    });
}

/// d/dt applied coefficientwise.
inline TrigPolynomial time_derivative(const TrigPolynomial& f) {
    return f.map_modes([](const Frequency&, const ExpPolynomial& e) { return e.derivative(); });
}

/// Collapses the time dependence at t; result is static.
inline TrigPolynomial evaluate_at(const TrigPolynomial& f, double t) {
    if (t < 0) throw UsageError("evaluate_at requires t >= 0");
    return f.map_modes([&](const Frequency& n, const ExpPolynomial& e) {
        Complex v = e.evaluate(t);
        if (is_zero_frequency(n)) v = Complex(v.real(), 0.0);
        return ExpPolynomial(v);
    });
}

/// Sum_n c_n e^{i xi(n).x} without pairing; the imaginary part measures symmetry defects.
inline Complex sample_complex(const TrigPolynomial& f, std::span<const double> x) {
    if (static_cast<int>(x.size()) != f.dimension()) throw StructuralError("sample point has wrong dimension");
    if (!f.is_static()) throw UsageError("sample requires a static field");
    const double scale = f.scale().to_double();
    Complex s{};
    for (const auto& [n, e] : f.modes()) {
        double phase = 0;
        for (std::size_t k = 0; k < n.size(); ++k) phase += static_cast<double>(n[k]) * x[k];
        s += e.constant_value() * std::polar(1.0, scale * phase);
    }
    return s;
}

/// Real value of a static field at x (pairs n, -n are combined).
inline double sample(const TrigPolynomial& f, std::span<const double> x) {
    if (static_cast<int>(x.size()) != f.dimension()) throw StructuralError("sample point has wrong dimension");
    if (!f.is_static()) throw UsageError("sample requires a static field");
    const double scale = f.scale().to_double();
    double s = 0;
    for (const auto& [n, e] : f.modes()) {
        if (!is_canonical_half(n)) continue;
        Complex c = e.constant_value();
        if (is_zero_frequency(n)) {
            s += c.real();
            continue;
        }
        double phase = 0;
        for (std::size_t k = 0; k < n.size(); ++k) phase += static_cast<double>(n[k]) * x[k];
        phase *= scale;
        s += 2.0 * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
    }
    return s;
}

inline double sample(const TrigPolynomial& f, std::initializer_list<double> x) {
    return sample(f, std::span<const double>(x.begin(), x.size()));
}

/// max_n |a_n - b_n| for static fields.
inline double coefficient_distance(const TrigPolynomial& a, const TrigPolynomial& b) {
    return (a - b).coefficient_sup();
}

/// Largest |coeff| of any exponential term, across all modes.
inline double max_term_coefficient(const TrigPolynomial& f) {
    double m = 0;
    for (const auto& [n, e] : f.modes()) m = std::max(m, e.max_abs_coeff());
    return m;
}

// ---------------------------------------------------------------------------
// Canonical text form
//
//   # inflatelab-field dim=<d> scale=<p>/<q>
//   n_1 ... n_d  re im  [m num/den re im]*
//
// One line per stored mode, modes in lexicographic order of components. The
// leading "re im" is the time-independent part; each bracketed group is one
// further term coeff * t^m * exp(-(num/den) t).
// ---------------------------------------------------------------------------

namespace detail {
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
    return buf;
}
}  // namespace detail

inline void write_field(std::ostream& os, const TrigPolynomial& f) {
    os << "# inflatelab-field dim=" << f.dimension() << " scale=" << f.scale().str() << "\n";
    for (const auto& [n, e] : f.modes()) {
        for (std::size_t k = 0; k < n.size(); ++k) os << (k ? " " : "") << n[k];
        Complex c0{};
        for (const auto& term : e.terms())
            if (term.power == 0 && term.rate.is_zero()) c0 = term.coeff;
        os << "  " << detail::fmt_double(c0.real()) << " " << detail::fmt_double(c0.imag());
        for (const auto& term : e.terms()) {
            if (term.power == 0 && term.rate.is_zero()) continue;
            os << "  " << term.power << " " << term.rate.str() << " " << detail::fmt_double(term.coeff.real()) << " "
               << detail::fmt_double(term.coeff.imag());
        }
        os << "\n";
    }
}

inline std::string serialize_field(const TrigPolynomial& f) {
    std::ostringstream os;
    write_field(os, f);
    return os.str();
}

inline TrigPolynomial read_field(std::istream& is) {
    std::string line;
    int dim = -1;
    Rational scale(1);
    TrigPolynomial::ModeMap modes;
    std::size_t offset = 0;
    while (std::getline(is, line)) {
        std::size_t line_offset = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto d = line.find("dim=");
            auto s = line.find("scale=");
            if (d != std::string::npos) dim = std::stoi(line.substr(d + 4));
            if (s != std::string::npos) {
                auto end = line.find(' ', s);
                scale = Rational::parse(line.substr(s + 6, end == std::string::npos ? std::string::npos : end - s - 6));
            }
            continue;
        }
        if (dim < 1) throw ParseError("field text is missing its '# inflatelab-field dim=' header", line_offset);
        std::istringstream ls(line);
        Frequency n(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k)
            if (!(ls >> n[static_cast<std::size_t>(k)])) throw ParseError("bad frequency component", line_offset);
        double re = 0, im = 0;
        if (!(ls >> re >> im)) throw ParseError("missing constant coefficient", line_offset);
        std::vector<ExpTerm> terms;
        terms.push_back({Complex(re, im), 0, Rational(0)});
        int m;
        while (ls >> m) {
            std::string rate;
            if (!(ls >> rate >> re >> im)) throw ParseError("incomplete exponential term", line_offset);
            if (m < 0) throw ParseError("negative power", line_offset);
            terms.push_back({Complex(re, im), m, Rational::parse(rate)});
        }
        if (!ls.eof()) throw ParseError("trailing garbage in mode line", line_offset);
        modes[n] = ExpPolynomial::from_terms(std::move(terms), 0.0);
    }
    if (dim < 1) throw ParseError("empty field text", 0);
    return TrigPolynomial::from_modes(dim, scale, modes);
}

inline TrigPolynomial parse_field(const std::string& text) {
    std::istringstream is(text);
    return read_field(is);
}

}  // namespace inflatelab
