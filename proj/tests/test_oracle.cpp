#include <catch_amalgamated.hpp>

#include <cmath>

#include "inflatelab/experiments.hpp"
#include "inflatelab/oracle.hpp"

using namespace inflatelab;
using Catch::Matchers::WithinRel;

namespace {

TrigPolynomial cos1(double a, std::int64_t n) { return TrigPolynomial::cosine({n}, a); }

double state_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("mode set", "[oracle]") {
    GalerkinSystem sys(cos1(0.1, 3) + cos1(0.1, 6), make_equation("nlh"), 4);
    CHECK(sys.truncation() == 4);
    CHECK(sys.modes().size() == 9);  // multiples of 3 up to 12
    for (const auto& n : sys.modes()) CHECK(n[0] % 3 == 0);
    GalerkinSystem dflt(cos1(0.1, 2) + cos1(0.1, 4), make_equation("nlh"), 0, 6);
    CHECK(dflt.truncation() == 2 * 13 * 2);
    auto two_d = TrigPolynomial::cosine({1, 0}, 0.1) + TrigPolynomial::cosine({0, 1}, 0.1);
    GalerkinSystem sys2(two_d, make_equation("nlh", 2), 2);
    CHECK(sys2.modes().size() == 25);
    CHECK_THROWS_AS(GalerkinSystem(evaluate_at(linear_solution(cos1(0.1, 1), make_equation("nlh")), 0.0) +
                                       apply_semigroup(LinearMultiplier::heat(), cos1(0.1, 1)),
                                   make_equation("nlh"), 2),
                    UsageError);
}

TEST_CASE("zero data stays zero", "[oracle]") {
    for (double t : {0.0, 0.1, 1.0}) CHECK(integrate(TrigPolynomial(1), make_equation("nlh"), t).is_zero());
}

TEST_CASE("small cosine follows the heat flow", "[oracle]") {
    OracleOptions opt;
    opt.dt = 1e-4;
    const auto u = integrate(cos1(0.01, 1), make_equation("nlh"), 0.1, opt);
    const double expect = 0.005 * std::exp(-0.1);
    const double got = u.value_at({1}).real();
    CHECK(std::abs(got - expect) < 1e-6);
    CHECK(std::abs(got - expect) > 1e-8);  // the cubic correction is visible
    CHECK(got < expect);                   // defocusing damps
}

TEST_CASE("exponential Euler converges at first order", "[oracle]") {
    GalerkinSystem sys(cos1(0.8, 1) + cos1(0.4, 2), make_equation("nlh"), 20);
    const double t = 0.1;
    const auto a = sys.integrate_state(t, 100), b = sys.integrate_state(t, 200), c = sys.integrate_state(t, 400);
    const double d1 = state_distance(a, b), d2 = state_distance(b, c);
    CHECK(d2 > 0);
    CHECK_THAT(d1 / d2, WithinRel(2.0, 0.05));
    auto refined = integrate_refined(sys, t, 1e-10);
    CHECK(refined.converged);
    CHECK(refined.error_estimate < 1e-10);
}

TEST_CASE("linear evolution is exact", "[oracle]") {
    for (const auto& id : equation_ids()) {
        auto u0 = cos1(0.7, 1) + TrigPolynomial::sine({3}, 0.2);
        GalerkinSystem sys(u0, make_equation(id), 10);
        const auto u = sys.to_field(sys.integrate_state(0.3, 7, false));
        const auto exact = evaluate_at(linear_solution(u0, make_equation(id)), 0.3);
        CHECK(coefficient_distance(u, exact) <= 1e-15 * exact.coefficient_l1());
    }
}

TEST_CASE("Hermitian symmetry drift", "[oracle]") {
    GalerkinSystem sys(cos1(0.6, 1) + TrigPolynomial::sine({2}, 0.5), make_equation("ch-var2"), 30);
    const auto u = sys.integrate_state(0.05, 1000);
    CHECK(sys.hermitian_defect(u) < 1e-12);
    CHECK(sys.hermitian_defect(sys.initial_state()) == 0.0);
}

TEST_CASE("truncation insensitivity", "[oracle]") {
    NonEndpointParams p{2, -0.8, 0.0, 0.1, 1, 0.05};
    const auto u0 = make_data_nonendpoint(p);
    const double sup = linf_norm(u0).value;
    const double t = 0.1 / (sup * sup);
    OracleOptions a, b;
    a.dt = b.dt = t / 512;
    a.truncation = 24;
    b.truncation = 36;
    CHECK(coefficient_distance(integrate(u0, make_equation("nlh"), t, a), integrate(u0, make_equation("nlh"), t, b)) < 1e-10);
}

TEST_CASE("guards", "[oracle][errors]") {
    const auto big = cos1(30.0, 1);
    OracleOptions loose;
    loose.enforce_radius = false;
    loose.truncation = 8;
    loose.dt = 1e-3;
    CHECK_THROWS_AS(integrate(big, make_equation("nlh-focusing"), 1.0, loose), NumericalGuardError);
    CHECK_THROWS_AS(integrate(big, make_equation("nlh"), 1.0), ConfigError);
    CHECK_THROWS_AS(compare_with_series(big, make_equation("nlh"), 1.0, 2), ConfigError);
    CHECK_THROWS_AS(integrate(cos1(0.1, 1), make_equation("nlh"), -1.0), UsageError);
}

TEST_CASE("series comparison", "[oracle][compare]") {
    const auto eq = make_equation("nlh");
    SECTION("t = 0") {
        const auto r = compare_with_series(cos1(0.3, 1), eq, 0.0, 3);
        CHECK(r.deviation == 0.0);
        CHECK(r.pass);
    }
    SECTION("J = 0 sees the cubic correction") {
        const auto u0 = cos1(0.05, 1) + cos1(0.05, 2);
        const double t = 0.2;
        const auto r = compare_with_series(u0, eq, t, 1, {}, 1e-12);
        const double xi1 = max_term_coefficient(evaluate_at(PicardExpansion(u0, eq).xi(1), t));
        CHECK_THAT(r.deviations[0], WithinRel(xi1, 0.05));
        CHECK(r.deviations[1] < 6.75 * t * r.u0_sup * r.u0_sup * r.deviations[0]);
        CHECK(r.pass);
    }
    SECTION("N = 2 rescaled data, J = 6") {
        NonEndpointParams p{2, -0.8, 0.0, 0.1, 1, 0.05};
        const auto u0 = make_data_nonendpoint(p);
        const double sup = linf_norm(u0).value;
        const double t = 0.1 / (sup * sup);
        const auto r = compare_with_series(u0, eq, t, 6);
        CHECK(r.dt_converged);
        CHECK(r.deviation < 1e-6);
        CHECK(r.pass);
        CHECK(r.geometric_ratio < 1.0);
        for (std::size_t j = 1; j < r.deviations.size(); ++j)
            if (r.deviations[j - 1] > 10 * r.dt_error) CHECK(r.deviations[j] < r.deviations[j - 1]);
    }
    SECTION("fourth order") {
        const auto u0 = cos1(0.1, 1) + TrigPolynomial::sine({2}, 0.05);
        const auto r = compare_with_series(u0, make_equation("ch-var1"), 0.05, 4);
        CHECK(r.pass);
        CHECK(r.deviation < 1e-8);
    }
}
