#include "oracles.hpp"
#include "qfb/qbessel.hpp"
#include "qfb/qcore.hpp"
#include "qfb/zeros.hpp"

#include <catch_amalgamated.hpp>

using qfb::mp_real;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double rel(const mp_real& a, const mp_real& b) { return qfb::to_double(qfb::relative_difference(a, b)); }

}  // namespace

TEST_CASE("context rejects q outside (0,1) and nu <= -1", "[qcore]") {
    CHECK_THROWS_AS(qfb::basic_context<double>(1.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qfb::basic_context<double>(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qfb::basic_context<double>(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(qfb::basic_context<double>(0.5, 1.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(qfb::basic_context<double>(0.5, -0.5));
}

TEST_CASE("finite q-Pochhammer: empty and single-factor products", "[qcore]") {
    CHECK(qfb::q_pochhammer(0.3, 0.5, 0L) == 1.0);
    CHECK(qfb::q_pochhammer(0.5, 0.5, 1L) == 0.5);
    CHECK_THAT(qfb::q_pochhammer(0.3, 0.5, 7L), WithinRel(oracle::pochhammer(0.3, 0.5, 7), 1e-15));
}

TEST_CASE("negative-length q-Pochhammer inverts the shifted product", "[qcore]") {
    const double q = 0.5, a = 0.3;
    for (long n = 1; n <= 10; ++n) {
        const double shifted = a * std::pow(q, -static_cast<double>(n));
        CHECK_THAT(qfb::q_pochhammer(a, q, -n) * qfb::q_pochhammer(shifted, q, n), WithinRel(1.0, 1e-13));
    }
    CHECK_THROWS_AS(qfb::q_pochhammer(0.25, 0.5, -2L), std::domain_error);
}

TEST_CASE("infinite q-Pochhammer agrees with a long partial product", "[qcore]") {
    const double tol = 1e-15;
    const double v = qfb::q_pochhammer(0.3, 0.5, qfb::infinite_length, tol);
    CHECK_THAT(v, WithinRel(oracle::pochhammer(0.3, 0.5, 200), 1e-14));
    qfb::working_precision wp(256);
    const mp_real q("0.5"), a("0.3");
    const mp_real m = qfb::q_pochhammer(a, q, qfb::infinite_length);
    CHECK(rel(m, oracle::pochhammer_inf(a, q)) < 1e-70);
}

TEST_CASE("q-Pochhammer splitting and symmetry identities", "[qcore]") {
    const double q = 0.7, a = 0.37;
    double worst_split = 0, worst_sym = 0;
    for (long m = 0; m <= 20; ++m)
        for (long k = 0; k <= 20; ++k) {
            const double aqm = a * std::pow(q, static_cast<double>(m));
            const double aqk = a * std::pow(q, static_cast<double>(k));
            const double lhs = qfb::q_pochhammer(a, q, m + k);
            const double rhs = qfb::q_pochhammer(a, q, m) * qfb::q_pochhammer(aqm, q, k);
            worst_split = std::max(worst_split, std::abs(lhs - rhs) / std::abs(lhs));
            const double s1 = qfb::q_pochhammer(aqm, q, k) / qfb::q_pochhammer(a, q, k);
            const double s2 = qfb::q_pochhammer(aqk, q, m) / qfb::q_pochhammer(a, q, m);
            worst_sym = std::max(worst_sym, std::abs(s1 - s2) / std::abs(s1));
        }
    CHECK(worst_split < 1e-13);
    CHECK(worst_sym < 1e-13);
}

TEST_CASE("Jackson integral of constants and powers", "[qcore]") {
    const double q = 0.5;
    auto one = qfb::sample(q, 200, [](double) { return 1.0; }, false);
    CHECK_THAT(qfb::q_integral(one, 1e-16), WithinRel(1.0, 1e-14));
    auto t = qfb::sample(q, 200, [](double x) { return x; }, false);
    CHECK_THAT(qfb::q_integral(t, 1e-16), WithinRel(1.0 / (1.0 + q), 1e-14));

    qfb::working_precision wp(256);
    const mp_real Q("0.3");
    for (int p = 0; p <= 5; ++p) {
        auto g = qfb::sample<mp_real>(Q, 200, [&](const mp_real& x) { return qfb::ipow(x, p); }, false);
        const mp_real exact = (1 - Q) / (1 - qfb::ipow(Q, p + 1));
        CHECK(rel(qfb::q_integral(g, mp_real(1e-60)), exact) < 1e-55);
        CHECK(rel(qfb::q_integral(g, mp_real(1e-60)),
                  oracle::jackson([&](const mp_real& x) { return qfb::ipow(x, p); }, Q, mp_real(1), 400)) < 1e-55);
    }
}

TEST_CASE("Jackson integral with a shorter upper limit q^m", "[qcore]") {
    const double q = 0.5;
    auto t = qfb::sample(q, 200, [](double x) { return x; }, false);
    // int_0^{q^2} t d_q t = q^4 / (1+q)
    CHECK_THAT(qfb::q_integral(t, 0.25, 1e-16), WithinRel(std::pow(q, 4) / (1 + q), 1e-14));
    CHECK_THROWS_AS(qfb::q_integral(t, 0.3, 1e-16), std::invalid_argument);
}

TEST_CASE("Jackson integral is linear and positive", "[qcore]") {
    const double q = 0.6;
    auto f = qfb::sample(q, 300, [](double x) { return std::exp(x) - 0.5; }, false);
    auto g = qfb::sample(q, 300, [](double x) { return x * x * std::cos(3 * x); }, false);
    const double a = 1.7, b = -0.4;
    auto h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = a * f.values[i] + b * g.values[i];
    const double tol = 1e-17;
    CHECK_THAT(qfb::q_integral(h, tol), WithinRel(a * qfb::q_integral(f, tol) + b * qfb::q_integral(g, tol), 1e-13));

    auto sq = qfb::sample(q, 300, [](double x) { return std::sin(5 * x) * std::sin(5 * x); }, false);
    CHECK(qfb::q_integral(sq, tol) >= 0);
}

TEST_CASE("unconverged tails use the power-law model or throw", "[qcore]") {
    const double q = 0.9;
    auto f = qfb::sample(q, 20, [](double x) { return x; }, false);
    CHECK_THROWS_AS(qfb::q_integral(f, 1e-15), qfb::convergence_error);
    f.tail_exponent = 1.0;
    CHECK_THAT(qfb::q_integral(f, 1e-15), WithinRel(1.0 / (1.0 + q), 1e-13));
}

TEST_CASE("grid functions reject non-finite samples and missing nodes", "[qcore]") {
    auto f = qfb::sample(0.5, 10, [](double x) { return x; }, false);
    CHECK_THROWS_AS(f.at(-1), std::out_of_range);
    CHECK_THROWS_AS(f.at(11), std::out_of_range);
    f.values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("symmetric q-derivative of elementary functions", "[qcore]") {
    const double q = 0.5;
    auto c = [](double) { return 3.25; };
    CHECK(qfb::symmetric_q_derivative(c, q, 0.7) == 0.0);
    auto lin = [](double x) { return x; };
    CHECK_THAT(qfb::symmetric_q_derivative(lin, q, 0.3), WithinRel(1.0, 1e-15));
    auto sq = [](double x) { return x * x; };
    const double x = 0.8;
    CHECK_THAT(qfb::symmetric_q_derivative(sq, q, x), WithinRel((std::sqrt(q) + 1 / std::sqrt(q)) * x, 1e-14));

    const double nu = 2, xq = std::pow(q, 3);
    auto pw = [&](double t) { return std::pow(t, nu); };
    const double expected = (std::pow(q, nu / 2) - std::pow(q, -nu / 2)) /
                            (std::sqrt(q) - 1 / std::sqrt(q)) * std::pow(xq, nu - 1);
    CHECK_THAT(qfb::symmetric_q_derivative(pw, q, xq), WithinRel(expected, 1e-14));

    CHECK_THROWS_AS(qfb::symmetric_q_derivative(lin, q, 0.0), std::invalid_argument);
    CHECK(qfb::symmetric_q_derivative(lin, q, 0.0, std::optional<double>(1.0)) == 1.0);
}

TEST_CASE("q-integration by parts for constants and linear functions", "[qcore]") {
    const double q = 0.5;
    auto one = [](double) { return 1.0; };
    auto t = [](double x) { return x; };
    for (bool upper : {true, false}) {
        CHECK(qfb::check_q_integration_by_parts(one, one, q, 0.0, 1.0, 1e-16, upper).residual == 0.0);
        CHECK(qfb::check_q_integration_by_parts(t, t, q, 0.0, 1.0, 1e-16, upper).residual < 1e-12);
        CHECK(qfb::check_q_integration_by_parts(t, t, q, 0.25, 1.0, 1e-16, upper).residual < 1e-12);
    }
}

TEST_CASE("q-integration by parts with a Bessel factor", "[qcore]") {
    qfb::working_precision wp(320);
    const qfb::context ctx(mp_real("0.5"), mp_real(2));
    const qfb::hahn_exton<mp_real> J(ctx);
    const mp_real j1 = qfb::find_zero(ctx, 1).value;
    auto f = [&](const mp_real& x) { return x * x; };
    auto g = [&](const mp_real& x) { return J.value(ctx.q * j1 * x).value; };
    for (bool upper : {true, false}) {
        const auto r = qfb::check_q_integration_by_parts<mp_real>(f, g, ctx.q, mp_real(0), mp_real(1),
                                                                 mp_real(1e-40), upper);
        CHECK(qfb::to_double(r.residual) < 1e-10 * std::max(1.0, std::abs(qfb::to_double(r.lhs))));
    }
}
