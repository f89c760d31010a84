#include "oracles.hpp"
#include "qfb/qpoly.hpp"
#include "qfb/zeros.hpp"

#include <catch_amalgamated.hpp>

using qfb::mp_real;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("P_0 and P_1", "[qpoly]") {
    const qfb::basic_context<double> ctx(0.5, 1.5);
    const auto p0 = qfb::poly_p_by_recurrence(ctx, 0);
    REQUIRE(p0.coeffs.size() == 1);
    CHECK(p0.coeffs[0] == 1.0);
    const auto p1 = qfb::poly_p_by_recurrence(ctx, 1);
    REQUIRE(p1.coeffs.size() == 2);
    CHECK_THAT(p1.coeffs[0], WithinRel(std::pow(0.5, 1.5) + std::pow(0.5, -1.5), 1e-15));
    CHECK_THAT(p1.coeffs[1], WithinRel(-std::pow(0.5, -1.5 + 2), 1e-15));
}

TEST_CASE("P_4 agrees across constructions", "[qpoly]") {
    const qfb::basic_context<double> ctx(0.5, 1.0);
    const auto a = qfb::poly_p_by_recurrence(ctx, 4);
    const auto b = qfb::poly_p_explicit(ctx, 4, qfb::explicit_form::first);
    for (int j = 0; j <= 4; ++j) CHECK_THAT(a.coeffs[j], WithinRel(b.coeffs[j], 1e-14));
}

TEST_CASE("three constructions agree over a parameter grid", "[qpoly][property]") {
    double worst = 0, worst_boundary = 0;
    for (double q : {0.3, 0.5, 0.8})
        for (double nu : {0.5, 1.0, 2.5}) {
            const qfb::basic_context<double> ctx(q, nu);
            for (int n = 0; n <= 12; ++n) {
                const auto r = qfb::poly_p_by_recurrence(ctx, n);
                const auto c = qfb::poly_p_by_convolution(ctx, n);
                const auto e1 = qfb::poly_p_explicit(ctx, n, qfb::explicit_form::first);
                const auto e2 = qfb::poly_p_explicit(ctx, n, qfb::explicit_form::second);
                for (int j = 0; j <= n; ++j) {
                    auto rd = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
                    worst = std::max({worst, rd(r.coeffs[j], c.coeffs[j]), rd(r.coeffs[j], e1.coeffs[j]),
                                      rd(c.coeffs[j], e1.coeffs[j]), rd(e1.coeffs[j], e2.coeffs[j])});
                }
                const double lead = std::pow(-1.0, n) * std::pow(q, n * (n + 1 - nu));
                worst_boundary = std::max(worst_boundary, std::abs(r.coeffs[n] - lead) / std::abs(lead));
                CHECK_THAT(qfb::poly_leading(q, nu, n), WithinRel(lead, 1e-13));
                double a0 = 0;
                for (int i = 0; i <= n; ++i) a0 += std::pow(q, 2 * nu * i);
                a0 *= std::pow(q, -n * nu);
                worst_boundary = std::max(worst_boundary, std::abs(r.coeffs[0] - a0) / a0);
            }
        }
    CHECK(worst < 1e-12);
    CHECK(worst_boundary < 1e-13);
}

TEST_CASE("coefficient a_j has sign (-1)^j", "[qpoly][property]") {
    for (double q : {0.3, 0.5, 0.8})
        for (double nu : {0.5, 1.0, 2.5}) {
            const qfb::basic_context<double> ctx(q, nu);
            for (int n = 0; n <= 12; ++n) {
                const auto p = qfb::poly_p_explicit(ctx, n, qfb::explicit_form::first);
                for (int j = 0; j <= n; ++j) CHECK(((j % 2 == 0) ? p.coeffs[j] > 0 : p.coeffs[j] < 0));
            }
        }
}

TEST_CASE("Horner evaluation reports its absolute sum", "[qpoly]") {
    const std::vector<double> c{1.0, -3.0, 2.0};  // (1-x)(1-2x)
    const auto h = qfb::horner(c, 0.5);
    CHECK(h.value == 0.0);
    CHECK(h.abs_sum == Catch::Approx(1.0 + 1.5 + 0.5));
    CHECK(qfb::horner(c, 2.0).value == 3.0);
}

TEST_CASE("factorization at zeros", "[qpoly]") {
    qfb::working_precision wp(qfb::required_precision_bits(0.5, 1, 6));
    const qfb::context ctx(mp_real("0.5"), mp_real(1));
    const qfb::hahn_exton<mp_real> J(ctx);
    const auto zs = qfb::find_zeros(ctx, 5);
    for (int k = 1; k <= 5; ++k) {
        CHECK(qfb::check_factorization(J, zs[k - 1], 0).residual == 0);
        for (int n = 0; n <= 6; ++n) {
            INFO("k=" << k << " n=" << n);
            CHECK(qfb::check_factorization(J, zs[k - 1], n).ok());
        }
    }
    const auto f32 = qfb::check_factorization(J, zs[1], 3);
    CHECK(qfb::to_double(f32.residual / f32.scale) < 1e-9);
    CHECK(qfb::check_factorization(J, zs[3], 6).ok());
}

TEST_CASE("factorization against the series oracle", "[qpoly]") {
    qfb::working_precision wp(400);
    const qfb::context ctx(mp_real("0.5"), mp_real(1));
    const mp_real j = qfb::find_zero(ctx, 3).value;
    for (int n = 1; n <= 5; ++n) {
        const auto p = qfb::poly_p_by_recurrence(ctx, n);
        const mp_real lhs = oracle::bessel(ctx.q, ctx.nu, qfb::ipow(ctx.q, n + 1) * j);
        const mp_real rhs = oracle::bessel(ctx.q, ctx.nu, ctx.q * j) * qfb::horner(p.coeffs, mp_real(j * j)).value;
        CHECK(qfb::to_double(abs(lhs - rhs) / abs(rhs)) < 1e-30);
    }
}

TEST_CASE("finite-sum identities at documented points", "[qpoly]") {
    for (int j = 0; j <= 8; ++j) {
        const auto s = qfb::finite_sum_identity(0.5, 1, j);
        CHECK_THAT(s.lhs, WithinRel((1 - std::pow(0.5, 1 + j)) / 0.5, 1e-15));
        CHECK(s.relative() < 1e-15);
    }
    const auto l = qfb::lambda_identity(0.5, 2, 3, 0);
    CHECK(l.relative() < 1e-15);
    CHECK(qfb::finit_sum_identity(0.5, 3, 2, 2).relative() < 1e-13);
}

TEST_CASE("identity suite with seeded gamma sequences", "[qpoly][property]") {
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    for (double q : {0.3, 0.5, 0.8}) {
        const auto rep = qfb::check_finite_sum_identities(q, 1.0, 12, seeds);
        INFO("q=" << q);
        CHECK(rep.finite_sum < 1e-12);
        CHECK(rep.lambda < 1e-12);
        CHECK(rep.finit_sum < 1e-12);
        CHECK(rep.product_coefficients < 1e-12);
        CHECK(rep.convolution < 1e-12);
    }
}

TEST_CASE("a_0 convolution identity", "[qpoly]") {
    for (int m = 0; m <= 12; ++m)
        for (int l = 0; l <= m; ++l) CHECK(qfb::a0_convolution_identity(0.5, 2.5, l, m).relative() < 1e-13);
}

TEST_CASE("seeded gamma sequences are fixed and in range", "[qpoly]") {
    const auto a = qfb::seeded_gamma<double>(7, 20);
    const auto b = qfb::seeded_gamma<double>(7, 20);
    CHECK(a == b);
    for (double g : a) CHECK((g >= -1 && g <= 1));
    CHECK(qfb::seeded_gamma<double>(8, 20) != a);
}

TEST_CASE("grid values of the basis stay bounded", "[qpoly][property]") {
    qfb::working_precision wp(qfb::required_precision_bits(0.5, 1, 15));
    const qfb::context ctx(mp_real("0.5"), mp_real(1));
    const qfb::hahn_exton<mp_real> J(ctx);
    const auto zs = qfb::find_zeros(ctx, 15);
    auto sup = [&](int K, int N) {
        mp_real m(0);
        for (int k = 1; k <= K; ++k)
            for (int n = 0; n <= N; ++n) m = std::max(m, mp_real(abs(J(qfb::ipow(ctx.q, n + 1) * zs[k - 1].value))));
        return qfb::to_double(m);
    };
    const double s1 = sup(10, 20), s2 = sup(15, 40);
    CHECK(std::isfinite(s2));
    CHECK(s2 <= 1.01 * s1);
}
