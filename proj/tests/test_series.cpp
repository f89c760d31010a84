#include "oracles.hpp"
#include "qfb/expansions.hpp"
#include "qfb/series.hpp"

#include <catch_amalgamated.hpp>

using qfb::mp_real;
using system_t = qfb::fourier_bessel_system<mp_real>;

namespace {

double rel(const mp_real& a, const mp_real& b) { return qfb::to_double(qfb::relative_difference(a, b)); }

/// One process-wide precision, sized for the largest system below.
void use_shared_precision() {
    static qfb::working_precision wp(qfb::required_precision_bits(0.5, 2, 40));
}

system_t build(const char* q, const char* nu, int K) {
    use_shared_precision();
    return qfb::make_system(qfb::context(mp_real(q), mp_real(nu)), K);
}

const system_t& example_system() {
    static const system_t S = build("0.5", "2", 40);
    return S;
}

const system_t& unit_order_system() {
    static const system_t S = build("0.5", "1", 12);
    return S;
}

qfb::grid_function<mp_real> power_grid(const system_t& S) {
    return qfb::closed_form_expansion<mp_real>::power(S.ctx().nu).grid(S.ctx(), S.ctx().depth);
}

}  // namespace

TEST_CASE("build the shared systems", "[series]") {
    REQUIRE(example_system().size() == 40);
    REQUIRE(unit_order_system().size() == 12);
}

TEST_CASE("norms: three forms agree and are positive", "[series]") {
    const auto& S = unit_order_system();
    const auto e1 = qfb::eta_all_forms(S, 1);
    CHECK(rel(e1.closed_form, e1.integral) < 1e-9);
    CHECK(rel(e1.closed_form, e1.middle_form) < 1e-9);
    for (int k = 1; k <= 10; ++k) {
        CHECK(S.eta(k) > 0);
        CHECK(rel(qfb::eta_norm(S, k), qfb::eta_all_forms(S, k).integral) < 1e-9);
    }
}

TEST_CASE("orthogonality of the basis", "[series]") {
    const auto& S = unit_order_system();
    for (int n = 1; n <= 10; ++n)
        for (int m = 1; m <= 10; ++m) {
            const mp_real v = qfb::orthogonality_integral(S, n, m);
            INFO("n=" << n << " m=" << m);
            if (n == m)
                CHECK(rel(v, S.eta(n)) < 1e-9);
            else
                CHECK(abs(v) < mp_real("1e-10") * sqrt(S.eta(n) * S.eta(m)));
        }
}

TEST_CASE("coefficients of the zero function vanish", "[series]") {
    const auto& S = unit_order_system();
    auto zero = qfb::sample<mp_real>(S.ctx().q, S.ctx().depth, [](const mp_real&) { return mp_real(0); }, true);
    zero.limit_value = mp_real(0);
    for (int k = 1; k <= 5; ++k) CHECK(qfb::compute_coefficient(S, zero, k).value == 0);
}

TEST_CASE("coefficients of x^nu match the closed form", "[series]") {
    const auto& S = example_system();
    const auto f = power_grid(S);
    for (int k = 1; k <= 10; ++k) {
        INFO("k=" << k);
        CHECK(rel(qfb::compute_coefficient(S, f, k).value, qfb::example1_coefficient(S, k)) < 1e-9);
    }
}

TEST_CASE("coefficients are linear in f", "[series][property]") {
    const auto& S = unit_order_system();
    const auto& q = S.ctx().q;
    auto f = qfb::sample<mp_real>(q, S.ctx().depth, [](const mp_real& x) { return x * exp(x); }, true);
    auto g = qfb::sample<mp_real>(q, S.ctx().depth, [](const mp_real& x) { return x * x * x / (1 + x); }, true);
    f.tail_exponent = mp_real(1);
    g.tail_exponent = mp_real(3);
    const mp_real a("1.25"), b("-0.75");
    auto h = f;
    for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = a * f.values[i] + b * g.values[i];
    *h.pre_value = a * *f.pre_value + b * *g.pre_value;
    for (int k = 1; k <= 8; ++k) {
        const mp_real lhs = qfb::compute_coefficient(S, h, k).value;
        const mp_real rhs = a * qfb::compute_coefficient(S, f, k).value + b * qfb::compute_coefficient(S, g, k).value;
        CHECK(qfb::to_double(abs(lhs - rhs)) < 1e-12 * std::max(1.0, qfb::to_double(abs(lhs))));
    }
}

TEST_CASE("partial sums: empty sum and node consistency", "[series]") {
    const auto& S = example_system();
    CHECK(qfb::partial_sum(S, {}, mp_real("0.3")) == 0);
    const auto f = power_grid(S);
    const auto a = qfb::compute_coefficients(S, f, 12);
    for (long n : {0L, 1L, 5L}) CHECK(rel(qfb::partial_sum(S, a, qfb::ipow(S.ctx().q, n)), qfb::partial_sum_at_node(S, a, n)) < 1e-40);
    CHECK_THROWS_AS(qfb::partial_sum(S, a, mp_real(3)), std::domain_error);
}

TEST_CASE("partial sums of x^nu at x = 1 approach 1", "[series]") {
    const auto& S = example_system();
    const auto a = qfb::compute_coefficients(S, power_grid(S), 30);
    mp_real prev(1e300);
    // Monotone until the error reaches the working floor.
    for (int K = 1; K <= 30; ++K) {
        std::vector<qfb::fourier_coefficient<mp_real>> head(a.begin(), a.begin() + K);
        const mp_real err = abs(qfb::partial_sum_at_node(S, head, 0) - 1);
        INFO("K=" << K);
        CHECK(err <= prev + mp_real("1e-30"));
        prev = err;
    }
    CHECK(prev < mp_real("1e-25"));
}

TEST_CASE("convergence report for x^nu", "[series]") {
    const auto& S = example_system();
    const auto rep = qfb::make_convergence_report(S, power_grid(S), 30, 20);
    CHECK(rep.hypotheses_hold());
    CHECK(rep.holder_order == Catch::Approx(2.0).margin(0.05));
    CHECK(rep.sup_errors_monotone);
    CHECK(rep.sup_errors.back() < mp_real("1e-8"));
    const double q = 0.5;
    CHECK(rep.term_rate <= q * 1.2);
    CHECK(rep.term_rate <= std::pow(q, 0.8));
    CHECK(rep.error_rate < 1.0);
    CHECK(rep.point_errors.size() == 21);
}

TEST_CASE("low Hoelder order is flagged but pointwise errors still shrink", "[series]") {
    const system_t S = build("0.5", "0.5", 20);
    const auto f = power_grid(S);
    const auto rep = qfb::make_convergence_report(S, f, 20, 10);
    CHECK_FALSE(rep.hypotheses_hold());
    CHECK(rep.holder_order == Catch::Approx(0.5).margin(0.05));
    const auto a = rep.coefficients;
    for (long n = 0; n <= 10; ++n) {
        std::vector<qfb::fourier_coefficient<mp_real>> head(a.begin(), a.begin() + 5);
        const mp_real e5 = abs(f.at(n) - qfb::partial_sum_at_node(S, head, n));
        const mp_real e20 = abs(f.at(n) - qfb::partial_sum_at_node(S, a, n));
        INFO("n=" << n);
        CHECK(e20 <= e5);
    }
}

TEST_CASE("pointwise convergence for a function without a closed form", "[series][property]") {
    const auto& S = example_system();
    auto f = qfb::sample<mp_real>(S.ctx().q, S.ctx().depth, [](const mp_real& x) { return x * x * x / (1 + x); }, true);
    f.tail_exponent = mp_real(3);
    f.limit_value = mp_real(0);
    const auto a = qfb::compute_coefficients(S, f, 40);
    for (long n = 0; n <= 20; ++n) {
        mp_real prev(1e300);
        for (int K : {10, 20, 30, 40}) {
            std::vector<qfb::fourier_coefficient<mp_real>> head(a.begin(), a.begin() + K);
            const mp_real e = abs(f.at(n) - qfb::partial_sum_at_node(S, head, n));
            INFO("n=" << n << " K=" << K);
            CHECK(e <= prev + mp_real("1e-30"));
            prev = e;
        }
        CHECK(prev < mp_real("1e-20"));
    }
}

TEST_CASE("coefficient-integral identity", "[series]") {
    const auto& S = example_system();
    const auto f = power_grid(S);
    CHECK(qfb::to_double(qfb::check_coefficient_integral_identity(S, f, 1).relative()) < 1e-10);
    CHECK(qfb::to_double(qfb::check_coefficient_integral_identity(S, f, 4).relative()) < 1e-9);
    // For x^nu the bracket vanishes and only the boundary term remains.
    const auto r = qfb::check_coefficient_integral_identity(S, f, 2);
    CHECK(qfb::to_double(abs(r.bracket)) < 1e-30);

    auto c = f;
    std::fill(c.values.begin(), c.values.end(), mp_real(3));
    c.pre_value = mp_real(3);
    c.limit_value = mp_real(3);
    c.tail_exponent = mp_real(0);
    for (int k : {1, 3}) {
        const auto rc = qfb::check_coefficient_integral_identity(S, c, k);
        INFO("k=" << k);
        CHECK(qfb::to_double(rc.relative()) < 1e-12);
        CHECK(abs(rc.bracket) > 0);
        CHECK(rel(rc.bracket_factor, pow(S.ctx().q, S.ctx().nu - 2) / (S.zero(k).value * S.zero(k).value)) < 1e-40);
    }
}

TEST_CASE("Parseval defect at K = 40", "[series]") {
    const auto& S = example_system();
    const auto f = power_grid(S);
    const mp_real d = qfb::parseval_defect(S, f, qfb::compute_coefficients(S, f, 40));
    CHECK(qfb::to_double(abs(d)) < 1e-8);
    const mp_real d5 = qfb::parseval_defect(S, f, qfb::compute_coefficients(S, f, 5));
    CHECK(d5 > abs(d));
}

TEST_CASE("coefficients survive a round trip through S_40", "[series]") {
    const auto& S = example_system();
    const auto a = qfb::compute_coefficients(S, power_grid(S), 40);
    const auto b = qfb::roundtrip_coefficients(S, a, 20);
    for (int k = 1; k <= 20; ++k) {
        INFO("k=" << k);
        CHECK(rel(a[k - 1].value, b[k - 1].value) < 1e-9);
    }
}

TEST_CASE("systems reject misnumbered zeros and oversize requests", "[series]") {
    const auto& S = unit_order_system();
    auto zs = S.zeros();
    std::swap(zs[0], zs[1]);
    CHECK_THROWS_AS(system_t(S.ctx(), zs), std::invalid_argument);
    CHECK_THROWS_AS(qfb::compute_coefficients(S, power_grid(S), 13), std::out_of_range);
}
