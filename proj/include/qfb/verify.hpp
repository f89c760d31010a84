#pragma once

// Identity families run by `qfb verify`. Each family reports its largest
// residual against a fixed tolerance; residuals are relative unless the
// family's note says otherwise.

#include "expansions.hpp"
#include "numeric.hpp"
#include "qbessel.hpp"
#include "qcore.hpp"
#include "qpoly.hpp"
#include "series.hpp"
#include "zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace qfb {

struct family_result {
    std::string name;
    double max_residual = 0;
    double tolerance = 0;
    std::size_t cases = 0;
    std::string note;
    bool pass() const { return max_residual <= tolerance; }
};

template <class Real>
struct verify_config {
    basic_context<Real> ctx;
    int k_max = 10;
    std::uint64_t seed = 1;
    /// Order of the second example; defaults to nu + 1 when unset.
    std::optional<Real> mu;
};

inline const std::vector<std::string>& verify_family_names() {
    static const std::vector<std::string> names = {
        "qcore",       "qbessel",  "zeros",    "qpoly",      "factorization", "finite-sums",
        "orthogonality", "eta",    "example1", "example2",   "lemma",         "parseval",
        "roundtrip",   "bounds",   "jacobi"};
    return names;
}

namespace detail {

class residual_tracker {
public:
    explicit residual_tracker(std::string name, double tol, std::string note = {}) {
        r_.name = std::move(name);
        r_.tolerance = tol;
        r_.note = std::move(note);
    }
    template <class Real>
    void add(const Real& residual) {
        double v = to_double(residual);
        if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
        r_.max_residual = std::max(r_.max_residual, v);
        ++r_.cases;
    }
    void fail() { add(std::numeric_limits<double>::infinity()); }
    family_result result() const { return r_; }

private:
    family_result r_;
};

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Everything the families share: the zeros and the tabulated system.
template <class Real>
class verifier {
public:
    verifier(const verify_config<Real>& cfg, std::vector<bessel_zero<Real>> zeros)
        : cfg_(cfg), S_(cfg.ctx, std::move(zeros)) {}

    const fourier_bessel_system<Real>& system() const { return S_; }

    family_result run(const std::string& name) const {
        if (name == "qcore") return qcore();
        if (name == "qbessel") return qbessel();
        if (name == "zeros") return zeros();
        if (name == "qpoly") return qpoly();
        if (name == "factorization") return factorization();
        if (name == "finite-sums") return finite_sums();
        if (name == "orthogonality") return orthogonality();
        if (name == "eta") return eta();
        if (name == "example1") return example1();
        if (name == "example2") return example2();
        if (name == "lemma") return lemma();
        if (name == "parseval") return parseval();
        if (name == "roundtrip") return roundtrip();
        if (name == "bounds") return bounds();
        if (name == "jacobi") return jacobi();
        throw std::invalid_argument("unknown verify family '" + name + "'");
    }

private:
    const basic_context<Real>& ctx() const { return cfg_.ctx; }
    int K() const { return S_.size(); }

    family_result qcore() const {
        detail::residual_tracker t("qcore", 1e-12, "q-integral of t^a, Pochhammer inversion, integration by parts");
        const Real& q = ctx().q;
        using std::pow;
        for (int a = 0; a <= 6; ++a) {
            auto g = sample<Real>(q, ctx().depth, [&](const Real& x) { return ipow(x, a); }, false);
            g.tail_exponent = Real(a);
            const Real exact = (Real(1) - q) / (Real(1) - ipow(q, a + 1));
            t.add(relative_difference(q_integral(g, ctx().term_tol), exact));
        }
        const Real a = Real(3) / Real(7);
        for (long n = 1; n <= 8; ++n)
            t.add(relative_difference(q_pochhammer(a, q, -n) * q_pochhammer(Real(a * ipow(q, -n)), q, n), Real(1)));
        const hahn_exton<Real>& J = S_.bessel();
        const Real j1q = q * S_.zero(1).value;
        auto f = [&](const Real& x) { return pow(x, ctx().nu); };
        auto g = [&](const Real& x) { return J.value(j1q * x).value; };
        for (bool upper : {true, false}) {
            const auto r = check_q_integration_by_parts<Real>(f, g, q, Real(0), Real(1), ctx().term_tol, upper);
            t.add(relative_difference(r.lhs, r.rhs));
        }
        return t.result();
    }

    family_result qbessel() const {
        detail::residual_tracker t("qbessel", 1.0,
                                   "difference relation and shift identity, residual / propagated bound");
        std::mt19937_64 gen(cfg_.seed);
        const Real& q = ctx().q;
        const hahn_exton<Real> J1(ctx().with_order(ctx().nu + Real(1)));
        const Real xmax = ipow(q, -3);
        for (int i = 0; i < 50; ++i) {
            const Real x = Real(detail::uniform01(gen)) * xmax;
            const auto d = check_difference_relation(S_.bessel(), x);
            t.add(d.tolerance > 0 ? Real(d.residual / d.tolerance) : d.residual);
            const auto s = check_shift_identity(S_.bessel(), J1, x);
            t.add(s.tolerance > 0 ? Real(s.residual / s.tolerance) : s.residual);
        }
        return t.result();
    }

    family_result zeros() const {
        detail::residual_tracker t("zeros", 0.0,
                                   "violations of 0 < eps < alpha, ordering and sign-change brackets");
        for (int k = 1; k <= K(); ++k) {
            const auto& z = S_.zero(k);
            int bad = 0;
            if (in_regime(ctx(), k) && !(z.certified && z.eps > 0 && z.eps < z.alpha)) ++bad;
            if (k > 1 && !(S_.zero(k - 1).value < z.value)) ++bad;
            if (!(z.bracket_lo < z.value && z.value < z.bracket_hi)) ++bad;
            const Real a = S_.bessel().value(z.bracket_lo).value;
            const Real b = S_.bessel().value(z.bracket_hi).value;
            if (!((a < 0 && b > 0) || (a > 0 && b < 0))) ++bad;
            t.add(double(bad));
        }
        return t.result();
    }

    family_result qpoly() const {
        detail::residual_tracker t("qpoly", 1e-12, "recurrence, convolution and explicit coefficients, n <= 12");
        for (int n = 0; n <= 12; ++n) {
            const auto a = poly_p_by_recurrence(ctx(), n);
            const auto b = poly_p_by_convolution(ctx(), n);
            const auto c = poly_p_explicit(ctx(), n, explicit_form::first);
            const auto d = poly_p_explicit(ctx(), n, explicit_form::second);
            for (int j = 0; j <= n; ++j) {
                t.add(relative_difference(a.coeffs[j], b.coeffs[j]));
                t.add(relative_difference(a.coeffs[j], c.coeffs[j]));
                t.add(relative_difference(c.coeffs[j], d.coeffs[j]));
            }
            t.add(relative_difference(a.coeffs[0], poly_a0(ctx().q, ctx().nu, n)));
            t.add(relative_difference(a.coeffs[n], poly_leading(ctx().q, ctx().nu, n)));
        }
        return t.result();
    }

    family_result factorization() const {
        detail::residual_tracker t("factorization", 1.0, "residual / propagated estimate, n <= 6, k <= 5");
        for (int k = 1; k <= std::min(K(), 5); ++k)
            for (int n = 0; n <= 6; ++n) {
                const auto r = check_factorization(S_.bessel(), S_.zero(k), n);
                t.add(r.estimate > 0 ? Real(r.residual / r.estimate) : r.residual);
            }
        return t.result();
    }

    family_result finite_sums() const {
        detail::residual_tracker t("finite-sums", 1e-12, "indices <= 12, five seeded gamma sequences");
        std::vector<std::uint64_t> seeds;
        for (std::uint64_t i = 0; i < 5; ++i) seeds.push_back(cfg_.seed + i);
        const auto rep = check_finite_sum_identities(ctx().q, ctx().nu, 12, seeds);
        t.add(rep.max());
        return t.result();
    }

    family_result orthogonality() const {
        detail::residual_tracker t("orthogonality", 1e-10,
                                   "|off-diagonal| / sqrt(eta_n eta_m) and diagonal vs closed form");
        using std::abs;
        using std::sqrt;
        const int m = std::min(K(), 10);
        for (int a = 1; a <= m; ++a)
            for (int b = 1; b <= m; ++b) {
                const Real v = orthogonality_integral(S_, a, b);
                if (a == b) t.add(relative_difference(v, S_.eta(a)));
                else t.add(abs(v) / sqrt(S_.eta(a) * S_.eta(b)));
            }
        return t.result();
    }

    family_result eta() const {
        detail::residual_tracker t("eta", 1e-9, "q-integral, middle and closed forms");
        for (int k = 1; k <= K(); ++k) {
            const auto e = eta_all_forms(S_, k);
            t.add(relative_difference(e.closed_form, e.integral));
            t.add(relative_difference(e.closed_form, e.middle_form));
            if (!(e.closed_form > 0)) t.fail();
        }
        return t.result();
    }

    family_result example1() const {
        detail::residual_tracker t("example1", 1e-9, "numeric vs closed-form coefficients of x^nu");
        const auto ex = closed_form_expansion<Real>::power(ctx().nu);
        const auto f = ex.grid(ctx(), ctx().depth);
        for (int k = 1; k <= K(); ++k)
            t.add(relative_difference(compute_coefficient(S_, f, k).value, ex.coefficient(S_, k)));
        return t.result();
    }

    family_result example2() const {
        const Real mu = cfg_.mu ? *cfg_.mu : ctx().nu + Real(1);
        detail::residual_tracker t("example2", 1e-8,
                                   "numeric vs closed-form coefficients of g, and the closed-form integral");
        const auto ex = closed_form_expansion<Real>::g(ctx().nu, mu);
        const auto f = ex.grid(ctx(), ctx().depth);
        const hahn_exton<Real> Jmu(ctx().with_order(mu));
        for (int k = 1; k <= std::min(K(), 8); ++k) {
            t.add(relative_difference(compute_coefficient(S_, f, k).value, example2_coefficient(S_, Jmu, mu, k)));
            t.add(relative_difference(coefficient_integral(S_, f, k).value, example2_integral(S_, Jmu, mu, k)));
        }
        return t.result();
    }

    family_result lemma() const {
        detail::residual_tracker t("lemma", 1e-9, "coefficient-integral identity for x^nu and a constant");
        if (!(ctx().nu > 0)) return t.result();
        const auto f = closed_form_expansion<Real>::power(ctx().nu).grid(ctx(), ctx().depth);
        auto c = f;
        std::fill(c.values.begin(), c.values.end(), Real(1));
        c.pre_value = Real(1);
        c.limit_value = Real(1);
        c.tail_exponent = Real(0);
        for (int k = 1; k <= std::min(K(), 5); ++k) {
            t.add(check_coefficient_integral_identity(S_, f, k).relative());
            t.add(check_coefficient_integral_identity(S_, c, k).relative());
        }
        return t.result();
    }

    family_result parseval() const {
        detail::residual_tracker t("parseval", 1e-8, "int t f^2 - sum a_k^2 eta_k for x^nu, absolute");
        const auto f = closed_form_expansion<Real>::power(ctx().nu).grid(ctx(), ctx().depth);
        using std::abs;
        t.add(abs(parseval_defect(S_, f, compute_coefficients(S_, f, K()))));
        return t.result();
    }

    family_result roundtrip() const {
        detail::residual_tracker t("roundtrip", 1e-9, "coefficients re-extracted from S_K, k <= K/2");
        const auto f = closed_form_expansion<Real>::power(ctx().nu).grid(ctx(), ctx().depth);
        const auto a = compute_coefficients(S_, f, K());
        const auto b = roundtrip_coefficients(S_, a, std::max(1, K() / 2));
        for (std::size_t i = 0; i < b.size(); ++i) t.add(relative_difference(a[i].value, b[i].value));
        return t.result();
    }

    family_result bounds() const {
        detail::residual_tracker t("bounds", 1.0,
                                   "max lhs/rhs of the zero-value bound for k >= 3, and min|S_k|/max|S_k| floor");
        for (int k = 3; k <= K(); ++k) {
            const auto b = check_zero_value_bound(S_.bessel(), S_.zero(k));
            t.add(b.lhs / b.rhs);
        }
        if (K() >= 3) {
            std::vector<bessel_zero<Real>> zs(S_.zeros().begin() + 2, S_.zeros().end());
            const auto rep = check_derivative_asymptotics(S_.bessel(), zs);
            double mx = 0;
            for (double s : rep.s) mx = std::max(mx, std::abs(s));
            // Passes when min|S_k| > 0.1 max|S_k|.
            t.add(mx > 0 ? 0.1 * mx / rep.min_abs_s : std::numeric_limits<double>::infinity());
        }
        return t.result();
    }

    family_result jacobi() const {
        detail::residual_tracker t("jacobi", 1e-13, "sum (-1)^i (2i+1) q^{i(i+1)} vs prod (1-q^{2i})^3");
        const auto [l, r] = jacobi_identity_sides(ctx().q, machine_epsilon<Real>());
        t.add(relative_difference(l, r));
        return t.result();
    }

    verify_config<Real> cfg_;
    fourier_bessel_system<Real> S_;
};

}  // namespace qfb
