#pragma once

// Two expansions with closed-form coefficients:
//
//   x^nu                          a_k = -2 / (q^nu j_k J_nu'(j_k))
//   g(x) = x^nu (x^2 q^2;q^2)_inf / (x^2 q^{2mu-2nu};q^2)_inf
//                                 a_k = -2 q^{1-mu} j_k^{nu-mu} C J_mu(q j_k) / (J_{nu+1}(q j_k) J_nu'(j_k))
//
// with C = (q^2;q^2)_inf / (q^{2mu-2nu};q^2)_inf. For mu = nu+1 the second
// reduces to the first.

#include "numeric.hpp"
#include "qbessel.hpp"
#include "qcore.hpp"
#include "series.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace qfb {

template <class Real>
Real example1_coefficient(const fourier_bessel_system<Real>& S, int k) {
    using std::pow;
    const Real& q = S.ctx().q;
    return Real(-2) / (pow(q, S.ctx().nu) * S.zero(k).value * S.derivative_at_zero(k));
}

namespace detail {

/// mu - nu when it is a positive integer, else nullopt.
template <class Real>
std::optional<long> integer_offset(const Real& nu, const Real& mu) {
    using std::abs;
    using std::round;
    const Real d = mu - nu;
    const Real r = round(d);
    if (r >= 1 && abs(d - r) <= Real(64) * machine_epsilon<Real>() * (abs(mu) + abs(nu) + 1))
        return static_cast<long>(to_double(r));
    return std::nullopt;
}

template <class Real>
void check_example2_orders(const Real& nu, const Real& mu) {
    if (!(mu > nu)) throw std::invalid_argument("example 2 needs mu > nu");
    if (!(nu > Real(-0.5))) throw std::invalid_argument("example 2 needs nu > -1/2");
}

/// (x^2 q^2;q^2)_inf / (x^2 q^{2mu-2nu};q^2)_inf given y = x^2 q^2 (exact when
/// formed from integer powers of q).
template <class Real>
Real example2_ratio(const basic_context<Real>& ctx, const Real& mu, const Real& y) {
    using std::pow;
    const Real Q = ctx.q * ctx.q;
    if (auto d = integer_offset(ctx.nu, mu)) return q_pochhammer(y, Q, *d - 1);
    // Shared truncation index: both products stop when their factors are
    // within eps of 1, i.e. after the same number of steps up to one.
    const Real shift = pow(Q, mu - ctx.nu - Real(1));
    Real num(1), den(1);
    Real a = y;
    const Real eps = machine_epsilon<Real>();
    using std::abs;
    for (std::size_t i = 0; i < ctx.max_terms; ++i) {
        const Real b = a * shift;
        num *= Real(1) - a;
        const Real fd = Real(1) - b;
        if (fd == 0) throw std::domain_error("example 2 target: denominator factor vanishes");
        den *= fd;
        if (abs(a) <= eps && abs(b) <= eps) return num / den;
        a *= Q;
    }
    throw convergence_error("example 2 products did not converge");
}

}  // namespace detail

/// g(x) for x in [0,1], or x = 1/q (where it is exactly defined and used as
/// f(q^{-1})).
template <class Real>
Real example2_target(const basic_context<Real>& ctx, const Real& mu, const Real& x) {
    using std::abs;
    using std::pow;
    detail::check_example2_orders(ctx.nu, mu);
    const Real& q = ctx.q;
    if (x < 0) throw std::domain_error("example 2 target needs x >= 0");
    if (x > 1) {
        if (abs(x * q - Real(1)) > Real(64) * machine_epsilon<Real>())
            throw std::domain_error("example 2 target is evaluated on [0,1] and at 1/q only");
        return pow(Real(1) / q, ctx.nu) * detail::example2_ratio(ctx, mu, Real(1));
    }
    if (x == 0) return ctx.nu > 0 ? Real(0) : detail::example2_ratio(ctx, mu, Real(0));
    return pow(x, ctx.nu) * detail::example2_ratio(ctx, mu, Real(x * x * q * q));
}

/// g(q^n), n >= -1, with the products formed from exact integer powers.
template <class Real>
Real example2_target_at(const basic_context<Real>& ctx, const Real& mu, long n) {
    using std::pow;
    detail::check_example2_orders(ctx.nu, mu);
    if (n < -1) throw std::domain_error("example 2 target is evaluated at q^n, n >= -1");
    const Real& q = ctx.q;
    return pow(q, Real(n) * ctx.nu) * detail::example2_ratio(ctx, mu, ipow(q, 2 * (n + 1)));
}

/// (q^2;q^2)_inf / (q^{2mu-2nu};q^2)_inf.
template <class Real>
Real example2_constant(const basic_context<Real>& ctx, const Real& mu) {
    using std::pow;
    const Real Q = ctx.q * ctx.q;
    if (auto d = detail::integer_offset(ctx.nu, mu)) return q_pochhammer(Q, Q, *d - 1);
    const Real eps = machine_epsilon<Real>();
    return q_pochhammer(Q, Q, infinite_length, eps, ctx.max_terms) /
           q_pochhammer(Real(pow(Q, mu - ctx.nu)), Q, infinite_length, eps, ctx.max_terms);
}

/// int_0^1 t g(t) J_nu(q j_k t) d_q t in closed form:
/// (1-q) (q j_k)^{nu-mu} C J_mu(q j_k).
template <class Real>
Real example2_integral(const fourier_bessel_system<Real>& S, const hahn_exton<Real>& Jmu,
                       const Real& mu, int k) {
    using std::pow;
    const Real& q = S.ctx().q;
    const Real qj = q * S.zero(k).value;
    return (Real(1) - q) * pow(qj, S.ctx().nu - mu) * example2_constant(S.ctx(), mu) * Jmu.value(qj).value;
}

template <class Real>
Real example2_coefficient(const fourier_bessel_system<Real>& S, const hahn_exton<Real>& Jmu,
                          const Real& mu, int k) {
    using std::abs;
    using std::pow;
    detail::check_example2_orders(S.ctx().nu, mu);
    const Real& q = S.ctx().q;
    const Real j = S.zero(k).value;
    const Real jn1 = S.bessel_next().value(q * j).value;
    const Real denom = jn1 * S.derivative_at_zero(k);
    if (denom == 0) throw conditioning_error("example 2 coefficient: vanishing denominator");
    return Real(-2) * pow(q, Real(1) - mu) * pow(j, S.ctx().nu - mu) * example2_constant(S.ctx(), mu) *
           Jmu.value(q * j).value / denom;
}

// ---------------------------------------------------------------------------

enum class expansion_kind { power_nu, g_nu_mu };

/// A target function with known coefficients.
template <class Real>
struct closed_form_expansion {
    expansion_kind kind = expansion_kind::power_nu;
    Real nu;
    Real mu;  // used by g_nu_mu only

    static closed_form_expansion power(const Real& nu) {
        return {expansion_kind::power_nu, nu, nu + Real(1)};
    }
    static closed_form_expansion g(const Real& nu, const Real& mu) {
        detail::check_example2_orders(nu, mu);
        return {expansion_kind::g_nu_mu, nu, mu};
    }

    std::string name() const { return kind == expansion_kind::power_nu ? "power-nu" : "g-nu-mu"; }

    /// f(q^n), n >= -1.
    Real target_at(const basic_context<Real>& ctx, long n) const {
        using std::pow;
        if (kind == expansion_kind::power_nu) return pow(ctx.q, Real(n) * nu);
        return example2_target_at(ctx, mu, n);
    }

    Real target(const basic_context<Real>& ctx, const Real& x) const {
        using std::pow;
        if (kind == expansion_kind::power_nu) {
            if (x < 0) throw std::domain_error("x^nu needs x >= 0");
            return x == 0 ? (nu > 0 ? Real(0) : Real(1)) : pow(x, nu);
        }
        return example2_target(ctx, mu, x);
    }

    /// Samples on q^n, n = 0..depth, with f(q^{-1}), f(0+) and the tail
    /// exponent nu.
    grid_function<Real> grid(const basic_context<Real>& ctx, std::size_t depth) const {
        auto g = sample_by_index<Real>(
            ctx.q, depth, [&](long n) { return target_at(ctx, n); }, true);
        g.limit_value = nu > 0 ? Real(0) : Real(1);
        g.tail_exponent = nu;
        return g;
    }

    Real coefficient(const fourier_bessel_system<Real>& S, int k) const {
        if (kind == expansion_kind::power_nu) return example1_coefficient(S, k);
        const hahn_exton<Real> Jmu(S.ctx().with_order(mu));
        return example2_coefficient(S, Jmu, mu, k);
    }
};

}  // namespace qfb
