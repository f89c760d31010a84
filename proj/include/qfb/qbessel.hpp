#pragma once

// The Hahn-Exton q-Bessel function
//
//   J_nu(z;q^2) = z^nu (q^{2nu+2};q^2)_inf / (q^2;q^2)_inf
//                 * sum_{k>=0} (-1)^k q^{k(k+1)} z^{2k} / ((q^{2nu+2};q^2)_k (q^2;q^2)_k)
//
// and its derivative in z, evaluated by direct summation of the power series.

#include "numeric.hpp"
#include "qcore.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qfb {

/// A series value with its truncation and rounding bounds (both absolute).
template <class Real>
struct bessel_eval {
    Real value;
    std::size_t terms_used;
    Real tail_bound;
    Real rounding_bound;
    /// Largest |term| times the prefactor; peak/|value| measures cancellation.
    Real peak_term;

    Real error_bound() const { return tail_bound + rounding_bound; }
    Real condition() const {
        using std::abs;
        return value == 0 ? Real(0) : peak_term / abs(value);
    }
};

/// J_nu(.;q^2) for a fixed context. The term ratios
///   r_i = q^{2i} / ((1 - q^{2nu+2i}) (1 - q^{2i}))
/// decrease strictly in i, so once r_{i} z^2 < 1 the remainder is bounded by
/// a geometric series, giving a rigorous tail bound.
template <class Real>
class hahn_exton {
public:
    explicit hahn_exton(const basic_context<Real>& ctx) : ctx_(ctx) {
        const Real Q = ctx.q * ctx.q;
        const Real eps = machine_epsilon<Real>();
        using std::pow;
        Qnu_ = pow(Q, ctx.nu);
        prefactor_ = q_pochhammer(Real(Qnu_ * Q), Q, infinite_length, eps, ctx.max_terms) /
                     q_pochhammer(Q, Q, infinite_length, eps, ctx.max_terms);
        ratios_.reserve(cached_ratios + 1);
        ratios_.push_back(Real(0));
        Real Qi(1);
        Real Qnui = Qnu_;
        for (std::size_t i = 1; i <= cached_ratios; ++i) {
            Qi *= Q;
            Qnui *= Q;
            ratios_.push_back(Qi / ((Real(1) - Qnui) * (Real(1) - Qi)));
        }
    }

    const basic_context<Real>& ctx() const { return ctx_; }
    const Real& prefactor() const { return prefactor_; }

    bessel_eval<Real> value(const Real& z) const { return evaluate(z, false); }
    bessel_eval<Real> derivative(const Real& z) const { return evaluate(z, true); }

    Real operator()(const Real& z) const { return value(z).value; }

private:
    static constexpr std::size_t cached_ratios = 256;

    Real ratio(std::size_t i) const {
        if (i < ratios_.size()) return ratios_[i];
        using std::pow;
        const Real Q = ctx_.q * ctx_.q;
        const Real Qi = pow(Q, Real(i));
        return Qi / ((Real(1) - Qnu_ * Qi) * (Real(1) - Qi));
    }

    bessel_eval<Real> evaluate(const Real& z, bool deriv) const {
        using std::abs;
        using std::pow;
        if (z < 0) throw std::domain_error("J_nu(z;q^2) is evaluated for z >= 0 only");
        const Real& nu = ctx_.nu;
        const Real eps = machine_epsilon<Real>();
        if (z == 0) {
            if (!deriv) {
                if (nu > 0) return {Real(0), 1, Real(0), Real(0), Real(0)};
                if (nu == 0) return {prefactor_, 1, Real(0), Real(0), abs(prefactor_)};
                throw std::domain_error("J_nu(0) is singular for nu < 0");
            }
            if (nu == 1) return {prefactor_, 1, Real(0), Real(0), abs(prefactor_)};
            if (nu == 0 || nu > 1) return {Real(0), 1, Real(0), Real(0), Real(0)};
            throw std::domain_error("J_nu'(0) is singular for nu in (-1,0) or (0,1)");
        }
        const Real z2 = z * z;
        const Real scale = prefactor_ * (deriv ? pow(z, nu - Real(1)) : pow(z, nu));
        if constexpr (!is_mp_v<Real>) {
            if (!std::isfinite(static_cast<double>(scale)))
                throw std::overflow_error("J_nu prefactor overflows binary64");
        }
        auto weight = [&](std::size_t i) { return deriv ? Real(2 * i) + nu : Real(1); };

        compensated_sum<Real> acc;
        Real t(1);
        acc.add(weight(0) * t);
        std::size_t used = 1;
        Real tail(0);
        for (std::size_t i = 1;; ++i) {
            if (i > ctx_.max_terms)
                throw convergence_error("J_nu series exceeded max_terms");
            const Real next = -t * ratio(i) * z2;
            // Majorant ratio for every term after `next`.
            Real rho = ratio(i + 1) * z2;
            if (deriv) {
                const Real w0 = weight(i);
                if (w0 > 0) rho *= weight(i + 1) / w0;
                else rho = Real(2);
            }
            const Real wnext = abs(weight(i) * next);
            if (rho < 1) {
                const Real bound = wnext / (Real(1) - rho);
                // Full working precision: q-integrals of grid values of J can
                // cancel by hundreds of digits.
                if (bound <= eps * abs(acc.value()) || bound <= eps * acc.peak()) {
                    tail = bound;
                    break;
                }
            }
            acc.add(weight(i) * next);
            t = next;
            ++used;
            if constexpr (is_mp_v<Real>) {
                if (!boost::multiprecision::isfinite(acc.value()))
                    throw std::overflow_error("J_nu series overflow");
            } else {
                if (!std::isfinite(acc.value())) throw std::overflow_error("J_nu series overflow");
            }
        }
        const Real as = abs(scale);
        const Real rounding = Real(used + 2) * eps * acc.abs_sum() * as;
        return {scale * acc.value(), used, tail * as, rounding, acc.peak() * as};
    }

    basic_context<Real> ctx_;
    Real Qnu_;
    Real prefactor_;
    std::vector<Real> ratios_;
};

template <class Real>
bessel_eval<Real> bessel_j(const basic_context<Real>& ctx, const Real& z) {
    return hahn_exton<Real>(ctx).value(z);
}

template <class Real>
bessel_eval<Real> bessel_j_prime(const basic_context<Real>& ctx, const Real& z) {
    return hahn_exton<Real>(ctx).derivative(z);
}

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

template <class Real>
struct identity_check {
    Real residual;
    Real tolerance;
    bool ok() const { return residual <= tolerance; }
};

/// J(q^2 x) + q^{-nu} (q^2 x^2 - 1 - q^{2nu}) J(q x) + J(x) = 0.
/// The tolerance is the propagated evaluation error bound (times 4).
template <class Real>
identity_check<Real> check_difference_relation(const hahn_exton<Real>& J, const Real& x) {
    using std::abs;
    using std::pow;
    const Real& q = J.ctx().q;
    const Real& nu = J.ctx().nu;
    const auto a = J.value(q * q * x);
    const auto b = J.value(q * x);
    const auto c = J.value(x);
    const Real coef = pow(q, -nu) * (q * q * x * x - Real(1) - pow(q, Real(2) * nu));
    const Real residual = abs(a.value + coef * b.value + c.value);
    const Real tol = Real(4) * (a.error_bound() + abs(coef) * b.error_bound() + c.error_bound()) +
                     Real(4) * machine_epsilon<Real>() *
                         (abs(a.value) + abs(coef * b.value) + abs(c.value));
    return {residual, tol};
}

/// J_nu(q x) - q x J_{nu+1}(q x) - q^nu J_nu(x); vanishes identically in x,
/// so at a zero j of J_nu it reduces to J_nu(q j) = q j J_{nu+1}(q j).
template <class Real>
identity_check<Real> check_shift_identity(const hahn_exton<Real>& J, const hahn_exton<Real>& J1,
                                          const Real& x) {
    using std::abs;
    using std::pow;
    const Real& q = J.ctx().q;
    const Real qnu = pow(q, J.ctx().nu);
    const auto a = J.value(q * x);
    const auto b = J1.value(q * x);
    const auto c = J.value(x);
    const Real residual = abs(a.value - q * x * b.value - qnu * c.value);
    const Real tol = Real(4) * (a.error_bound() + q * x * b.error_bound() + qnu * c.error_bound()) +
                     Real(4) * machine_epsilon<Real>() *
                         (abs(a.value) + abs(q * x * b.value) + abs(qnu * c.value));
    return {residual, tol};
}

}  // namespace qfb
