#pragma once

// Positive zeros j_k of J_nu(.;q^2).
//
// Zeros are parametrised as j_k = q^{-k+eps_k}. For k past a small threshold
// 0 < eps_k < alpha_k with alpha_k = O(q^{2k}), while eps_k itself is of order
// q^{2k^2}: locating j_k in z to relative width 1e-14 does not determine
// J(q j_k). Refinement therefore runs on eps (Illinois regula falsi inside a
// sign-change bracket), and eps is reported, not j_k - q^{-k}.

#include "numeric.hpp"
#include "qbessel.hpp"
#include "qcore.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfb {

/// eps_k is rounded to this many significant digits before anything else
/// uses it, so a zero read back from the cache is identical to a fresh one.
inline constexpr int canonical_eps_digits = 40;

template <class Real>
struct bessel_zero {
    int k = 0;
    Real value;
    Real eps;
    /// NaN when the bound is undefined for this k.
    Real alpha;
    Real bracket_lo;
    Real bracket_hi;
    bool certified = false;
};

/// Raised when alpha_k is undefined (outside the regime of the bound).
class out_of_regime : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

template <class Real>
bool alpha_defined(const basic_context<Real>& ctx, int k) {
    using std::pow;
    if (k < 1) return false;
    const Real Q = ctx.q * ctx.q;
    return Real(1) - pow(Q, Real(k) + ctx.nu) / (Real(1) - ipow(Q, k)) > 0;
}

/// alpha_k = log(1 - q^{2(k+nu)} / (1 - q^{2k})) / (2 log q).
template <class Real>
Real alpha_bound(const basic_context<Real>& ctx, int k) {
    using std::log;
    using std::pow;
    if (k < 1) throw std::invalid_argument("zero index k must be >= 1");
    const Real Q = ctx.q * ctx.q;
    const Real arg = Real(1) - pow(Q, Real(k) + ctx.nu) / (Real(1) - ipow(Q, k));
    if (!(arg > 0))
        throw out_of_regime("alpha_k undefined at k=" + std::to_string(k) + ": log argument <= 0");
    return log(arg) / (Real(2) * log(ctx.q));
}

/// q^{2(k+nu)} <= (1-q^2)(1-q^{2k}); monotone in k once it holds.
template <class Real>
bool in_regime(const basic_context<Real>& ctx, int k) {
    using std::pow;
    const Real Q = ctx.q * ctx.q;
    return pow(Q, Real(k) + ctx.nu) <= (Real(1) - Q) * (Real(1) - ipow(Q, k));
}

template <class Real>
struct zero_options {
    /// Relative width of the final eps bracket.
    Real eps_rtol = Real(1e-45);
    int max_iterations = 400;
};

/// Zero finder bound to one (q, nu); holds the evaluator so repeated calls
/// share its setup.
template <class Real>
class zero_finder {
public:
    explicit zero_finder(const basic_context<Real>& ctx, zero_options<Real> opt = {})
        : J_(ctx), opt_(opt) {
        using std::log;
        log_q_ = log(ctx.q);
    }

    const hahn_exton<Real>& bessel() const { return J_; }
    const basic_context<Real>& ctx() const { return J_.ctx(); }

    /// z = q^{-k+eps}.
    Real point(int k, const Real& eps) const {
        using std::exp;
        return exp((eps - Real(k)) * log_q_);
    }

    /// eps such that z = q^{-k+eps}.
    Real eps_of(int k, const Real& z) const {
        using std::log;
        return Real(k) + log(z) / log_q_;
    }

    Real f(int k, const Real& eps) const { return J_.value(point(k, eps)).value; }

    bessel_zero<Real> find(int k) const {
        if (k < 1) throw std::invalid_argument("zero index k must be >= 1");
        std::optional<Real> alpha;
        if (alpha_defined(ctx(), k)) alpha = alpha_bound(ctx(), k);
        if (alpha && in_regime(ctx(), k)) {
            const Real f0 = f(k, Real(0));
            const Real fa = f(k, *alpha);
            if (sign(f0) * sign(fa) < 0) {
                auto [lo, hi] = refine(k, Real(0), *alpha, f0, fa);
                return finish(k, lo, hi, alpha, true);
            }
        }
        const auto br = scan_bracket(k);
        auto [lo, hi] = refine(k, br.first, br.second, f(k, br.first), f(k, br.second));
        return finish(k, lo, hi, alpha, false);
    }

    /// Rebuilds a zero from a stored eps (canonical_eps_digits digits) and checks
    /// that J still changes sign across the canonical bracket.
    bessel_zero<Real> from_eps(int k, const Real& eps, bool certified) const {
        std::optional<Real> alpha;
        if (alpha_defined(ctx(), k)) alpha = alpha_bound(ctx(), k);
        return canonical(k, eps, alpha, certified);
    }

    /// Number of sign changes of J on (0, z_max], stepping by q^{-1/2}.
    int count_sign_changes(const Real& z_max) const {
        using std::sqrt;
        const Real step = Real(1) / sqrt(ctx().q);
        Real z = start_point();
        int s = sign(J_(z));
        int count = 0;
        while (z < z_max) {
            Real zn = z * step;
            if (zn > z_max) zn = z_max;
            const int sn = sign(J_(zn));
            if (sn != 0 && sn != s) {
                ++count;
                s = sn;
            }
            z = zn;
        }
        return count;
    }

private:
    static int sign(const Real& x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

    /// A point below the first zero where the leading series term dominates.
    Real start_point() const {
        using std::pow;
        using std::sqrt;
        const Real Q = ctx().q * ctx().q;
        const Real r1 = Q / ((Real(1) - pow(Q, ctx().nu + Real(1))) * (Real(1) - Q));
        Real z0 = sqrt(Real(1) / (Real(4) * r1));
        const Real alt = pow(ctx().q, ctx().nu / Real(2));
        if (alt < z0) z0 = alt;
        return z0;
    }

    /// eps-bracket of the k-th sign change found by a geometric scan.
    std::pair<Real, Real> scan_bracket(int k) const {
        using std::sqrt;
        const Real step = Real(1) / sqrt(ctx().q);
        Real z = start_point();
        int s = sign(J_(z));
        int count = 0;
        const Real z_limit = ipow(ctx().q, -(2 * k + 12));
        while (z < z_limit) {
            const Real zn = z * step;
            const int sn = sign(J_(zn));
            if (sn == 0) {
                ++count;
                if (count == k) {
                    const Real e = eps_of(k, zn);
                    const Real w = abs_floor() * Real(4);
                    return {e - w, e + w};
                }
                z = zn * (Real(1) + Real(8) * machine_epsilon<Real>());
                s = sign(J_(z));
                continue;
            }
            if (sn != s) {
                ++count;
                if (count == k) return {eps_of(k, zn), eps_of(k, z)};
                s = sn;
            }
            z = zn;
        }
        throw convergence_error("scan found fewer than " + std::to_string(k) +
                                " sign changes below q^{-(2k+12)}");
    }

    Real abs_floor() const {
        using std::abs;
        return Real(4) * machine_epsilon<Real>() / abs(log_q_);
    }

    /// Illinois iteration on eps in [a,b] (either order) with f(a) f(b) < 0.
    std::pair<Real, Real> refine(int k, Real a, Real b, Real fa, Real fb) const {
        using std::abs;
        using std::sqrt;
        if (sign(fa) * sign(fb) > 0)
            throw convergence_error("no sign change in zero bracket at k=" + std::to_string(k));
        if (fa == 0) return {a, a};
        if (fb == 0) return {b, b};
        if (a > b) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        int side = 0;
        int stall = 0;
        Real last_width = b - a;
        for (int it = 0; it < opt_.max_iterations; ++it) {
            const Real width = b - a;
            const Real scale = std::max(abs(a), abs(b));
            if (width <= opt_.eps_rtol * scale || width <= abs_floor()) return {a, b};
            Real c = (a * fb - b * fa) / (fb - fa);
            const bool bad = !(c > a && c < b);
            if (bad || stall >= 3) {
                // Geometric bisection spans many decades quickly when 0 < a << b.
                if (a > 0 && b > Real(16) * a) c = sqrt(a * b);
                else if (b < 0 && a < Real(16) * b) c = -sqrt(a * b);
                else c = (a + b) / Real(2);
                stall = 0;
            }
            const Real fc = f(k, c);
            if (fc == 0) return {c, c};
            if (sign(fc) == sign(fb)) {
                b = c;
                fb = fc;
                if (side == -1) fa /= Real(2);
                side = -1;
            } else {
                a = c;
                fa = fc;
                if (side == 1) fb /= Real(2);
                side = 1;
            }
            const Real nw = b - a;
            stall = (nw > last_width / Real(2)) ? stall + 1 : 0;
            if (stall == 0) last_width = nw;
        }
        throw convergence_error("zero refinement did not converge at k=" + std::to_string(k));
    }

    bessel_zero<Real> finish(int k, const Real& lo, const Real& hi, const std::optional<Real>& alpha,
                             bool from_regime) const {
        const Real mid = (lo + hi) / Real(2);
        const Real eps = round_significant(mid, canonical_eps_digits);
        bool certified = from_regime && alpha && eps > 0 && eps < *alpha;
        return canonical(k, eps, alpha, certified);
    }

    /// value = q^{-k+eps} with a bracket eps*(1 -+ 1e-30) (plus an absolute
    /// floor) verified by a sign change. Cold and warm cache paths both end
    /// here, so they agree bit for bit.
    bessel_zero<Real> canonical(int k, const Real& eps, const std::optional<Real>& alpha,
                                bool certified) const {
        using std::abs;
        const Real w = std::max(abs(eps) * Real(1e-30), Real(4) * abs_floor());
        const Real e_lo = eps - w;
        const Real e_hi = eps + w;
        const Real f_lo = f(k, e_lo);
        const Real f_hi = f(k, e_hi);
        if (sign(f_lo) * sign(f_hi) > 0)
            throw convergence_error("canonical zero bracket lost its sign change at k=" +
                                    std::to_string(k));
        bessel_zero<Real> z;
        z.k = k;
        z.eps = eps;
        z.value = point(k, eps);
        z.alpha = alpha ? *alpha : Real(std::numeric_limits<double>::quiet_NaN());
        // eps up means z down (q < 1).
        z.bracket_lo = point(k, e_hi);
        z.bracket_hi = point(k, e_lo);
        z.certified = certified;
        return z;
    }

    hahn_exton<Real> J_;
    zero_options<Real> opt_;
    Real log_q_;
};

template <class Real>
bessel_zero<Real> find_zero(const basic_context<Real>& ctx, int k) {
    return zero_finder<Real>(ctx).find(k);
}

/// Zeros k = 1..k_max in ascending order.
template <class Real>
std::vector<bessel_zero<Real>> find_zeros(const basic_context<Real>& ctx, int k_max) {
    zero_finder<Real> zf(ctx);
    std::vector<bessel_zero<Real>> out;
    out.reserve(static_cast<std::size_t>(std::max(k_max, 0)));
    for (int k = 1; k <= k_max; ++k) out.push_back(zf.find(k));
    return out;
}

// ---------------------------------------------------------------------------
// Bounds at the zeros
// ---------------------------------------------------------------------------

template <class Real>
struct bound_check {
    Real lhs;
    Real rhs;
    bool holds() const { return lhs <= rhs; }
};

/// (|J(q j_k)|, (-q^2, -q^{2nu+2}; q^2)_inf / (q^2;q^2)_inf * q^{(k+nu)(k-1)}).
template <class Real>
bound_check<Real> check_zero_value_bound(const hahn_exton<Real>& J, const bessel_zero<Real>& z) {
    using std::abs;
    using std::pow;
    const Real& q = J.ctx().q;
    const Real Q = q * q;
    const Real eps = machine_epsilon<Real>();
    const Real c = q_pochhammer(Real(-Q), Q, infinite_length, eps) *
                   q_pochhammer(Real(-pow(Q, J.ctx().nu + Real(1))), Q, infinite_length, eps) /
                   q_pochhammer(Q, Q, infinite_length, eps);
    const Real rhs = c * pow(q, (Real(z.k) + J.ctx().nu) * Real(z.k - 1));
    return {abs(J.value(q * z.value).value), rhs};
}

template <class Real>
struct derivative_asymptotics {
    std::vector<int> ks;
    /// S_k = J'(j_k) / (A q^{-(k+nu/2-1-eps_k)^2}).
    std::vector<double> s;
    /// |J'(j_k)| q^{k(k+nu-2)}.
    std::vector<double> ratio;
    double min_abs_s = 0;
    double ratio_min = 0;
    double ratio_max = 0;
};

/// A = 2 q^{(nu-1)(nu-3)/4} (q^{2nu+2};q^2)_inf / (q^2;q^2)_inf.
template <class Real>
Real derivative_constant(const hahn_exton<Real>& J) {
    using std::pow;
    const Real& q = J.ctx().q;
    const Real& nu = J.ctx().nu;
    return Real(2) * pow(q, (nu - Real(1)) * (nu - Real(3)) / Real(4)) * J.prefactor();
}

template <class Real>
derivative_asymptotics<Real> check_derivative_asymptotics(const hahn_exton<Real>& J,
                                                          const std::vector<bessel_zero<Real>>& zs) {
    using std::abs;
    using std::exp;
    using std::log;
    derivative_asymptotics<Real> rep;
    const Real& q = J.ctx().q;
    const Real& nu = J.ctx().nu;
    const Real lq = log(q);
    const Real logA = log(abs(derivative_constant(J)));
    rep.min_abs_s = std::numeric_limits<double>::infinity();
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0;
    for (const auto& z : zs) {
        const Real d = J.derivative(z.value).value;
        const Real logd = log(abs(d));
        const Real x = Real(z.k) + nu / Real(2) - Real(1) - z.eps;
        const Real s = (d < 0 ? Real(-1) : Real(1)) * exp(logd - logA + x * x * lq);
        const Real r = exp(logd + Real(z.k) * (Real(z.k) + nu - Real(2)) * lq);
        rep.ks.push_back(z.k);
        rep.s.push_back(to_double(s));
        rep.ratio.push_back(to_double(r));
        rep.min_abs_s = std::min(rep.min_abs_s, std::abs(to_double(s)));
        rep.ratio_min = std::min(rep.ratio_min, to_double(r));
        rep.ratio_max = std::max(rep.ratio_max, to_double(r));
    }
    return rep;
}

/// sum_{i>=0} (-1)^i (2i+1) q^{i(i+1)} and prod_{i>=1} (1-q^{2i})^3.
template <class Real>
std::pair<Real, Real> jacobi_identity_sides(const Real& q, const Real& tol) {
    using std::abs;
    compensated_sum<Real> acc;
    for (long i = 0;; ++i) {
        const Real t = ipow(q, i * (i + 1)) * Real(2 * i + 1);
        acc.add((i % 2 == 0) ? t : Real(-t));
        if (t <= tol * abs(acc.value()) && i > 2) break;
        if (i > 100000) throw convergence_error("Jacobi series did not converge");
    }
    const Real Q = q * q;
    const Real p = q_pochhammer(Q, Q, infinite_length, tol);
    return {acc.value(), p * p * p};
}

}  // namespace qfb
