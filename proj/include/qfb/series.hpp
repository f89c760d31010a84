#pragma once

// q-Fourier-Bessel series on the grid {q^n}:
//
//   S[f](x) = sum_k a_k J_nu(q j_k x; q^2),
//   a_k     = (1/eta_k) int_0^1 t f(t) J_nu(q j_k t; q^2) d_q t,
//   eta_k   = int_0^1 t J_nu(q j_k t; q^2)^2 d_q t
//           = -(1-q) q^{nu-2} / (2 j_k) J_nu(q j_k) J_nu'(j_k).

#include "numeric.hpp"
#include "qbessel.hpp"
#include "qcore.hpp"
#include "zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfb {

enum class coefficient_source { numeric_integral, closed_form };

inline const char* to_string(coefficient_source s) {
    return s == coefficient_source::numeric_integral ? "numeric-integral" : "closed-form";
}

template <class Real>
struct fourier_coefficient {
    int k = 0;
    Real value;
    Real eta;
    coefficient_source source = coefficient_source::numeric_integral;
};

template <class Real>
struct eta_forms {
    /// -(1-q) q^{nu-2} / (2 j) J(q j) J'(j)
    Real closed_form;
    /// -(1-q) q^{nu-1} / 2 J_{nu+1}(q j) J'(j)
    Real middle_form;
    /// int_0^1 t J(q j t)^2 d_q t
    Real integral;
};

/// The orthogonal system {J_nu(q j_k x)} for k = 1..K, with the grid values
/// J_nu(q^{n+1} j_k), n = -1..depth, tabulated once.
template <class Real>
class fourier_bessel_system {
public:
    fourier_bessel_system(const basic_context<Real>& ctx, std::vector<bessel_zero<Real>> zeros)
        : ctx_(ctx), J_(ctx), J1_(ctx.with_order(ctx.nu + Real(1))), zeros_(std::move(zeros)) {
        for (std::size_t i = 0; i < zeros_.size(); ++i)
            if (zeros_[i].k != static_cast<int>(i) + 1)
                throw std::invalid_argument("zeros must be listed as k = 1, 2, ... in order");
        const long depth = static_cast<long>(ctx.depth);
        using std::pow;
        const Real c_eta = -(Real(1) - ctx.q) * pow(ctx.q, ctx.nu - Real(2)) / Real(2);
        for (const auto& z : zeros_) {
            std::vector<Real> row;
            row.reserve(static_cast<std::size_t>(depth) + 2);
            Real x = z.value;
            for (long n = -1; n <= depth; ++n) {
                row.push_back(J_.value(x).value);
                x *= ctx.q;
            }
            basis_.push_back(std::move(row));
            jprime_.push_back(J_.derivative(z.value).value);
            eta_.push_back(c_eta / z.value * basis_.back()[1] * jprime_.back());
        }
    }

    const basic_context<Real>& ctx() const { return ctx_; }
    const hahn_exton<Real>& bessel() const { return J_; }
    const hahn_exton<Real>& bessel_next() const { return J1_; }
    int size() const { return static_cast<int>(zeros_.size()); }
    long depth() const { return static_cast<long>(ctx_.depth); }

    const bessel_zero<Real>& zero(int k) const { return zeros_.at(index(k)); }
    const std::vector<bessel_zero<Real>>& zeros() const { return zeros_; }

    /// J_nu(q^{n+1} j_k); n = -1 gives J_nu(j_k).
    const Real& basis(int k, long n) const {
        const auto& row = basis_.at(index(k));
        if (n < -1 || n > depth()) throw std::out_of_range("basis grid index outside -1..depth");
        return row[static_cast<std::size_t>(n + 1)];
    }

    const Real& derivative_at_zero(int k) const { return jprime_.at(index(k)); }

    /// Closed-form eta_k.
    const Real& eta(int k) const { return eta_.at(index(k)); }

private:
    std::size_t index(int k) const {
        if (k < 1 || k > size())
            throw std::out_of_range("zero index " + std::to_string(k) + " outside 1.." +
                                    std::to_string(size()));
        return static_cast<std::size_t>(k - 1);
    }

    basic_context<Real> ctx_;
    hahn_exton<Real> J_;
    hahn_exton<Real> J1_;
    std::vector<bessel_zero<Real>> zeros_;
    std::vector<std::vector<Real>> basis_;
    std::vector<Real> jprime_;
    std::vector<Real> eta_;
};

template <class Real>
fourier_bessel_system<Real> make_system(const basic_context<Real>& ctx, int k_max) {
    return fourier_bessel_system<Real>(ctx, find_zeros(ctx, k_max));
}

// ---------------------------------------------------------------------------
// Norms and coefficients
// ---------------------------------------------------------------------------

template <class Real>
eta_forms<Real> eta_all_forms(const fourier_bessel_system<Real>& S, int k) {
    using std::pow;
    const auto& ctx = S.ctx();
    const Real& q = ctx.q;
    const Real one_minus_q = Real(1) - q;
    const auto& z = S.zero(k);
    auto term = [&](long n) {
        const Real& b = S.basis(k, n);
        return one_minus_q * ipow(q, 2 * n) * b * b;
    };
    const Real integral = sum_grid_terms<Real>(term, 0, S.depth(), ctx.term_tol).value;
    const Real mid = -one_minus_q * pow(q, ctx.nu - Real(1)) / Real(2) *
                     S.bessel_next().value(q * z.value).value * S.derivative_at_zero(k);
    return {S.eta(k), mid, integral};
}

/// eta_k after checking the q-integral and the closed form agree to 1e-9.
template <class Real>
Real eta_norm(const fourier_bessel_system<Real>& S, int k) {
    const auto f = eta_all_forms(S, k);
    if (relative_difference(f.closed_form, f.integral) > Real(1e-9))
        throw conditioning_error("eta_" + std::to_string(k) +
                                 ": closed form and q-integral disagree beyond 1e-9");
    return f.closed_form;
}

namespace detail {

template <class Real>
std::optional<Real> integrand_tail_ratio(const grid_function<Real>& f, const Real& extra_power) {
    using std::pow;
    if (!f.tail_exponent) return std::nullopt;
    return pow(f.q, *f.tail_exponent + extra_power);
}

template <class Real>
long common_depth(const fourier_bessel_system<Real>& S, const grid_function<Real>& f) {
    f.validate();
    using std::abs;
    if (abs(f.q - S.ctx().q) > Real(64) * machine_epsilon<Real>())
        throw std::invalid_argument("grid function sampled with a different q");
    return std::min(static_cast<long>(f.depth()), S.depth());
}

}  // namespace detail

/// int_0^1 t f(t) J_nu(q j_k t) d_q t.
template <class Real>
quadrature_result<Real> coefficient_integral(const fourier_bessel_system<Real>& S,
                                             const grid_function<Real>& f, int k) {
    const long last = detail::common_depth(S, f);
    const Real& q = S.ctx().q;
    const Real one_minus_q = Real(1) - q;
    auto term = [&](long n) { return one_minus_q * ipow(q, 2 * n) * f.at(n) * S.basis(k, n); };
    return sum_grid_terms<Real>(term, 0, last, S.ctx().term_tol,
                                detail::integrand_tail_ratio(f, Real(2) + S.ctx().nu));
}

template <class Real>
fourier_coefficient<Real> compute_coefficient(const fourier_bessel_system<Real>& S,
                                              const grid_function<Real>& f, int k) {
    const Real eta = S.eta(k);
    return {k, coefficient_integral(S, f, k).value / eta, eta, coefficient_source::numeric_integral};
}

template <class Real>
std::vector<fourier_coefficient<Real>> compute_coefficients(const fourier_bessel_system<Real>& S,
                                                            const grid_function<Real>& f, int K) {
    if (K > S.size()) throw std::out_of_range("more coefficients requested than zeros available");
    std::vector<fourier_coefficient<Real>> out;
    out.reserve(static_cast<std::size_t>(std::max(K, 0)));
    for (int k = 1; k <= K; ++k) out.push_back(compute_coefficient(S, f, k));
    return out;
}

// ---------------------------------------------------------------------------
// Partial sums
// ---------------------------------------------------------------------------

/// S_K(q^n) from the tabulated basis, K = coeffs.size().
template <class Real>
Real partial_sum_at_node(const fourier_bessel_system<Real>& S,
                         const std::vector<fourier_coefficient<Real>>& coeffs, long n) {
    compensated_sum<Real> acc;
    for (const auto& c : coeffs) acc.add(c.value * S.basis(c.k, n));
    return acc.value();
}

/// S_K(x) for any x in [0,1].
template <class Real>
Real partial_sum(const fourier_bessel_system<Real>& S,
                 const std::vector<fourier_coefficient<Real>>& coeffs, const Real& x) {
    if (x < 0 || x > Real(1) / S.ctx().q) throw std::domain_error("partial sum evaluated outside [0,1/q]");
    compensated_sum<Real> acc;
    for (const auto& c : coeffs)
        acc.add(c.value * S.bessel().value(S.ctx().q * S.zero(c.k).value * x).value);
    return acc.value();
}

// ---------------------------------------------------------------------------
// Convergence diagnostics
// ---------------------------------------------------------------------------

template <class Real>
struct convergence_report {
    std::vector<int> partial_sum_depths;
    /// sup_{n <= N_grid} |f(q^n) - S_K(q^n)| for each K.
    std::vector<Real> sup_errors;
    /// |f(q^n) - S_{K_max}(q^n)|, n = 0..N_grid.
    std::vector<Real> point_errors;
    /// sup_{n <= N_grid} |a_k J(q^{n+1} j_k)|, k = 1..K_max.
    std::vector<Real> term_sup;
    double error_rate = std::numeric_limits<double>::quiet_NaN();
    double term_rate = std::numeric_limits<double>::quiet_NaN();
    double holder_order = std::numeric_limits<double>::quiet_NaN();
    bool sup_errors_monotone = true;
    bool limit_finite = false;
    bool weighted_l2_finite = false;
    std::vector<std::string> warnings;
    std::vector<fourier_coefficient<Real>> coefficients;

    bool hypotheses_hold() const { return warnings.empty(); }
};

/// Fitted lambda in |f(q^{n-1}) - f(q^n)| ~ M q^{lambda n}; uses n in [2, N-2]
/// (and n = 0, 1 when f(q^{-1}) is known), skipping zero differences.
template <class Real>
double holder_order_estimate(const grid_function<Real>& f, long N) {
    N = std::min(N, static_cast<long>(f.depth()));
    const long first = f.pre_value ? 0 : 2;
    std::vector<double> xs, ys;
    for (long n = first; n <= N - 2; ++n) {
        const Real d = f.at(n - 1) - f.at(n);
        if (d == 0) continue;
        xs.push_back(static_cast<double>(n));
        ys.push_back(log2_abs(d));
    }
    const double slope = ls_slope(xs.data(), ys.data(), xs.size());
    return slope / std::log2(to_double(f.q));
}

namespace detail {

/// 2^{slope} of a least-squares fit of log2 v_i against i, over the
/// entries above `floor`.
template <class Real>
double geometric_rate(const std::vector<Real>& v, const Real& floor) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > floor)) continue;
        xs.push_back(static_cast<double>(i));
        ys.push_back(log2_abs(v[i]));
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return std::exp2(ls_slope(xs.data(), ys.data(), xs.size()));
}

}  // namespace detail

template <class Real>
convergence_report<Real> make_convergence_report(const fourier_bessel_system<Real>& S,
                                                 const grid_function<Real>& f, int K_max, long N_grid) {
    using std::abs;
    if (K_max < 1 || K_max > S.size()) throw std::out_of_range("K_max outside 1..number of zeros");
    const long depth = detail::common_depth(S, f);
    if (N_grid < 0 || N_grid > depth) throw std::out_of_range("N_grid outside 0..grid depth");
    convergence_report<Real> rep;
    rep.coefficients = compute_coefficients(S, f, K_max);
    const auto& a = rep.coefficients;
    const Real eps = machine_epsilon<Real>();

    Real scale(0);
    for (long n = 0; n <= N_grid; ++n) scale = std::max(scale, Real(abs(f.at(n))));

    // Running partial sums per node, accumulated in k order.
    std::vector<compensated_sum<Real>> sums(static_cast<std::size_t>(N_grid) + 1);
    for (int K = 1; K <= K_max; ++K) {
        const auto& c = a[static_cast<std::size_t>(K - 1)];
        Real sup(0), tsup(0);
        for (long n = 0; n <= N_grid; ++n) {
            const Real term = c.value * S.basis(K, n);
            sums[n].add(term);
            tsup = std::max(tsup, Real(abs(term)));
            sup = std::max(sup, Real(abs(f.at(n) - sums[n].value())));
        }
        rep.partial_sum_depths.push_back(K);
        rep.sup_errors.push_back(sup);
        rep.term_sup.push_back(tsup);
    }
    for (long n = 0; n <= N_grid; ++n) rep.point_errors.push_back(abs(f.at(n) - sums[n].value()));

    // Noise allowance: 10 binary64 epsilons of the function scale.
    const Real noise = Real(10 * std::numeric_limits<double>::epsilon()) * std::max(scale, Real(1));
    for (std::size_t i = 1; i < rep.sup_errors.size(); ++i)
        if (rep.sup_errors[i] > rep.sup_errors[i - 1] + noise) rep.sup_errors_monotone = false;

    const Real floor = Real(100) * eps * std::max(scale, Real(1));
    rep.error_rate = detail::geometric_rate(rep.sup_errors, floor);
    rep.term_rate = detail::geometric_rate(rep.term_sup, Real(0));
    rep.holder_order = holder_order_estimate(f, depth);

    // f(0+) finite: given, or the samples settle.
    if (f.limit_value) {
        rep.limit_finite = true;
    } else {
        const Real d = abs(f.at(depth) - f.at(depth - 1));
        rep.limit_finite = d <= Real(1e-6) * std::max(scale, Real(1));
    }
    // t^{-3/2} f in L^2_q: the terms (f(q^n)/q^n)^2 must decay.
    {
        const long tail_from = std::max(1L, depth - std::max(4L, depth / 4));
        bool decaying = true;
        Real sum(0), last(0);
        for (long n = 0; n <= depth; ++n) {
            const Real t = f.at(n) / ipow(f.q, n);
            last = t * t;
            sum += last;
            if (n >= tail_from) {
                const Real tp = f.at(n - 1) / ipow(f.q, n - 1);
                if (last > tp * tp && last != 0) decaying = false;
            }
        }
        rep.weighted_l2_finite = decaying && (sum == 0 || last <= Real(1e-6) * sum);
    }

    if (!(S.ctx().nu > 0)) rep.warnings.push_back("nu <= 0: uniform convergence not covered");
    if (!(rep.holder_order > 1.0))
        rep.warnings.push_back("fitted Hoelder order " + format_double(rep.holder_order) + " <= 1");
    if (!rep.limit_finite) rep.warnings.push_back("f(0+) does not appear finite");
    if (!rep.weighted_l2_finite) rep.warnings.push_back("sum (f(q^n)/q^n)^2 does not appear to converge");
    return rep;
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

template <class Real>
struct coefficient_identity_report {
    Real lhs;
    Real rhs;
    /// (1-q) q^{nu-2} f(q^{-1}) J(q j) / j^2
    Real boundary;
    /// The square-bracketed combination of the four q-integrals.
    Real bracket;
    /// (1-q)^2 q^{nu-3} / ((q^{1/2} - q^{-1/2})^2 j^2), which equals q^{nu-2}/j^2.
    Real bracket_factor;
    Real relative() const { return relative_difference(lhs, rhs); }
};

/// int_0^1 t f(t) J(q j t) d_q t
///   = (1-q) q^{nu-2} f(q^{-1}) J(q j)/j^2
///     + (1-q)^2 q^{nu-3} / ((q^{1/2}-q^{-1/2})^2 j^2)
///       * [ (q^{nu/2} - q^{-nu/2}) (q^{nu/2} I1 - q^{-nu/2} I2)
///           - q^{nu/2} (q^{nu/2} I3 - q^{-nu/2} I4) ]
/// with I1 = int J f(qt)/t, I2 = int J f(t)/t, I3 = int J (f(qt)-f(t))/t,
/// I4 = int J (f(t)-f(t/q))/t, all with J = J(q j t). Follows from the
/// three-term difference relation and J(j) = 0. Needs f(q^{-1}).
template <class Real>
coefficient_identity_report<Real> check_coefficient_integral_identity(
    const fourier_bessel_system<Real>& S, const grid_function<Real>& f, int k) {
    using std::pow;
    using std::sqrt;
    if (!f.pre_value) throw std::invalid_argument("identity needs f(q^{-1})");
    const long last = detail::common_depth(S, f);
    const auto& ctx = S.ctx();
    const Real& q = ctx.q;
    const Real& nu = ctx.nu;
    const Real one_minus_q = Real(1) - q;
    const Real j = S.zero(k).value;
    const Real tol = ctx.term_tol;
    const auto tail = detail::integrand_tail_ratio(f, nu);

    // int_0^1 J(q j t) g(t)/t d_q t = (1-q) sum_n J(q^{n+1} j) g(q^n).
    auto integral = [&](auto&& g, long upto) {
        auto term = [&](long n) { return one_minus_q * S.basis(k, n) * g(n); };
        return sum_grid_terms<Real>(term, 0, upto, tol, tail).value;
    };
    const Real I1 = integral([&](long n) { return f.at(n + 1); }, last - 1);
    const Real I2 = integral([&](long n) { return f.at(n); }, last);
    const Real I3 = integral([&](long n) { return f.at(n + 1) - f.at(n); }, last - 1);
    const Real I4 = integral([&](long n) { return f.at(n) - f.at(n - 1); }, last);

    const Real lhs = coefficient_integral(S, f, k).value;
    const Real h = pow(q, nu / Real(2));
    const Real hi = Real(1) / h;
    const Real s = sqrt(q) - Real(1) / sqrt(q);
    const Real boundary = one_minus_q * pow(q, nu - Real(2)) * *f.pre_value * S.basis(k, 0) / (j * j);
    const Real factor = one_minus_q * one_minus_q * pow(q, nu - Real(3)) / (s * s * j * j);
    const Real bracket = (h - hi) * (h * I1 - hi * I2) - h * (h * I3 - hi * I4);
    return {lhs, boundary + factor * bracket, boundary, bracket, factor};
}

/// int_0^1 x J(q j_n x) J(q j_m x) d_q x.
template <class Real>
Real orthogonality_integral(const fourier_bessel_system<Real>& S, int n, int m) {
    const Real& q = S.ctx().q;
    const Real one_minus_q = Real(1) - q;
    auto term = [&](long i) { return one_minus_q * ipow(q, 2 * i) * S.basis(n, i) * S.basis(m, i); };
    // Off-diagonal sums cancel to ~0, so a relative stopping rule cannot
    // trigger; the full tabulated depth is used and the tail is checked
    // against the diagonal scale instead.
    compensated_sum<Real> acc;
    for (long i = 0; i <= S.depth(); ++i) acc.add(term(i));
    using std::abs;
    using std::sqrt;
    const Real last = abs(term(S.depth()));
    if (last > S.ctx().term_tol * sqrt(abs(S.eta(n) * S.eta(m))))
        throw convergence_error("orthogonality sum not converged at grid depth");
    return acc.value();
}

/// int_0^1 t f(t)^2 d_q t - sum_{k<=K} a_k^2 eta_k.
template <class Real>
Real parseval_defect(const fourier_bessel_system<Real>& S, const grid_function<Real>& f,
                     const std::vector<fourier_coefficient<Real>>& coeffs) {
    const long last = detail::common_depth(S, f);
    const Real& q = S.ctx().q;
    const Real one_minus_q = Real(1) - q;
    auto term = [&](long n) { return one_minus_q * ipow(q, 2 * n) * f.at(n) * f.at(n); };
    std::optional<Real> tail;
    if (f.tail_exponent) {
        using std::pow;
        tail = pow(q, Real(2) * *f.tail_exponent + Real(2));
    }
    const Real norm = sum_grid_terms<Real>(term, 0, last, S.ctx().term_tol, tail).value;
    compensated_sum<Real> acc;
    acc.add(norm);
    for (const auto& c : coeffs) acc.add(-c.value * c.value * c.eta);
    return acc.value();
}

/// Grid samples of S_K for the given coefficients, n = 0..depth.
template <class Real>
grid_function<Real> partial_sum_grid(const fourier_bessel_system<Real>& S,
                                     const std::vector<fourier_coefficient<Real>>& coeffs) {
    return sample_by_index<Real>(
        S.ctx().q, static_cast<std::size_t>(S.depth()),
        [&](long n) { return partial_sum_at_node(S, coeffs, n); }, false);
}

/// Coefficients of S_K re-extracted for k = 1..k_max.
template <class Real>
std::vector<fourier_coefficient<Real>> roundtrip_coefficients(
    const fourier_bessel_system<Real>& S, const std::vector<fourier_coefficient<Real>>& coeffs, int k_max) {
    const auto g = partial_sum_grid(S, coeffs);
    return compute_coefficients(S, g, k_max);
}

}  // namespace qfb
