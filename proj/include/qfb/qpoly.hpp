#pragma once

// The polynomials P_n(x;q) with J_nu(q^{n+1} j;q^2) = J_nu(q j;q^2) P_n(j^2;q)
// at the zeros j of J_nu, three constructions of their coefficients
// a_j^{(n,nu)}, and the finite-sum identities the explicit formula rests on.

#include "numeric.hpp"
#include "qbessel.hpp"
#include "qcore.hpp"
#include "zeros.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qfb {

template <class Real>
struct poly_p {
    int n = 0;
    std::vector<Real> coeffs;  // coeffs[j] = a_j^{(n,nu)}, j = 0..n
};

/// a_0^{(n,nu)} = q^{-n nu} sum_{i=0}^{n} q^{2 nu i}.
template <class Real>
Real poly_a0(const Real& q, const Real& nu, int n) {
    using std::pow;
    if (n < 0) return Real(0);
    const Real r = pow(q, Real(2) * nu);
    Real s(0);
    Real p(1);
    for (int i = 0; i <= n; ++i) {
        s += p;
        p *= r;
    }
    return pow(q, -Real(n) * nu) * s;
}

/// a_n^{(n,nu)} = (-1)^n q^{n(n+1-nu)}.
template <class Real>
Real poly_leading(const Real& q, const Real& nu, int n) {
    using std::pow;
    const Real v = pow(q, Real(n) * (Real(n + 1) - nu));
    return (n % 2 == 0) ? v : Real(-v);
}

/// All P_0..P_n from P_{m+1} = [(q^nu + q^{-nu}) - q^{-nu+2(m+1)} x] P_m - P_{m-1}.
template <class Real>
std::vector<poly_p<Real>> poly_p_family(const basic_context<Real>& ctx, int n) {
    using std::pow;
    if (n < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    const Real& q = ctx.q;
    const Real qn = pow(q, ctx.nu);
    const Real c = qn + Real(1) / qn;
    std::vector<poly_p<Real>> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back({0, {Real(1)}});
    std::vector<Real> prev;  // P_{-1} = 0
    for (int m = 0; m < n; ++m) {
        const auto& cur = out.back().coeffs;
        const Real lin = ipow(q, 2 * (m + 1)) / qn;
        std::vector<Real> next(static_cast<std::size_t>(m) + 2, Real(0));
        for (int j = 0; j <= m + 1; ++j) {
            Real v(0);
            if (j <= m) v += c * cur[j];
            if (j >= 1) v -= lin * cur[j - 1];
            if (j < static_cast<int>(prev.size())) v -= prev[j];
            next[j] = v;
        }
        prev = cur;
        out.push_back({m + 1, std::move(next)});
    }
    return out;
}

template <class Real>
poly_p<Real> poly_p_by_recurrence(const basic_context<Real>& ctx, int n) {
    return poly_p_family(ctx, n).back();
}

/// a_j^{(n,nu)} = -q^{2-nu} sum_{l=0}^{n-j} q^{2(n-1-l)} a_0^{(l,nu)} a_{j-1}^{(n-1-l,nu)}.
template <class Real>
poly_p<Real> poly_p_by_convolution(const basic_context<Real>& ctx, int n) {
    using std::pow;
    if (n < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    const Real& q = ctx.q;
    const Real pre = -pow(q, Real(2) - ctx.nu);
    // table[m][j] = a_j^{(m,nu)}
    std::vector<std::vector<Real>> table(static_cast<std::size_t>(n) + 1);
    std::vector<Real> a0(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) a0[m] = poly_a0(q, ctx.nu, m);
    for (int m = 0; m <= n; ++m) {
        table[m].assign(static_cast<std::size_t>(m) + 1, Real(0));
        table[m][0] = a0[m];
        for (int j = 1; j <= m; ++j) {
            Real s(0);
            for (int l = 0; l <= m - j; ++l)
                s += ipow(q, 2 * (m - 1 - l)) * a0[l] * table[m - 1 - l][j - 1];
            table[m][j] = pre * s;
        }
    }
    return {n, table[n]};
}

enum class explicit_form { first, second };

namespace detail {

/// poch[e][len] = (Q^e;Q)_len for 0 <= e <= e_max, 0 <= len <= len_max.
template <class Real>
std::vector<std::vector<Real>> pochhammer_table(const Real& Q, int e_max, int len_max) {
    std::vector<std::vector<Real>> t(static_cast<std::size_t>(e_max) + 1);
    for (int e = 0; e <= e_max; ++e) {
        auto& row = t[e];
        row.reserve(static_cast<std::size_t>(len_max) + 1);
        row.push_back(Real(1));
        Real base = ipow(Q, e);
        for (int len = 1; len <= len_max; ++len) {
            row.push_back(row.back() * (Real(1) - base));
            base *= Q;
        }
    }
    return t;
}

}  // namespace detail

/// The explicit double-sum formula for a_j^{(n,nu)}; `form` selects the
/// two displayed, equivalent forms.
template <class Real>
poly_p<Real> poly_p_explicit(const basic_context<Real>& ctx, int n,
                             explicit_form form = explicit_form::first) {
    using std::pow;
    if (n < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    const Real& q = ctx.q;
    const Real& nu = ctx.nu;
    const Real Q = q * q;
    const auto P = detail::pochhammer_table(Q, n + 2, n + 1);
    std::vector<Real> a0(static_cast<std::size_t>(n) + 1);
    for (int m = 0; m <= n; ++m) a0[m] = poly_a0(q, nu, m);

    poly_p<Real> out{n, std::vector<Real>(static_cast<std::size_t>(n) + 1, Real(0))};
    for (int j = 0; j <= n; ++j) {
        Real s(0);
        for (int i = 0; 2 * i <= n - j; ++i) {
            const int r = n - j - 2 * i;
            Real t = a0[r] * ipow(q, 2 * i) * P[j][i] / P[1][i];
            if (form == explicit_form::first) {
                t *= P[1 + j][r] / P[1][r];
                t *= P[1 + n - 2 * i][i] / P[r + 2][i];
            } else {
                t *= P[1 + j][n - j - i] / P[1][n - j - i];
                t *= P[1 + r][1] / P[1 + n - j - i][1];
            }
            s += t;
        }
        const Real sign = (j % 2 == 0) ? Real(1) : Real(-1);
        out.coeffs[j] = sign * pow(q, Real(j) * (Real(j + 1) - nu)) * s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

template <class Real>
struct horner_result {
    Real value;
    /// sum_j |a_j| |x|^j; the rounding error is a small multiple of eps times this.
    Real abs_sum;
    Real condition() const {
        using std::abs;
        return value == 0 ? Real(0) : abs_sum / abs(value);
    }
};

template <class Real>
horner_result<Real> horner(const std::vector<Real>& coeffs, const Real& x) {
    using std::abs;
    Real v(0);
    Real a(0);
    const Real ax = abs(x);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        v = v * x + *it;
        a = a * ax + abs(*it);
    }
    return {v, a};
}

template <class Real>
struct factorization_check {
    Real residual;
    /// |J(j) R_n(j^2)| + propagated evaluation and rounding errors.
    Real estimate;
    /// |J(q j) P_n(j^2)|.
    Real scale;
    Real condition;
    bool ok() const { return residual <= estimate; }
};

/// |J(q^{n+1} j) - J(q j) P_n(j^2)| at a computed zero j.
///
/// For any x, J(q^{n+1} x) = J(q x) P_n(x^2) + J(x) R_n(x^2) where R_n obeys
/// the same recurrence with R_{-1} = 1, R_0 = 0. At a computed zero the
/// second term is the exact consequence of J(j) != 0, so it enters the
/// estimate together with the evaluation bounds.
template <class Real>
factorization_check<Real> check_factorization(const hahn_exton<Real>& J, const bessel_zero<Real>& z,
                                              int n) {
    using std::abs;
    using std::pow;
    if (n < 0) throw std::invalid_argument("polynomial degree must be >= 0");
    const auto& ctx = J.ctx();
    const Real& q = ctx.q;
    const Real x = z.value * z.value;
    const auto p = poly_p_by_recurrence(ctx, n);
    const auto h = horner(p.coeffs, x);

    const Real qn = pow(q, ctx.nu);
    const Real c = qn + Real(1) / qn;
    Real r_prev(1), r_cur(0);
    Real r_abs_prev(1), r_abs_cur(0);
    for (int m = 0; m < n; ++m) {
        const Real coef = c - ipow(q, 2 * (m + 1)) / qn * x;
        const Real r_next = coef * r_cur - r_prev;
        const Real a_next = abs(coef) * r_abs_cur + r_abs_prev;
        r_prev = r_cur;
        r_cur = r_next;
        r_abs_prev = r_abs_cur;
        r_abs_cur = a_next;
    }

    const auto jq = J.value(q * z.value);
    const auto jn = J.value(ipow(q, n + 1) * z.value);
    const auto j0 = J.value(z.value);
    const Real rhs = jq.value * h.value;
    const Real residual = abs(jn.value - rhs);
    const Real eps = machine_epsilon<Real>();
    const Real est = abs(j0.value) * (abs(r_cur) + Real(4 * (n + 2)) * eps * r_abs_cur) +
                     jn.error_bound() + jq.error_bound() * abs(h.value) +
                     Real(4 * (n + 2)) * eps * h.abs_sum * abs(jq.value) +
                     Real(4) * eps * (abs(jn.value) + abs(rhs));
    return {residual, Real(4) * est, abs(rhs), h.condition()};
}

// ---------------------------------------------------------------------------
// Finite-sum identities (base q)
// ---------------------------------------------------------------------------

template <class Real>
struct identity_sides {
    Real lhs;
    Real rhs;
    Real relative() const { return relative_difference(lhs, rhs); }
};

/// sum_{k=0}^{i} q^k (q^j;q)_k/(q;q)_k  vs  (q^{1+j};q)_i/(q;q)_i.
template <class Real>
identity_sides<Real> finite_sum_identity(const Real& q, int i, int j) {
    compensated_sum<Real> L;
    for (int k = 0; k <= i; ++k)
        L.add(ipow(q, k) * q_pochhammer(ipow(q, j), q, k) / q_pochhammer(q, q, k));
    const Real R = q_pochhammer(ipow(q, 1 + j), q, i) / q_pochhammer(q, q, i);
    return {L.value(), R};
}

/// sum_{k=0}^{i} q^{2k} (q^{j-1};q)_k/(q;q)_k (q^{1+i+l-k};q)_1
///   vs (q;q)_1 (q^{j+1};q)_i/(q;q)_i + (q^l;q)_1 q^{1+i} (q^j;q)_i/(q;q)_i.
template <class Real>
identity_sides<Real> lambda_identity(const Real& q, int i, int j, int l) {
    compensated_sum<Real> L;
    for (int k = 0; k <= i; ++k)
        L.add(ipow(q, 2 * k) * q_pochhammer(ipow(q, j - 1), q, k) / q_pochhammer(q, q, k) *
              q_pochhammer(ipow(q, 1 + i + l - k), q, 1));
    const Real qi = q_pochhammer(q, q, i);
    const Real R = q_pochhammer(q, q, 1) * q_pochhammer(ipow(q, j + 1), q, i) / qi +
                   q_pochhammer(ipow(q, l), q, 1) * ipow(q, 1 + i) * q_pochhammer(ipow(q, j), q, i) / qi;
    return {L.value(), R};
}

/// The nested sum over k and l against (q^{1+j};q)_{n+i}/(q;q)_{n+i}
/// (q^{1+n};q)_1/(q^{1+n+i};q)_1.
template <class Real>
identity_sides<Real> finit_sum_identity(const Real& q, int n, int i, int j) {
    compensated_sum<Real> L;
    for (int k = 0; k <= i; ++k) {
        compensated_sum<Real> inner;
        for (int l = 0; l <= n; ++l)
            inner.add(ipow(q, l) * q_pochhammer(ipow(q, j + i), q, l) / q_pochhammer(ipow(q, 1 + i), q, l) *
                      q_pochhammer(ipow(q, 1 + i + l - k), q, 1) / q_pochhammer(ipow(q, 1 + i + l), q, 1));
        L.add(ipow(q, 2 * k) * q_pochhammer(ipow(q, j - 1), q, k) / q_pochhammer(q, q, k) * inner.value());
    }
    const Real R = q_pochhammer(ipow(q, 1 + j), q, n + i) / q_pochhammer(q, q, n + i) *
                   q_pochhammer(ipow(q, 1 + n), q, 1) / q_pochhammer(ipow(q, 1 + n + i), q, 1);
    return {L.value(), R};
}

/// sum_l a0(l) a0(m-l) g_l  vs  sum_{t=0}^{[m/2]} a0(m-2t) sum_{l=t}^{m-t} g_l.
template <class Real>
identity_sides<Real> product_coefficients_identity(const Real& q, const Real& nu, int m,
                                                   const std::vector<Real>& gamma) {
    if (static_cast<int>(gamma.size()) <= m) throw std::invalid_argument("gamma sequence too short");
    compensated_sum<Real> L, R;
    for (int l = 0; l <= m; ++l) L.add(poly_a0(q, nu, l) * poly_a0(q, nu, m - l) * gamma[l]);
    for (int t = 0; 2 * t <= m; ++t) {
        compensated_sum<Real> g;
        for (int l = t; l <= m - t; ++l) g.add(gamma[l]);
        R.add(poly_a0(q, nu, m - 2 * t) * g.value());
    }
    return {L.value(), R.value()};
}

/// a0(l) a0(m-l) vs sum_{t=0}^{min(l,m-l)} a0(m-2t).
template <class Real>
identity_sides<Real> a0_convolution_identity(const Real& q, const Real& nu, int l, int m) {
    compensated_sum<Real> R;
    for (int t = 0; t <= std::min(l, m - l); ++t) R.add(poly_a0(q, nu, m - 2 * t));
    return {poly_a0(q, nu, l) * poly_a0(q, nu, m - l), R.value()};
}

/// Uniform values in [-1,1] from mt19937_64 (whose output sequence is fixed
/// by the standard, unlike the library distributions).
template <class Real>
std::vector<Real> seeded_gamma(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 gen(seed);
    std::vector<Real> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        out.push_back(Real(2.0 * u - 1.0));
    }
    return out;
}

template <class Real>
struct finite_sum_report {
    Real finite_sum{0};
    Real lambda{0};
    Real finit_sum{0};
    Real product_coefficients{0};
    Real convolution{0};
    std::size_t cases = 0;

    Real max() const {
        return std::max({finite_sum, lambda, finit_sum, product_coefficients, convolution});
    }
};

/// Maximum relative residual of each identity over 0 <= i,j,n,l,m <= max_index
/// and the given gamma seeds.
template <class Real>
finite_sum_report<Real> check_finite_sum_identities(const Real& q, const Real& nu, int max_index,
                                                    const std::vector<std::uint64_t>& seeds) {
    if (!(q > 0 && q < 1)) throw std::invalid_argument("q must lie in (0,1)");
    finite_sum_report<Real> rep;
    auto upd = [&](Real& slot, const identity_sides<Real>& s) {
        const Real r = s.relative();
        if (r > slot) slot = r;
        ++rep.cases;
    };
    for (int i = 0; i <= max_index; ++i)
        for (int j = 0; j <= max_index; ++j) {
            upd(rep.finite_sum, finite_sum_identity(q, i, j));
            for (int l = 0; l <= max_index; ++l) upd(rep.lambda, lambda_identity(q, i, j, l));
            for (int n = 0; n <= max_index; ++n) upd(rep.finit_sum, finit_sum_identity(q, n, i, j));
        }
    for (auto seed : seeds) {
        const auto gamma = seeded_gamma<Real>(seed, static_cast<std::size_t>(max_index) + 1);
        for (int m = 0; m <= max_index; ++m)
            upd(rep.product_coefficients, product_coefficients_identity(q, nu, m, gamma));
    }
    for (int m = 0; m <= max_index; ++m)
        for (int l = 0; l <= m; ++l) upd(rep.convolution, a0_convolution_identity(q, nu, l, m));
    return rep;
}

}  // namespace qfb
