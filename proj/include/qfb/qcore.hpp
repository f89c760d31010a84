#pragma once

// q-calculus primitives: q-shifted factorials, the Jackson q-integral on the
// q-linear grid, the symmetric q-derivative and q-integration by parts.

#include "numeric.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfb {

/// The pair (q, nu) plus the truncation policy used by every computation.
template <class Real>
struct basic_context {
    Real q;
    Real nu;
    /// Relative truncation tolerance for infinite sums and q-integrals.
    Real term_tol;
    std::size_t max_terms;
    /// Grid truncation index N: sampled functions live on {q^n : 0 <= n <= N}.
    std::size_t depth;

    basic_context(Real q_, Real nu_, Real term_tol_ = Real(1e-30), std::size_t max_terms_ = 100000,
                  std::size_t depth_ = 256)
        : q(std::move(q_)), nu(std::move(nu_)), term_tol(std::move(term_tol_)),
          max_terms(max_terms_), depth(depth_) {
        if (!(q > 0 && q < 1)) throw std::invalid_argument("q must lie in (0,1)");
        if (!(nu > -1)) throw std::invalid_argument("nu must exceed -1");
        if (!(term_tol > 0 && term_tol < 1)) throw std::invalid_argument("term_tol must lie in (0,1)");
        if (max_terms < 1) throw std::invalid_argument("max_terms must be positive");
    }

    /// Same q and policy, different order (J_{nu+1}, J_mu, ...).
    basic_context with_order(const Real& order) const {
        return basic_context(q, order, term_tol, max_terms, depth);
    }

    Real q2() const { return q * q; }
};

using context = basic_context<mp_real>;

// ---------------------------------------------------------------------------
// q-shifted factorials
// ---------------------------------------------------------------------------

struct infinite_length_t {};
inline constexpr infinite_length_t infinite_length{};

/// (a;q)_n for integer n. Negative n uses (a;q)_{-n} = 1/(a q^{-n};q)_n.
template <class Real>
Real q_pochhammer(const Real& a, const Real& q, long n) {
    if (n >= 0) {
        Real prod(1);
        Real aqi = a;
        for (long i = 0; i < n; ++i) {
            prod *= Real(1) - aqi;
            aqi *= q;
        }
        return prod;
    }
    const long m = -n;
    Real aqi = a * ipow(q, -m);
    Real denom(1);
    for (long i = 0; i < m; ++i) {
        const Real factor = Real(1) - aqi;
        if (factor == 0) throw std::domain_error("(a;q)_{-n}: a*q^{-n+i} = 1 makes a factor vanish");
        denom *= factor;
        aqi *= q;
    }
    return Real(1) / denom;
}

/// (a;q)_inf. Stops once |a q^i| <= tol and the remaining product is within
/// tol of 1 (log-bound |a q^i| / ((1-q)(1-|a q^i|))).
template <class Real>
Real q_pochhammer(const Real& a, const Real& q, infinite_length_t, const Real& tol,
                  std::size_t max_terms = 100000) {
    using std::abs;
    Real prod(1);
    Real aqi = a;
    for (std::size_t i = 0; i < max_terms; ++i) {
        const Real mag = abs(aqi);
        if (mag <= tol && mag < 1) {
            const Real tail = mag / ((Real(1) - q) * (Real(1) - mag));
            if (tail <= tol) return prod;
        }
        prod *= Real(1) - aqi;
        if (prod == 0) return prod;
        aqi *= q;
    }
    throw convergence_error("(a;q)_inf did not converge within max_terms");
}

template <class Real>
Real q_pochhammer(const Real& a, const Real& q, infinite_length_t) {
    return q_pochhammer(a, q, infinite_length, machine_epsilon<Real>());
}

// ---------------------------------------------------------------------------
// Functions sampled on the q-linear grid
// ---------------------------------------------------------------------------

/// f restricted to {q^n : 0 <= n <= N}, optionally with f(q^{-1}) and f(0+).
template <class Real>
struct grid_function {
    Real q;
    std::vector<Real> values;  // values[n] = f(q^n)
    std::optional<Real> pre_value;
    std::optional<Real> limit_value;
    /// Power-law tail model f(t) ~ C t^p near 0, used when the sampled tail
    /// has not decayed by depth N.
    std::optional<Real> tail_exponent;

    std::size_t depth() const { return values.empty() ? 0 : values.size() - 1; }

    /// f(q^n) for -1 <= n <= N.
    const Real& at(long n) const {
        if (n == -1) {
            if (!pre_value) throw std::out_of_range("grid function has no value at q^{-1}");
            return *pre_value;
        }
        if (n < 0 || static_cast<std::size_t>(n) >= values.size())
            throw std::out_of_range("grid index " + std::to_string(n) + " outside 0..N");
        return values[static_cast<std::size_t>(n)];
    }

    void validate() const {
        if (values.empty()) throw std::invalid_argument("grid function needs at least f(1)");
        for (std::size_t n = 0; n < values.size(); ++n) {
            const Real d = values[n] - values[n];
            if (!(d == 0)) throw std::invalid_argument("sample f(q^" + std::to_string(n) + ") is not finite");
        }
        if (pre_value) {
            const Real d = *pre_value - *pre_value;
            if (!(d == 0)) throw std::invalid_argument("f(q^{-1}) must be finite");
        }
        if (limit_value) {
            const Real d = *limit_value - *limit_value;
            if (!(d == 0))
                throw std::invalid_argument("limit value f(0+) must be finite");
        }
    }
};

/// Samples f at q^n, n = 0..depth; with_pre also stores f(q^{-1}).
/// `f` receives the grid index so exact node values (q^n) can be formed.
template <class Real, class IndexFn>
grid_function<Real> sample_by_index(const Real& q, std::size_t depth, IndexFn&& f, bool with_pre) {
    grid_function<Real> g{q, {}, std::nullopt, std::nullopt, std::nullopt};
    g.values.reserve(depth + 1);
    for (std::size_t n = 0; n <= depth; ++n) g.values.push_back(f(static_cast<long>(n)));
    if (with_pre) g.pre_value = f(-1L);
    return g;
}

template <class Real, class Fn>
grid_function<Real> sample(const Real& q, std::size_t depth, Fn&& f, bool with_pre) {
    return sample_by_index<Real>(
        q, depth, [&](long n) { return f(ipow(q, n)); }, with_pre);
}

// ---------------------------------------------------------------------------
// Jackson q-integral
// ---------------------------------------------------------------------------

template <class Real>
struct quadrature_result {
    Real value;
    std::size_t terms;
    Real tail_bound;
};

/// Sums the weighted terms w(n) for n = first, first+1, ... (as produced by a
/// Jackson q-integral). Stops once two consecutive terms satisfy
/// |w| <= tol*|S| and the geometric tail bound (ratio from the last two
/// terms) is also below tol*|S|. If `last` is reached first, applies the
/// power-law tail (ratio `tail_ratio`) when given, else throws.
template <class Real, class TermFn>
quadrature_result<Real> sum_grid_terms(TermFn&& term, long first, long last, const Real& tol,
                                       std::optional<Real> tail_ratio = std::nullopt) {
    using std::abs;
    compensated_sum<Real> acc;
    Real prev(0);
    bool have_prev = false;
    int quiet = 0;
    std::size_t count = 0;
    for (long n = first; n <= last; ++n) {
        const Real w = term(n);
        acc.add(w);
        ++count;
        const Real s = abs(acc.value());
        const Real aw = abs(w);
        bool small = aw <= tol * s;
        Real tail(0);
        if (small && have_prev && prev != 0) {
            const Real r = aw / abs(prev);
            if (r < 1) {
                tail = aw * r / (Real(1) - r);
                small = tail <= tol * s;
            } else {
                small = false;
            }
        } else if (aw == 0 && acc.abs_sum() == 0) {
            small = true;
        }
        quiet = small ? quiet + 1 : 0;
        if (quiet >= 2 && count >= 4) return {acc.value(), count, tail};
        prev = w;
        have_prev = true;
    }
    if (tail_ratio) {
        const Real r = *tail_ratio;
        if (!(r >= 0 && r < 1)) throw std::invalid_argument("tail model ratio must lie in [0,1)");
        const Real tail = prev * r / (Real(1) - r);
        acc.add(tail);
        return {acc.value(), count, abs(tail)};
    }
    throw convergence_error("q-integral tail has not decayed below tolerance by grid depth " +
                            std::to_string(last));
}

/// Integer m with upper = q^m (m >= -1), or throws.
template <class Real>
long grid_exponent_of(const Real& q, const Real& upper) {
    using std::abs;
    using std::log;
    if (!(upper > 0)) throw std::invalid_argument("upper limit must be positive");
    const double m = std::round(to_double(log(upper) / log(q)));
    if (m < -1) throw std::invalid_argument("upper limit above q^{-1} is not on the grid");
    const Real node = ipow(q, static_cast<long long>(m));
    if (abs(node - upper) > Real(64) * machine_epsilon<Real>() * upper)
        throw std::invalid_argument("upper limit is not a grid node q^m");
    return static_cast<long>(m);
}

/// int_0^{q^m} f(t) d_q t = (1-q) sum_{k>=0} f(q^{m+k}) q^{m+k}, from the
/// grid samples of f.
template <class Real>
quadrature_result<Real> q_integral_detailed(const grid_function<Real>& f, long m, const Real& tol) {
    f.validate();
    if (m < -1) throw std::invalid_argument("upper grid exponent must be >= -1");
    const Real one_minus_q = Real(1) - f.q;
    using std::pow;
    std::optional<Real> ratio;
    if (f.tail_exponent) ratio = pow(f.q, *f.tail_exponent + Real(1));
    auto term = [&](long n) { return one_minus_q * f.at(n) * ipow(f.q, n); };
    return sum_grid_terms<Real>(term, m, static_cast<long>(f.depth()), tol, ratio);
}

template <class Real>
Real q_integral(const grid_function<Real>& f, const Real& tol) {
    return q_integral_detailed(f, 0, tol).value;
}

template <class Real>
Real q_integral(const grid_function<Real>& f, const Real& upper, const Real& tol) {
    return q_integral_detailed(f, grid_exponent_of(f.q, upper), tol).value;
}

/// int_0^a F(t) d_q t for a callable F and arbitrary a > 0 (or a == 0).
template <class Real, class Fn>
quadrature_result<Real> q_integral_callable(Fn&& F, const Real& q, const Real& a, const Real& tol,
                                            std::size_t max_terms = 4096) {
    if (a == 0) return {Real(0), 0, Real(0)};
    const Real one_minus_q = Real(1) - q;
    auto term = [&](long n) {
        const Real x = a * ipow(q, n);
        return one_minus_q * F(x) * x;
    };
    return sum_grid_terms<Real>(term, 0, static_cast<long>(max_terms), tol);
}

// ---------------------------------------------------------------------------
// Symmetric q-difference and q-derivative
// ---------------------------------------------------------------------------

/// delta_q f(x) = f(q^{1/2} x) - f(q^{-1/2} x).
template <class Real, class Fn>
Real symmetric_q_difference(Fn&& f, const Real& q, const Real& x) {
    using std::sqrt;
    const Real h = sqrt(q);
    return f(h * x) - f(x / h);
}

/// delta_q f(x) / delta_q x; at x = 0 returns the supplied f'(0).
template <class Real, class Fn>
Real symmetric_q_derivative(Fn&& f, const Real& q, const Real& x,
                            std::optional<Real> derivative_at_zero = std::nullopt) {
    using std::sqrt;
    if (x == 0) {
        if (!derivative_at_zero)
            throw std::invalid_argument("symmetric q-derivative at 0 needs f'(0)");
        return *derivative_at_zero;
    }
    const Real h = sqrt(q);
    return symmetric_q_difference<Real>(f, q, x) / ((h - Real(1) / h) * x);
}

// ---------------------------------------------------------------------------
// q-integration by parts, as a checkable identity
// ---------------------------------------------------------------------------

template <class Real>
struct by_parts_report {
    Real lhs;
    Real rhs;
    Real residual;
};

namespace detail {

/// lim_{n->inf} F(x q^{1/2+n}) by tail stagnation.
template <class Real, class Fn>
Real grid_limit(Fn&& F, const Real& q, const Real& x, const Real& tol, std::size_t max_terms) {
    using std::abs;
    using std::sqrt;
    if (x == 0) return F(Real(0));
    Real point = x * sqrt(q);
    Real prev = F(point);
    int quiet = 0;
    for (std::size_t n = 1; n < max_terms; ++n) {
        point *= q;
        const Real cur = F(point);
        const Real scale = std::max(abs(cur), Real(1));
        quiet = (abs(cur - prev) <= tol * scale) ? quiet + 1 : 0;
        if (quiet >= 3) return cur;
        prev = cur;
    }
    throw convergence_error("boundary limit at 0 does not stagnate");
}

}  // namespace detail

/// Residual of
///   int_a^b g(q^{+-1/2}x) Dq f(x) d_qx
///     = -int_a^b f(q^{-+1/2}x) Dq g(x) d_qx
///       + q^{1/2} { [(fg)(b q^{-1/2}) - (fg)(a q^{-1/2})]
///                   - [lim (fg)(b q^{1/2+n}) - lim (fg)(a q^{1/2+n})] }.
/// `upper_shift` selects the upper signs. Integrals over (a,b) are
/// int_0^b - int_0^a. Limits that fail to stagnate raise convergence_error.
template <class Real, class F, class G>
by_parts_report<Real> check_q_integration_by_parts(F&& f, G&& g, const Real& q, const Real& a,
                                                   const Real& b, const Real& tol,
                                                   bool upper_shift = true,
                                                   std::size_t max_terms = 4096) {
    using std::abs;
    using std::sqrt;
    const Real h = sqrt(q);
    const Real s_left = upper_shift ? h : Real(1) / h;
    const Real s_right = upper_shift ? Real(1) / h : h;
    auto Dq = [&](auto&& fn, const Real& x) {
        return symmetric_q_derivative<Real>(fn, q, x, Real(0));
    };
    auto lhs_integrand = [&](const Real& x) { return g(s_left * x) * Dq(f, x); };
    auto rhs_integrand = [&](const Real& x) { return f(s_right * x) * Dq(g, x); };
    auto over = [&](auto&& fn) {
        return q_integral_callable<Real>(fn, q, b, tol, max_terms).value -
               q_integral_callable<Real>(fn, q, a, tol, max_terms).value;
    };
    auto fg = [&](const Real& x) { return f(x) * g(x); };

    const Real lhs = over(lhs_integrand);
    const Real boundary_top = fg(b / h) - fg(a / h);
    const Real boundary_limit = detail::grid_limit<Real>(fg, q, b, tol, max_terms) -
                                detail::grid_limit<Real>(fg, q, a, tol, max_terms);
    const Real rhs = -over(rhs_integrand) + h * (boundary_top - boundary_limit);
    return {lhs, rhs, abs(lhs - rhs)};
}

}  // namespace qfb
