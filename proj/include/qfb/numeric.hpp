#pragma once

// Scalar plumbing shared by every qfb module: the multiprecision type,
// working-precision control, compensated summation and formatting helpers.
//
// All algorithms are templates over a `Real` type. `double` works for
// small arguments; anything that touches zeros beyond the first few needs
// `mp_real`, because evaluating J_nu(z;q^2) near z ~ q^{-k} cancels about
// 2*log2(1/q)*k^2 bits.

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <type_traits>

namespace qfb {

using mp_real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                              boost::multiprecision::et_off>;

/// Raised when a sum or product does not meet its truncation criterion.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an identity check disagrees beyond its tolerance in a way that
/// indicates an evaluation failure rather than a property violation.
class conditioning_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Real>
inline constexpr bool is_mp_v = boost::multiprecision::is_number<Real>::value;

// ---------------------------------------------------------------------------
// Working precision
// ---------------------------------------------------------------------------

inline unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Bits needed so that J_nu(z;q^2), its zeros up to index `k_max` and the
/// grid values J_nu(q^{n+1} j_k) keep ~64 good bits after cancellation.
inline unsigned required_precision_bits(double q, double nu, int k_max) {
    const double lg = -std::log2(q);
    const double m = static_cast<double>(std::max(k_max, 1)) + std::max(nu, 0.0) + 1.0;
    return static_cast<unsigned>(std::ceil(2.0 * lg * m * m)) + 192U;
}

/// Sets the process-wide default precision of mp_real for its lifetime.
/// Values created inside the scope carry that precision; create the context
/// after the guard.
class working_precision {
public:
    explicit working_precision(unsigned bits) : saved_(mp_real::default_precision()) {
        mp_real::default_precision(bits_to_digits10(std::max(bits, 64U)));
    }
    ~working_precision() { mp_real::default_precision(saved_); }
    working_precision(const working_precision&) = delete;
    working_precision& operator=(const working_precision&) = delete;

    static unsigned current_bits() {
        return static_cast<unsigned>(std::ceil(mp_real::default_precision() / 0.30102999566398120));
    }

private:
    unsigned saved_;
};

template <class Real>
Real machine_epsilon() {
    return std::numeric_limits<Real>::epsilon();
}

template <class Real>
double to_double(const Real& x) {
    return static_cast<double>(x);
}

template <class Real>
Real from_string(const std::string& s) {
    if constexpr (is_mp_v<Real>) {
        return Real(s);
    } else {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("not a number: " + s);
        return static_cast<Real>(v);
    }
}

/// Rounds to `digits` significant decimal digits. Used to canonicalise
/// cached quantities so cold and warm cache runs see identical inputs.
template <class Real>
Real round_significant(const Real& x, int digits) {
    if constexpr (is_mp_v<Real>) {
        if (x == 0) return x;
        return Real(x.str(digits, std::ios_base::scientific));
    } else {
        return x;
    }
}

// ---------------------------------------------------------------------------
// Formatting: '.' separator, no locale. Values representable as binary64 are
// printed as shortest round-trip decimals; values outside the binary64 range
// (e.g. a_40 ~ 1e-500) are printed with 17 significant digits.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class Real>
bool fits_double(const Real& x) {
    using std::abs;
    if (x == 0) return true;
    const Real ax = abs(x);
    return ax >= Real(std::numeric_limits<double>::min()) &&
           ax <= Real(std::numeric_limits<double>::max());
}

template <class Real>
std::string format_real(const Real& x) {
    if constexpr (is_mp_v<Real>) {
        if (boost::multiprecision::isnan(x)) return "nan";
        if (fits_double(x)) return format_double(static_cast<double>(x));
        std::string s = x.str(17, std::ios_base::scientific);
        return s;
    } else {
        return format_double(static_cast<double>(x));
    }
}

/// Decimal string with `digits` significant digits (mp) or shortest
/// round-trip form (double).
template <class Real>
std::string to_decimal(const Real& x, int digits) {
    if constexpr (is_mp_v<Real>) {
        return x.str(digits, std::ios_base::scientific);
    } else {
        return format_double(static_cast<double>(x));
    }
}

// ---------------------------------------------------------------------------
// Compensated (Neumaier) summation with a running magnitude for error
// estimates.
// ---------------------------------------------------------------------------

template <class Real>
class compensated_sum {
public:
    compensated_sum() : sum_(0), comp_(0), abs_sum_(0), peak_(0) {}

    void add(const Real& x) {
        using std::abs;
        const Real t = sum_ + x;
        if (abs(sum_) >= abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
        const Real ax = abs(x);
        abs_sum_ += ax;
        if (ax > peak_) peak_ = ax;
    }

    Real value() const { return sum_ + comp_; }
    /// Sum of |terms|; the rounding error is at most a few eps of this.
    const Real& abs_sum() const { return abs_sum_; }
    const Real& peak() const { return peak_; }

private:
    Real sum_;
    Real comp_;
    Real abs_sum_;
    Real peak_;
};

// ---------------------------------------------------------------------------
// Small numeric helpers
// ---------------------------------------------------------------------------

template <class Real>
Real ipow(const Real& base, long long e) {
    if (e < 0) return Real(1) / ipow(base, -e);
    Real result(1);
    Real b = base;
    while (e > 0) {
        if (e & 1) result *= b;
        b *= b;
        e >>= 1;
    }
    return result;
}

template <class Real>
Real relative_difference(const Real& a, const Real& b) {
    using std::abs;
    const Real scale = std::max(abs(a), abs(b));
    if (scale == 0) return Real(0);
    return abs(a - b) / scale;
}

/// Least-squares slope of ys against xs.
inline double ls_slope(const double* xs, const double* ys, std::size_t n) {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxx == 0 ? std::numeric_limits<double>::quiet_NaN() : sxy / sxx;
}

/// log2|x| that works for mp values far outside the double range.
template <class Real>
double log2_abs(const Real& x) {
    using std::abs;
    using std::log2;
    if (x == 0) return -std::numeric_limits<double>::infinity();
    if constexpr (is_mp_v<Real>) {
        return static_cast<double>(boost::multiprecision::log2(abs(x)));
    } else {
        return std::log2(std::abs(static_cast<double>(x)));
    }
}

}  // namespace qfb
