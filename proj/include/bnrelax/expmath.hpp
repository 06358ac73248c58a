#pragma once

// Stable evaluation of the exponential-difference expressions that appear in
// closed-form solutions of linear relaxation ODEs.  All rates are decay rates
// (a, b >= 0 in the intended use), all results stay finite for tau >= 0 and
// degenerate limits (equal rates, vanishing rates) are reached continuously.

#include <algorithm>
#include <cmath>

namespace bnrelax {

// one_m_exp_over(x) = (1 - e^{-x}) / x, continuous value 1 at x = 0.
// expm1 keeps full relative accuracy for small |x|.
inline double one_m_exp_over(double x) {
    if (x == 0.0) return 1.0;
    return -std::expm1(-x) / x;
}

// int_exp(a, tau) = ∫_0^tau e^{-a s} ds = tau * one_m_exp_over(a*tau).
inline double int_exp(double a, double tau) {
    return tau * one_m_exp_over(a * tau);
}

// exp_diff(a, b, tau) = (e^{-a tau} - e^{-b tau}) / (b - a),
// continuous limit tau * e^{-a tau} as b -> a.  Factoring out the slower
// decay keeps every factor positive, so no cancellation for any a, b >= 0.
inline double exp_diff(double a, double b, double tau) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    return std::exp(-lo * tau) * tau * one_m_exp_over((hi - lo) * tau);
}

// second_moment(x) = ∫_0^1 s e^{-x s} ds = (1 - (1 + x) e^{-x}) / x^2.
// Value 1/2 at x = 0.  Series branch below x = 0.5 where the direct form
// cancels.
inline double second_moment(double x) {
    if (x < 0.5) {
        // sum_{n>=0} (-x)^n (n+1)/(n+2)!
        double term = 0.5;  // n = 0
        double sum = term;
        for (int n = 1; n < 30; ++n) {
            term *= -x * static_cast<double>(n + 1) /
                    (static_cast<double>(n) * static_cast<double>(n + 2));
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return (1.0 - (1.0 + x) * std::exp(-x)) / (x * x);
}

// int_exp_diff(a, b, tau) = ∫_0^tau exp_diff(a, b, s) ds
//                         = [int_exp(lo,tau) - int_exp(hi,tau)] / (hi - lo).
// When the two rates are closer than the cancellation threshold the midpoint
// limit ∫_0^tau s e^{-m s} ds = tau^2 * second_moment(m*tau) is used; its
// error is O(((hi-lo)/2)^2), below round-off at the switch point.
inline double int_exp_diff(double a, double b, double tau) {
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    const double d = hi - lo;
    const double inv_tau = (tau > 0.0) ? 1.0 / tau : 0.0;
    if (d <= 5e-6 * std::max(hi, inv_tau)) {
        const double m = 0.5 * (a + b);
        return tau * tau * second_moment(m * tau);
    }
    return (int_exp(lo, tau) - int_exp(hi, tau)) / d;
}

}  // namespace bnrelax
