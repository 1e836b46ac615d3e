#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

namespace weber::numeric {

struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

/// Probes f at `probes + 1` uniform points on [lo, hi] and returns the first
/// sub-interval over which f changes sign (or touches zero).
template <class F>
std::optional<Bracket> scan_for_sign_change(F&& f, double lo, double hi, int probes = 64) {
    double a = lo;
    double fa = f(a);
    if (fa == 0.0) return Bracket{a, a, fa, fa};
    for (int i = 1; i <= probes; ++i) {
        double b = (i == probes) ? hi : lo + (hi - lo) * (static_cast<double>(i) / probes);
        double fb = f(b);
        if (fb == 0.0) return Bracket{b, b, fb, fb};
        if ((fa < 0.0) != (fb < 0.0)) return Bracket{a, b, fa, fb};
        a = b;
        fa = fb;
    }
    return std::nullopt;
}

struct RootResult {
    double x;
    double fx;
    int iterations;
};

/// Bisection on a sign-changing bracket. Halves until the midpoint is no
/// longer representable strictly between the endpoints (well below 1e-12
/// for brackets of order one), or `max_iter` is hit.
template <class F>
RootResult bisect(F&& f, Bracket br, int max_iter = 200) {
    if (br.lo == br.hi) return {br.lo, br.f_lo, 0};
    double a = br.lo, b = br.hi, fa = br.f_lo;
    int it = 0;
    for (; it < max_iter; ++it) {
        double m = a + 0.5 * (b - a);
        if (m <= std::fmin(a, b) || m >= std::fmax(a, b)) break;
        double fm = f(m);
        if (fm == 0.0) return {m, fm, it + 1};
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    double fb = f(b);
    return std::abs(fa) <= std::abs(fb) ? RootResult{a, fa, it} : RootResult{b, fb, it};
}

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
/// Returns the final bracket; its width is at most `tol` unless `max_iter`
/// ran out first.
template <class F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double tol, int max_iter = 500) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return {a, b};
}

}  // namespace weber::numeric
