#include "weber/nash.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "weber/numeric.hpp"

namespace weber {

double frontier_slope(const BargainingProblem& prob, double u1) {
    const double X = prob.resource();
    const double x1 = std::clamp(prob.utility1().inverse(u1, X), 0.0, X);
    return -prob.utility2().derivative(X - x1) / prob.utility1().derivative(x1);
}

NashSolution solve_asymmetric_nash(const BargainingProblem& prob, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Nash weight alpha must lie in (0, 1)");
    const double d1 = prob.d1(), d2 = prob.d2();
    const Interval r1 = prob.utility1_range();
    const Interval r2 = prob.utility2_range();
    double lo = std::max(d1, r1.lo);
    double hi = r1.hi;
    if (d2 > r2.lo) {
        if (d2 >= r2.hi) throw std::invalid_argument("defection point leaves no bargaining set");
        hi = std::min(hi, pareto_g(prob, d2));
    }
    if (!(hi > lo)) throw std::invalid_argument("degenerate feasible interval for the Nash product");
    const double margin = 1e-9 * (hi - lo);
    lo += margin;
    hi -= margin;

    auto log_product = [&](double u) {
        return alpha * std::log(u - d1) + (1.0 - alpha) * std::log(pareto_h(prob, u) - d2);
    };
    // Golden section alone stalls near sqrt(eps) relative because the
    // objective is flat at its peak, so the bracket it leaves is refined on
    // the first-order condition, which is strictly decreasing in u.
    auto [a, b] = numeric::golden_section_max(log_product, lo, hi, 1e-12 * (hi - lo));
    auto foc = [&](double u) {
        return alpha / (u - d1) + (1.0 - alpha) * frontier_slope(prob, u) / (pareto_h(prob, u) - d2);
    };
    const double pad = 1e-6 * (hi - lo);
    double left = std::max(lo, a - pad), right = std::min(hi, b + pad);
    double f_left = foc(left), f_right = foc(right);
    if (!(f_left > 0.0 && f_right < 0.0)) {
        left = lo;
        right = hi;
        f_left = foc(left);
        f_right = foc(right);
    }
    double u1 = 0.5 * (a + b);
    if (f_left > 0.0 && f_right < 0.0) u1 = numeric::bisect(foc, numeric::Bracket{left, right, f_left, f_right}).x;

    NashSolution s;
    s.alpha = alpha;
    s.u1 = u1;
    s.u2 = pareto_h(prob, u1);
    s.x1 = std::clamp(prob.utility1().inverse(u1, prob.resource()), 0.0, prob.resource());
    return s;
}

double nash_power_closed_form(double p, double q, double X) {
    if (!(p > 0.0) || !(q > 0.0)) throw std::invalid_argument("power exponents must be positive");
    return p * X / (p + q);
}

}  // namespace weber
