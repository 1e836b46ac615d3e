#include "weber/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "weber/numeric.hpp"

namespace weber {

namespace {

// Interval of u1 values the proposer can sit on: above its defection
// utility, and with the opponent still above theirs.
struct ProposerRange {
    double lo;
    double hi;
    bool empty;
};

ProposerRange proposer_range(const BargainingProblem& prob) {
    const Interval r1 = prob.utility1_range();
    const Interval r2 = prob.utility2_range();
    double lo = std::max(prob.d1(), r1.lo);
    double hi = r1.hi;
    if (prob.d2() > r2.hi) return {lo, hi, true};
    if (prob.d2() > r2.lo) hi = std::min(hi, pareto_g(prob, prob.d2()));
    return {lo, hi, !(hi > lo)};
}

ThresholdOutcome solve_as_player1(const BargainingProblem& prob, const WeberParams& k, int player) {
    ThresholdOutcome out;
    const ProposerRange range = proposer_range(prob);
    const double d1 = prob.d1(), d2 = prob.d2();
    const double u_top = prob.utility1_range().hi;
    // u + k1 (u - d1) must stay inside h's domain.
    const double hi = std::min(range.hi, (u_top + k.k1 * d1) / (1.0 + k.k1));
    if (range.empty || !(hi > range.lo)) {
        out.status = SolveStatus::Infeasible;
        out.reason = "player " + std::to_string(player) +
                     ": no utility level leaves room for a noticeable step within the frontier";
        return out;
    }

    auto G = [&](double u) {
        double upper = std::min(u + k.k1 * (u - d1), u_top);
        return pareto_h(prob, upper) - (1.0 - k.k2) * pareto_h(prob, u) - k.k2 * d2;
    };

    auto bracket = numeric::scan_for_sign_change(G, range.lo, hi);
    if (!bracket) {
        double g_lo = G(range.lo);
        out.status = g_lo > 0.0 ? SolveStatus::BoundaryOptimum : SolveStatus::Infeasible;
        out.reason = "player " + std::to_string(player) +
                     (g_lo > 0.0 ? ": opponent tolerance never binds; optimum on the frontier edge"
                                 : ": even the smallest noticeable step exceeds the opponent's tolerance");
        return out;
    }
    auto root = numeric::bisect(G, *bracket);
    const double u = root.x;
    if (!(u > d1)) {
        out.status = SolveStatus::Infeasible;
        out.reason = "player " + std::to_string(player) + ": degenerate optimum at the defection utility";
        return out;
    }

    ThresholdSolution s;
    s.player = player;
    s.u_star = u;
    s.w_star = k.k1 * (u - d1);
    s.x_star = std::clamp(prob.utility1().inverse(u, prob.resource()), 0.0, prob.resource());
    s.opponent_value_at_u = pareto_h(prob, u);
    s.residual = std::abs(root.fx) / std::max({1.0, std::abs(s.opponent_value_at_u), std::abs(d2)});
    out.status = SolveStatus::Solved;
    out.solution = s;
    return out;
}

}  // namespace

ThresholdOutcome solve_player1(const BargainingProblem& prob, const WeberParams& k) {
    return solve_as_player1(prob, k, 1);
}

ThresholdOutcome solve_player2(const BargainingProblem& prob, const WeberParams& k) {
    return solve_as_player1(prob.swapped(), k.swapped(), 2);
}

PowerClosedForm closed_form_power(double p, double q, const WeberParams& k, double X) {
    if (!(p > 0.0 && p <= 1.0) || !(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("power exponents must lie in (0, 1]");
    if (!(X > 0.0)) throw std::invalid_argument("resource X must be positive");
    const double up1 = std::pow(1.0 + k.k1, 1.0 / p);
    const double up2 = std::pow(1.0 + k.k2, 1.0 / q);
    const double down1 = std::pow(1.0 - k.k1, 1.0 / p);
    const double down2 = std::pow(1.0 - k.k2, 1.0 / q);

    PowerClosedForm cf;
    cf.eps1 = (1.0 - down2) / (up1 - down2);
    cf.eps2 = (1.0 - down1) / (up2 - down1);
    cf.u1_star = std::pow(cf.eps1 * X, p);
    cf.u2_star = std::pow(cf.eps2 * X, q);
    cf.w1_star = k.k1 * std::pow(cf.eps1, p) * std::pow(X, p);
    cf.w2_star = k.k2 * std::pow(cf.eps2, q) * std::pow(X, q);
    return cf;
}

OracleOutcome brute_force_oracle(const BargainingProblem& prob, const WeberParams& k, std::size_t grid_n) {
    if (grid_n < 100) throw std::invalid_argument("oracle grid needs at least 100 points per axis");
    OracleOutcome out;
    const Interval r1 = prob.utility1_range();
    const double d1 = prob.d1(), d2 = prob.d2();
    const double lo = std::max(d1, r1.lo);
    out.cell = (r1.hi - lo) / static_cast<double>(grid_n);
    if (!(out.cell > 0.0)) {
        out.reason = "empty utility range above the defection point";
        return out;
    }

    // Scan u1 downward; the first row with any admissible w1 is the maximum.
    for (std::size_t i = grid_n; i >= 1; --i) {
        const double u = (i == grid_n) ? r1.hi : lo + out.cell * static_cast<double>(i);
        if (!(u > d1)) continue;
        const double h_u = pareto_h(prob, u);
        if (!(h_u > d2)) continue;
        // Steps below k1 (u - d1) can never be noticeable, so the w1 axis
        // starts there and runs to the end of the frontier.
        const double w_min = k.k1 * (u - d1);
        const double w_max = r1.hi - u;
        if (w_min > w_max) continue;
        for (std::size_t j = 0; j < grid_n; ++j) {
            const double w = w_min + (w_max - w_min) * (static_cast<double>(j) / static_cast<double>(grid_n - 1));
            const bool noticeable = w >= k.k1 * (u - d1);
            const bool tolerable = h_u - pareto_h(prob, std::min(u + w, r1.hi)) <= k.k2 * (h_u - d2);
            // Opponent loss grows with w, so once intolerable, every larger w is too.
            if (!tolerable) break;
            if (noticeable) {
                out.u1_star = u;
                return out;
            }
        }
    }
    out.reason = "no grid point satisfies both constraints";
    return out;
}

Theorem2Report check_theorem2(const ThresholdSolution& s1, const ThresholdSolution& s2,
                              const BargainingProblem& prob) {
    if (s1.player != 1 || s2.player != 2) throw std::invalid_argument("check_theorem2 expects (player 1, player 2)");
    const double top1 = prob.utility1_range().hi;
    const double top2 = prob.utility2_range().hi;
    Theorem2Report r;
    r.margins[0] = s2.u_star - pareto_h(prob, std::min(s1.u_star + s1.w_star, top1));
    r.margins[1] = pareto_h(prob, s1.u_star) - s2.u_star;
    r.margins[2] = s1.u_star - pareto_g(prob, std::min(s2.u_star + s2.w_star, top2));
    r.margins[3] = pareto_g(prob, s2.u_star) - s1.u_star;

    const double scale = std::max({1.0, std::abs(top1), std::abs(top2)});
    r.tolerance = 1e-10 * scale;
    r.violated = std::any_of(r.margins.begin(), r.margins.end(), [&](double m) { return m < -r.tolerance; });
    r.all_strict = std::all_of(r.margins.begin(), r.margins.end(), [&](double m) { return m > r.tolerance; });
    r.degenerate_equality = !r.violated && !r.all_strict;
    return r;
}

LimitOutcome small_k_limit(const BargainingProblem& prob, double ratio) {
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw std::invalid_argument("ratio k2/k1 must be positive");
    LimitOutcome out;
    const ProposerRange range = proposer_range(prob);
    if (range.empty) {
        out.reason = "empty individually rational range";
        return out;
    }
    const double d1 = prob.d1(), d2 = prob.d2();
    const double step = 1e-6 * (prob.utility1_range().width());

    auto slope = [&](double u) {
        double a = std::max(range.lo, u - step);
        double b = std::min(range.hi, u + step);
        return (pareto_h(prob, b) - pareto_h(prob, a)) / (b - a);
    };
    auto E = [&](double u) { return slope(u) * (u - d1) + ratio * (pareto_h(prob, u) - d2); };

    auto bracket = numeric::scan_for_sign_change(E, range.lo, range.hi);
    if (!bracket) {
        out.reason = "elasticity condition has no root in the feasible interval";
        return out;
    }
    out.u1 = numeric::bisect(E, *bracket).x;
    return out;
}

}  // namespace weber
