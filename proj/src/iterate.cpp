#include "weber/iterate.hpp"

#include <stdexcept>

namespace weber {

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::MaxRounds: return "max_rounds";
        case StopReason::Infeasible: return "infeasible";
        case StopReason::NoProgress: return "no_progress";
    }
    return "unknown";
}

IterationTrace run_iterative(const BargainingProblem& prob, const WeberParams& k, double tol, int max_rounds) {
    if (prob.d1() != 0.0 || prob.d2() != 0.0)
        throw std::invalid_argument("iterative bargaining requires zero defection utilities");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");

    const double X = prob.resource();
    IterationTrace trace;
    double remaining = X;
    while (true) {
        if (remaining <= tol * X) {
            trace.converged = true;
            trace.stop = StopReason::Converged;
            break;
        }
        if (static_cast<int>(trace.rounds.size()) >= max_rounds) {
            trace.stop = StopReason::MaxRounds;
            trace.reason = "remaining resource above tolerance after " + std::to_string(max_rounds) + " rounds";
            break;
        }
        const BargainingProblem round_prob = prob.with_resource(remaining);
        const ThresholdOutcome o1 = solve_player1(round_prob, k);
        const ThresholdOutcome o2 = solve_player2(round_prob, k);
        if (!o1.ok() || !o2.ok()) {
            trace.stop = StopReason::Infeasible;
            trace.reason = "round " + std::to_string(trace.rounds.size() + 1) + ": " + (o1.ok() ? o2.reason : o1.reason);
            break;
        }

        Round r;
        r.index = static_cast<int>(trace.rounds.size()) + 1;
        r.X_remaining = remaining;
        r.s1 = *o1;
        r.s2 = *o2;
        r.x1_claim = o1->x_star;
        r.x2_claim = o2->x_star;
        if (r.x1_claim < 1e-14 * X && r.x2_claim < 1e-14 * X) {
            trace.stop = StopReason::NoProgress;
            trace.reason = "round " + std::to_string(r.index) + " claims no resource";
            break;
        }
        trace.x1_total += r.x1_claim;
        trace.x2_total += r.x2_claim;
        remaining -= r.x1_claim + r.x2_claim;
        trace.rounds.push_back(r);
    }
    trace.residual_resource = remaining;
    return trace;
}

std::pair<double, double> geometric_limit_power(const PowerClosedForm& cf, double X) {
    const double total = cf.eps1 + cf.eps2;
    if (!(total > 0.0)) throw std::invalid_argument("eps1 + eps2 must be positive");
    return {cf.eps1 * X / total, cf.eps2 * X / total};
}

}  // namespace weber
