#pragma once

#include "weber/utility.hpp"

namespace weber {

struct NashSolution {
    /// Exponent on player 1's utility gain.
    double alpha;
    double u1;
    double u2;
    double x1;
};

/// argmax over the frontier of (u1 - d1)^alpha (h(u1) - d2)^(1 - alpha).
///
/// The Weber correspondence uses alpha = k2 / (k1 + k2): the player with the
/// smaller Weber constant carries the larger exponent.
NashSolution solve_asymmetric_nash(const BargainingProblem& prob, double alpha);

/// x1 = p X / (p + q), the symmetric Nash split for U1 = x^p, U2 = x^q.
double nash_power_closed_form(double p, double q, double X);

/// dh/du1 at u1 via the utilities' own derivatives.
double frontier_slope(const BargainingProblem& prob, double u1);

}  // namespace weber
