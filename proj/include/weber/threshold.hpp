#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include "weber/utility.hpp"

namespace weber {

/// One player's one-stage proposal: the lower utility threshold u*, the
/// just-noticeable step w* above it, and the resource that u* corresponds to.
struct ThresholdSolution {
    int player = 1;
    double u_star = 0.0;
    double w_star = 0.0;
    double x_star = 0.0;
    /// h(u1*) for player 1, g(u2*) for player 2.
    double opponent_value_at_u = 0.0;
    /// |saturation residual| scaled by the opponent's utility magnitude.
    double residual = 0.0;
};

enum class SolveStatus {
    Solved,
    /// The constraint set is empty.
    Infeasible,
    /// The opponent's tolerance never binds; the maximum sits on the edge of
    /// the utility range rather than at a saturated interior point.
    BoundaryOptimum,
};

struct ThresholdOutcome {
    SolveStatus status = SolveStatus::Infeasible;
    std::optional<ThresholdSolution> solution;
    std::string reason;

    bool ok() const { return status == SolveStatus::Solved; }
    const ThresholdSolution& operator*() const { return *solution; }
    const ThresholdSolution* operator->() const { return &*solution; }
};

/// Largest u1 such that some step w1 is noticeable to player 1
/// (w1 >= k1 (u1 - d1)) and tolerable to player 2
/// (h(u1) - h(u1 + w1) <= k2 (h(u1) - d2)). Both constraints saturate at the
/// optimum, so this root-finds
///
///     G(u) = h(u + k1 (u - d1)) - (1 - k2) h(u) - k2 d2
///
/// which is strictly decreasing for concave decreasing h.
ThresholdOutcome solve_player1(const BargainingProblem& prob, const WeberParams& k);

/// Mirror image of solve_player1 with g in place of h.
ThresholdOutcome solve_player2(const BargainingProblem& prob, const WeberParams& k);

/// Exact one-stage solution for U1 = x^p, U2 = x^q, zero defection point.
struct PowerClosedForm {
    double eps1;
    double eps2;
    double u1_star;
    double u2_star;
    double w1_star;
    double w2_star;
};

PowerClosedForm closed_form_power(double p, double q, const WeberParams& k, double X);

struct OracleOutcome {
    std::optional<double> u1_star;
    /// Spacing of the u1 grid; the true optimum lies within one cell above.
    double cell = 0.0;
    std::string reason;
};

/// Exhaustive search over a grid_n x grid_n lattice of (u1, w1) pairs
/// against the original inequality constraints. No root finding involved.
OracleOutcome brute_force_oracle(const BargainingProblem& prob, const WeberParams& k, std::size_t grid_n);

struct Theorem2Report {
    /// u2* - h(u1*+w1*), h(u1*) - u2*, u1* - g(u2*+w2*), g(u2*) - u1*.
    std::array<double, 4> margins{};
    double tolerance = 0.0;
    bool all_strict = false;
    /// No margin is negative but at least one is zero within tolerance, as
    /// for linear utilities where the one-stage claims exhaust the resource.
    bool degenerate_equality = false;
    bool violated = false;
};

Theorem2Report check_theorem2(const ThresholdSolution& s1, const ThresholdSolution& s2, const BargainingProblem& prob);

struct LimitOutcome {
    std::optional<double> u1;
    std::string reason;
};

/// Solves h'(u)(u - d1) / (h(u) - d2) = -ratio, the k -> 0 limit of
/// solve_player1 at fixed ratio = k2/k1. h' by central finite differences.
LimitOutcome small_k_limit(const BargainingProblem& prob, double ratio);

}  // namespace weber
