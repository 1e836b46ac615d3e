#pragma once

#include <string>
#include <utility>
#include <vector>

#include "weber/threshold.hpp"

namespace weber {

struct Round {
    int index = 0;
    double X_remaining = 0.0;
    ThresholdSolution s1;
    ThresholdSolution s2;
    double x1_claim = 0.0;
    double x2_claim = 0.0;
};

enum class StopReason { Converged, MaxRounds, Infeasible, NoProgress };

const char* to_string(StopReason r);

struct IterationTrace {
    std::vector<Round> rounds;
    double x1_total = 0.0;
    double x2_total = 0.0;
    bool converged = false;
    double residual_resource = 0.0;
    StopReason stop = StopReason::MaxRounds;
    std::string reason;
};

/// Repeated one-stage bargaining. Each round is a fresh problem over the
/// resource left by the previous one, with the same utility forms applied to
/// that remainder; both claims are granted and subtracted. Stops once the
/// remainder is at most tol * X.
///
/// Only zero defection points are accepted. For non-power utilities the
/// same round rule is applied, which goes beyond the power-law case where
/// the rounds form a geometric series.
IterationTrace run_iterative(const BargainingProblem& prob, const WeberParams& k, double tol = 1e-9,
                             int max_rounds = 10000);

/// Infinite-round split (eps1 X, eps2 X) / (eps1 + eps2).
std::pair<double, double> geometric_limit_power(const PowerClosedForm& cf, double X);

}  // namespace weber
