#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weber/expr.hpp"

namespace weber {

/// Positive-scale affine map u -> a*u + b on utilities.
struct AffineMap {
    double a = 1.0;
    double b = 0.0;

    AffineMap() = default;
    AffineMap(double scale, double offset);

    double operator()(double u) const { return a * u + b; }
};

/// Strictly increasing, concave map from resource in [0, inf) to utility.
///
/// Two families are supported: the power law x^p and a parsed expression in
/// x. Either may carry an affine re-scaling a*U(x) + b. Values are immutable;
/// copies of expression utilities share the parsed tree.
class UtilityFunction {
public:
    static UtilityFunction power(double exponent);
    static UtilityFunction expression(expr::Expr e);
    static UtilityFunction expression(std::string_view source);

    /// Throws std::invalid_argument for x < 0 and expr::DomainError when an
    /// expression leaves its real domain.
    double value(double x) const;
    double derivative(double x) const;

    /// Resource x >= 0 with value(x) == u. Closed form for the power family,
    /// bisection otherwise; `upper_hint` seeds the search bracket.
    /// Throws std::invalid_argument when u is below value(0) or unreachable.
    double inverse(double u, double upper_hint = 1.0) const;

    UtilityFunction transformed(const AffineMap& m) const;

    /// Exponent of an untransformed power-family utility, 0 otherwise.
    double pure_power_exponent() const;
    bool is_power() const { return std::holds_alternative<Power>(base_); }
    const AffineMap& affine() const { return affine_; }

    /// Human-readable form, e.g. "x^0.5" or "2*(sqrt(x)) + 1".
    std::string describe() const;

private:
    struct Power {
        double exponent;
    };
    using Base = std::variant<Power, expr::Expr>;

    explicit UtilityFunction(Base base) : base_(std::move(base)) {}

    double base_value(double x) const;

    Base base_;
    AffineMap affine_;
};

struct Interval {
    double lo;
    double hi;
    double width() const { return hi - lo; }
};

/// Two-player split of a resource X with defection utilities d1, d2.
class BargainingProblem {
public:
    BargainingProblem(double resource, UtilityFunction u1, UtilityFunction u2, double d1 = 0.0, double d2 = 0.0);

    double resource() const { return resource_; }
    const UtilityFunction& utility1() const { return u1_; }
    const UtilityFunction& utility2() const { return u2_; }
    double d1() const { return d1_; }
    double d2() const { return d2_; }

    /// [U1(0), U1(X)], the domain of h.
    Interval utility1_range() const;
    /// [U2(0), U2(X)], the domain of g.
    Interval utility2_range() const;

    /// Same problem with the players' roles exchanged; h and g trade places.
    BargainingProblem swapped() const;
    BargainingProblem with_resource(double resource) const;

private:
    double resource_;
    UtilityFunction u1_;
    UtilityFunction u2_;
    double d1_;
    double d2_;
};

/// The two Weber constants, each strictly inside (0, 1).
struct WeberParams {
    double k1;
    double k2;

    WeberParams(double k1, double k2);
    WeberParams swapped() const { return {k2, k1}; }
};

double eval_utility(const UtilityFunction& f, double x);
double invert_utility(const UtilityFunction& f, double u);

/// Pareto frontier u2 = h(u1) = U2(X - U1^-1(u1)). Rejects u1 outside
/// [U1(0), U1(X)] beyond a rounding slack; inside the slack it clamps.
double pareto_h(const BargainingProblem& prob, double u1);
/// Inverse frontier u1 = g(u2) = U1(X - U2^-1(u2)).
double pareto_g(const BargainingProblem& prob, double u2);

BargainingProblem affine_transform(const BargainingProblem& prob, const AffineMap& m1, const AffineMap& m2);

struct ValidationReport {
    std::size_t monotonicity_violations = 0;
    std::size_t concavity_violations = 0;
    std::size_t evaluation_failures = 0;
    bool feasible = false;
    double max_roundtrip_error = 0.0;
    bool roundtrip_ok = false;
    std::vector<std::string> messages;

    bool all_clear() const {
        return monotonicity_violations == 0 && concavity_violations == 0 && evaluation_failures == 0 && feasible &&
               roundtrip_ok;
    }
};

/// Finite-difference checks of the frontier hypotheses on a grid of
/// `grid_n` points: U1, U2 strictly increasing and concave on [0, X], h
/// strictly decreasing and concave, g(h(u)) == u, and a non-empty
/// individually rational region. Never throws for a bad problem, only for
/// grid_n < 3.
ValidationReport validate_problem(const BargainingProblem& prob, std::size_t grid_n = 1001);

}  // namespace weber
