#include "weber/utility.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "weber/numeric.hpp"

namespace weber {

namespace {

std::string fmt(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

double rounding_slack(double lo, double hi) { return 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)}); }

// u_to = U_to(X - U_from^-1(u_from)), shared by h and g.
double frontier(const UtilityFunction& from, const UtilityFunction& to, double X, double u) {
    double lo = from.value(0.0);
    double hi = from.value(X);
    double slack = rounding_slack(lo, hi);
    if (!(u >= lo - slack && u <= hi + slack))
        throw std::invalid_argument("frontier argument " + fmt(u) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
    double x;
    if (u <= lo)
        x = 0.0;
    else if (u >= hi)
        x = X;
    else
        x = std::clamp(from.inverse(u, X), 0.0, X);
    return to.value(X - x);
}

}  // namespace

AffineMap::AffineMap(double scale, double offset) : a(scale), b(offset) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("affine scale must be positive");
    if (!std::isfinite(offset)) throw std::invalid_argument("affine offset must be finite");
}

UtilityFunction UtilityFunction::power(double exponent) {
    if (!(exponent > 0.0) || !std::isfinite(exponent))
        throw std::invalid_argument("power utility exponent must be positive");
    return UtilityFunction(Power{exponent});
}

UtilityFunction UtilityFunction::expression(expr::Expr e) { return UtilityFunction(std::move(e)); }

UtilityFunction UtilityFunction::expression(std::string_view source) { return expression(expr::parse(source)); }

double UtilityFunction::base_value(double x) const {
    if (const auto* p = std::get_if<Power>(&base_)) return std::pow(x, p->exponent);
    return std::get<expr::Expr>(base_).eval(x);
}

double UtilityFunction::value(double x) const {
    if (!(x >= 0.0)) throw std::invalid_argument("utility evaluated at negative resource " + fmt(x));
    return affine_.a * base_value(x) + affine_.b;
}

double UtilityFunction::derivative(double x) const {
    if (!(x >= 0.0)) throw std::invalid_argument("utility derivative at negative resource " + fmt(x));
    if (const auto* p = std::get_if<Power>(&base_))
        return affine_.a * p->exponent * std::pow(x, p->exponent - 1.0);
    return affine_.a * std::get<expr::Expr>(base_).eval_dual(x).slope;
}

double UtilityFunction::inverse(double u, double upper_hint) const {
    if (!std::isfinite(u)) throw std::invalid_argument("cannot invert a non-finite utility");
    double v = (u - affine_.b) / affine_.a;
    if (const auto* p = std::get_if<Power>(&base_)) {
        if (v < 0.0) throw std::invalid_argument("utility " + fmt(u) + " below the range of " + describe());
        return std::pow(v, 1.0 / p->exponent);
    }

    const auto& e = std::get<expr::Expr>(base_);
    auto f = [&](double x) { return e.eval(x) - v; };
    double f0 = f(0.0);
    if (f0 > 0.0) throw std::invalid_argument("utility " + fmt(u) + " below the range of " + describe());
    if (f0 == 0.0) return 0.0;
    double hi = upper_hint > 0.0 ? upper_hint : 1.0;
    double fhi = f(hi);
    for (int i = 0; fhi < 0.0; ++i) {
        if (i > 1100 || !std::isfinite(hi * 2.0))
            throw std::invalid_argument("utility " + fmt(u) + " is not attained by " + describe());
        hi *= 2.0;
        fhi = f(hi);
    }
    return numeric::bisect(f, numeric::Bracket{0.0, hi, f0, fhi}).x;
}

UtilityFunction UtilityFunction::transformed(const AffineMap& m) const {
    UtilityFunction out = *this;
    out.affine_.a = m.a * affine_.a;
    out.affine_.b = m.a * affine_.b + m.b;
    return out;
}

double UtilityFunction::pure_power_exponent() const {
    const auto* p = std::get_if<Power>(&base_);
    if (!p || affine_.a != 1.0 || affine_.b != 0.0) return 0.0;
    return p->exponent;
}

std::string UtilityFunction::describe() const {
    std::string base;
    if (const auto* p = std::get_if<Power>(&base_))
        base = "x^" + fmt(p->exponent);
    else
        base = std::get<expr::Expr>(base_).source();
    if (affine_.a == 1.0 && affine_.b == 0.0) return base;
    return fmt(affine_.a) + "*(" + base + ") + " + fmt(affine_.b);
}

BargainingProblem::BargainingProblem(double resource, UtilityFunction u1, UtilityFunction u2, double d1, double d2)
    : resource_(resource), u1_(std::move(u1)), u2_(std::move(u2)), d1_(d1), d2_(d2) {
    if (!(resource > 0.0) || !std::isfinite(resource)) throw std::invalid_argument("resource X must be positive");
    if (!std::isfinite(d1) || !std::isfinite(d2)) throw std::invalid_argument("defection utilities must be finite");
}

Interval BargainingProblem::utility1_range() const { return {u1_.value(0.0), u1_.value(resource_)}; }

Interval BargainingProblem::utility2_range() const { return {u2_.value(0.0), u2_.value(resource_)}; }

BargainingProblem BargainingProblem::swapped() const { return {resource_, u2_, u1_, d2_, d1_}; }

BargainingProblem BargainingProblem::with_resource(double resource) const { return {resource, u1_, u2_, d1_, d2_}; }

WeberParams::WeberParams(double k1_, double k2_) : k1(k1_), k2(k2_) {
    if (!(k1_ > 0.0 && k1_ < 1.0) || !(k2_ > 0.0 && k2_ < 1.0))
        throw std::invalid_argument("Weber constants must lie strictly inside (0, 1)");
}

double eval_utility(const UtilityFunction& f, double x) { return f.value(x); }

double invert_utility(const UtilityFunction& f, double u) { return f.inverse(u); }

double pareto_h(const BargainingProblem& prob, double u1) {
    return frontier(prob.utility1(), prob.utility2(), prob.resource(), u1);
}

double pareto_g(const BargainingProblem& prob, double u2) {
    return frontier(prob.utility2(), prob.utility1(), prob.resource(), u2);
}

BargainingProblem affine_transform(const BargainingProblem& prob, const AffineMap& m1, const AffineMap& m2) {
    if (!(m1.a > 0.0) || !(m2.a > 0.0)) throw std::invalid_argument("affine scale must be positive");
    return {prob.resource(), prob.utility1().transformed(m1), prob.utility2().transformed(m2), m1(prob.d1()),
            m2(prob.d2())};
}

namespace {

// Samples f on a uniform grid over [lo, hi]; failed evaluations are counted
// and recorded as NaN.
template <class F>
std::vector<double> sample(F&& f, double lo, double hi, std::size_t n, ValidationReport& report,
                           const std::string& name) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = (i + 1 == n) ? hi : lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
        try {
            out[i] = f(t);
            if (!std::isfinite(out[i])) throw std::domain_error("non-finite value");
        } catch (const std::exception& ex) {
            out[i] = std::nan("");
            if (report.evaluation_failures++ == 0)
                report.messages.push_back(name + ": evaluation failed at " + fmt(t) + ": " + ex.what());
        }
    }
    return out;
}

void check_shape(const std::vector<double>& y, bool increasing, ValidationReport& report, const std::string& name) {
    std::size_t mono = 0, conc = 0;
    double scale = 1.0;
    for (double v : y)
        if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    const double tol = 1e-10 * scale;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        if (!std::isfinite(y[i]) || !std::isfinite(y[i + 1])) continue;
        if (increasing ? !(y[i + 1] > y[i]) : !(y[i + 1] < y[i])) ++mono;
    }
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!std::isfinite(y[i - 1]) || !std::isfinite(y[i]) || !std::isfinite(y[i + 1])) continue;
        if (y[i - 1] - 2.0 * y[i] + y[i + 1] > tol) ++conc;
    }
    if (mono) report.messages.push_back(name + ": " + std::to_string(mono) + " monotonicity violations");
    if (conc) report.messages.push_back(name + ": " + std::to_string(conc) + " concavity violations");
    report.monotonicity_violations += mono;
    report.concavity_violations += conc;
}

}  // namespace

ValidationReport validate_problem(const BargainingProblem& prob, std::size_t grid_n) {
    if (grid_n < 3) throw std::invalid_argument("validation grid needs at least 3 points");
    ValidationReport report;
    const double X = prob.resource();

    auto u1 = sample([&](double x) { return prob.utility1().value(x); }, 0.0, X, grid_n, report, "U1");
    auto u2 = sample([&](double x) { return prob.utility2().value(x); }, 0.0, X, grid_n, report, "U2");
    check_shape(u1, true, report, "U1");
    check_shape(u2, true, report, "U2");
    if (report.evaluation_failures) return report;

    const Interval r1{u1.front(), u1.back()};
    auto h = sample([&](double u) { return pareto_h(prob, u); }, r1.lo, r1.hi, grid_n, report, "h");
    check_shape(h, false, report, "h");

    double worst = 0.0;
    const double scale = std::max({1.0, std::abs(r1.lo), std::abs(r1.hi)});
    for (std::size_t i = 0; i < grid_n; ++i) {
        if (!std::isfinite(h[i])) continue;
        double u = (i + 1 == grid_n) ? r1.hi
                                     : r1.lo + r1.width() * (static_cast<double>(i) / static_cast<double>(grid_n - 1));
        try {
            worst = std::max(worst, std::abs(pareto_g(prob, h[i]) - u) / scale);
        } catch (const std::exception&) {
            worst = std::numeric_limits<double>::infinity();
        }
    }
    report.max_roundtrip_error = worst;
    report.roundtrip_ok = worst <= 1e-10;
    if (!report.roundtrip_ok) report.messages.push_back("g(h(u)) round trip error " + fmt(worst));

    const double lo1 = std::max(prob.d1(), r1.lo);
    if (lo1 < r1.hi) {
        try {
            report.feasible = pareto_h(prob, lo1) > prob.d2();
        } catch (const std::exception&) {
            report.feasible = false;
        }
    }
    if (!report.feasible) report.messages.push_back("no allocation gives both players more than their defection utility");
    return report;
}

}  // namespace weber
