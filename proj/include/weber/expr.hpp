#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace weber::expr {

/// Raised by parse(). `offset()` is the byte position in the source.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Raised during evaluation when a sub-expression leaves its real domain
/// (log of a non-positive value, 0^negative, ...). `offset()` locates the
/// offending node in the source text.
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, std::size_t offset)
        : std::domain_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

struct Node;

/// Value and first derivative with respect to x.
struct Dual {
    double value = 0.0;
    double slope = 0.0;
};

/// Immutable parsed expression in the single variable `x`.
///
/// Grammar, lowest to highest precedence:
///
///     sum     := product (('+' | '-') product)*
///     product := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?          right associative
///     primary := number | 'x' | func '(' sum ')' | '(' sum ')'
///     func    := 'exp' | 'log' | 'sqrt'
///
/// Copies share the tree.
class Expr {
public:
    double eval(double x) const;
    /// Forward-mode derivative; same domain rules as eval().
    Dual eval_dual(double x) const;

    /// Fully parenthesized form; numbers printed round-trip exact.
    std::string print() const;
    const std::string& source() const noexcept { return source_; }

    /// If the tree is exactly `x ^ <constant>`, the exponent.
    bool is_power_of_x(double* exponent) const;

private:
    friend Expr parse(std::string_view source);
    Expr(std::shared_ptr<const Node> root, std::string source);

    std::shared_ptr<const Node> root_;
    std::string source_;
};

Expr parse(std::string_view source);

inline double eval_expr(const Expr& e, double x) { return e.eval(x); }

}  // namespace weber::expr
