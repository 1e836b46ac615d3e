#include "weber/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <utility>

namespace weber::expr {

enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sqrt };

struct Node {
    Kind kind;
    std::size_t offset;
    double value = 0.0;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;
};

namespace {

using NodePtr = std::unique_ptr<Node>;

NodePtr make(Kind kind, std::size_t offset, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = kind;
    n->offset = offset;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_all() {
        skip_ws();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
        auto root = parse_sum();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", pos_);
        return root;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        auto lhs = parse_product();
        for (;;) {
            skip_ws();
            std::size_t at = pos_;
            if (accept('+'))
                lhs = make(Kind::Add, at, std::move(lhs), parse_product());
            else if (accept('-'))
                lhs = make(Kind::Sub, at, std::move(lhs), parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        auto lhs = parse_unary();
        for (;;) {
            skip_ws();
            std::size_t at = pos_;
            if (accept('*'))
                lhs = make(Kind::Mul, at, std::move(lhs), parse_unary());
            else if (accept('/'))
                lhs = make(Kind::Div, at, std::move(lhs), parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        std::size_t at = pos_;
        if (accept('-')) return make(Kind::Neg, at, parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        auto base = parse_primary();
        skip_ws();
        std::size_t at = pos_;
        if (accept('^')) return make(Kind::Pow, at, std::move(base), parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        std::size_t at = pos_;
        if (pos_ == src_.size()) throw ParseError("unexpected end of input", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = parse_sum();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_ident_start(c)) {
            while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
            std::string_view name = src_.substr(at, pos_ - at);
            skip_ws();
            bool call = pos_ < src_.size() && src_[pos_] == '(';
            if (!call) {
                if (name == "x") return make(Kind::Variable, at);
                throw ParseError("unknown identifier '" + std::string(name) + "'", at);
            }
            Kind kind;
            if (name == "exp")
                kind = Kind::Exp;
            else if (name == "log")
                kind = Kind::Log;
            else if (name == "sqrt")
                kind = Kind::Sqrt;
            else
                throw ParseError("unknown function '" + std::string(name) + "'", at);
            ++pos_;
            auto arg = parse_sum();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return make(kind, at, std::move(arg));
        }
        throw ParseError(std::string("unexpected character '") + c + "'", at);
    }

    NodePtr parse_number() {
        std::size_t at = pos_;
        // Restrict to [digits][.digits][e[+-]digits]; from_chars would also take "inf"/"nan".
        std::size_t end = pos_;
        auto digits = [&] {
            while (end < src_.size() && src_[end] >= '0' && src_[end] <= '9') ++end;
        };
        digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            digits();
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t mark = end++;
            if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
            std::size_t before = end;
            digits();
            if (end == before) end = mark;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + at, src_.data() + end, value);
        if (ec != std::errc() || ptr != src_.data() + end) throw ParseError("malformed number", at);
        pos_ = end;
        auto n = make(Kind::Constant, at);
        n->value = value;
        return n;
    }

    static bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

    std::string_view src_;
    std::size_t pos_ = 0;
};

double checked_pow(double base, double exponent, std::size_t offset) {
    if (base < 0.0 && exponent != std::trunc(exponent))
        throw DomainError("negative base with non-integer exponent", offset);
    if (base == 0.0 && exponent < 0.0) throw DomainError("zero raised to a negative power", offset);
    return std::pow(base, exponent);
}

double eval_node(const Node& n, double x) {
    switch (n.kind) {
        case Kind::Constant: return n.value;
        case Kind::Variable: return x;
        case Kind::Add: return eval_node(*n.lhs, x) + eval_node(*n.rhs, x);
        case Kind::Sub: return eval_node(*n.lhs, x) - eval_node(*n.rhs, x);
        case Kind::Mul: return eval_node(*n.lhs, x) * eval_node(*n.rhs, x);
        case Kind::Div: {
            double den = eval_node(*n.rhs, x);
            if (den == 0.0) throw DomainError("division by zero", n.offset);
            return eval_node(*n.lhs, x) / den;
        }
        case Kind::Pow: return checked_pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x), n.offset);
        case Kind::Neg: return -eval_node(*n.lhs, x);
        case Kind::Exp: return std::exp(eval_node(*n.lhs, x));
        case Kind::Log: {
            double a = eval_node(*n.lhs, x);
            if (a <= 0.0) throw DomainError("log of non-positive value", n.offset);
            return std::log(a);
        }
        case Kind::Sqrt: {
            double a = eval_node(*n.lhs, x);
            if (a < 0.0) throw DomainError("sqrt of negative value", n.offset);
            return std::sqrt(a);
        }
    }
    throw DomainError("corrupt expression tree", n.offset);
}

Dual eval_dual_node(const Node& n, double x) {
    switch (n.kind) {
        case Kind::Constant: return {n.value, 0.0};
        case Kind::Variable: return {x, 1.0};
        case Kind::Add: {
            auto a = eval_dual_node(*n.lhs, x), b = eval_dual_node(*n.rhs, x);
            return {a.value + b.value, a.slope + b.slope};
        }
        case Kind::Sub: {
            auto a = eval_dual_node(*n.lhs, x), b = eval_dual_node(*n.rhs, x);
            return {a.value - b.value, a.slope - b.slope};
        }
        case Kind::Mul: {
            auto a = eval_dual_node(*n.lhs, x), b = eval_dual_node(*n.rhs, x);
            return {a.value * b.value, a.slope * b.value + a.value * b.slope};
        }
        case Kind::Div: {
            auto a = eval_dual_node(*n.lhs, x), b = eval_dual_node(*n.rhs, x);
            if (b.value == 0.0) throw DomainError("division by zero", n.offset);
            double q = a.value / b.value;
            return {q, (a.slope - q * b.slope) / b.value};
        }
        case Kind::Pow: {
            auto a = eval_dual_node(*n.lhs, x), b = eval_dual_node(*n.rhs, x);
            double v = checked_pow(a.value, b.value, n.offset);
            double slope = 0.0;
            if (a.slope != 0.0) slope += b.value * std::pow(a.value, b.value - 1.0) * a.slope;
            if (b.slope != 0.0) {
                if (a.value <= 0.0) throw DomainError("variable exponent needs a positive base", n.offset);
                slope += v * std::log(a.value) * b.slope;
            }
            return {v, slope};
        }
        case Kind::Neg: {
            auto a = eval_dual_node(*n.lhs, x);
            return {-a.value, -a.slope};
        }
        case Kind::Exp: {
            auto a = eval_dual_node(*n.lhs, x);
            double v = std::exp(a.value);
            return {v, v * a.slope};
        }
        case Kind::Log: {
            auto a = eval_dual_node(*n.lhs, x);
            if (a.value <= 0.0) throw DomainError("log of non-positive value", n.offset);
            return {std::log(a.value), a.slope / a.value};
        }
        case Kind::Sqrt: {
            auto a = eval_dual_node(*n.lhs, x);
            if (a.value < 0.0) throw DomainError("sqrt of negative value", n.offset);
            double v = std::sqrt(a.value);
            return {v, a.slope / (2.0 * v)};
        }
    }
    throw DomainError("corrupt expression tree", n.offset);
}

std::string format_number(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void print_node(const Node& n, std::string& out) {
    auto binary = [&](const char* op) {
        out += '(';
        print_node(*n.lhs, out);
        out += op;
        print_node(*n.rhs, out);
        out += ')';
    };
    auto call = [&](const char* name) {
        out += name;
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
    };
    switch (n.kind) {
        case Kind::Constant: out += format_number(n.value); break;
        case Kind::Variable: out += 'x'; break;
        case Kind::Add: binary(" + "); break;
        case Kind::Sub: binary(" - "); break;
        case Kind::Mul: binary(" * "); break;
        case Kind::Div: binary(" / "); break;
        case Kind::Pow: binary(" ^ "); break;
        case Kind::Neg:
            out += "(-";
            print_node(*n.lhs, out);
            out += ')';
            break;
        case Kind::Exp: call("exp"); break;
        case Kind::Log: call("log"); break;
        case Kind::Sqrt: call("sqrt"); break;
    }
}

}  // namespace

Expr::Expr(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

double Expr::eval(double x) const { return eval_node(*root_, x); }

Dual Expr::eval_dual(double x) const { return eval_dual_node(*root_, x); }

std::string Expr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

bool Expr::is_power_of_x(double* exponent) const {
    if (root_->kind != Kind::Pow || root_->lhs->kind != Kind::Variable || root_->rhs->kind != Kind::Constant)
        return false;
    if (exponent) *exponent = root_->rhs->value;
    return true;
}

Expr parse(std::string_view source) {
    Parser p(source);
    std::shared_ptr<const Node> root = p.parse_all();
    return Expr(std::move(root), std::string(source));
}

}  // namespace weber::expr
