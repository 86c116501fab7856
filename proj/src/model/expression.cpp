#include "ksns/model/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace ksns::model {

enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, tan, exp, log, sqrt };

struct Expression::Node {
    Op op = Op::num;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr num(double v)
{
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::num;
    n->value = v;
    return n;
}

NodePtr var(int axis)
{
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::var;
    n->var = axis;
    return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::num && n->value == v; }

// Light folding so derivatives of polynomials do not balloon.
NodePtr node(Op op, NodePtr a, NodePtr b = nullptr)
{
    if (a->op == Op::num && (!b || b->op == Op::num)) {
        const double x = a->value;
        const double y = b ? b->value : 0.0;
        switch (op) {
        case Op::add: return num(x + y);
        case Op::sub: return num(x - y);
        case Op::mul: return num(x * y);
        case Op::neg: return num(-x);
        default: break;
        }
    }
    switch (op) {
    case Op::add:
        if (is_num(a, 0.0)) return b;
        if (is_num(b, 0.0)) return a;
        break;
    case Op::sub:
        if (is_num(b, 0.0)) return a;
        if (is_num(a, 0.0)) return node(Op::neg, b);
        break;
    case Op::mul:
        if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
        if (is_num(a, 1.0)) return b;
        if (is_num(b, 1.0)) return a;
        break;
    case Op::div:
        if (is_num(a, 0.0)) return num(0.0);
        if (is_num(b, 1.0)) return a;
        break;
    case Op::pow:
        if (is_num(b, 1.0)) return a;
        if (is_num(b, 0.0)) return num(1.0);
        break;
    default: break;
    }
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

double eval(const Expression::Node& n, const std::array<double, 3>& x)
{
    switch (n.op) {
    case Op::num: return n.value;
    case Op::var: return x[n.var];
    case Op::add: return eval(*n.a, x) + eval(*n.b, x);
    case Op::sub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::mul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::div: return eval(*n.a, x) / eval(*n.b, x);
    case Op::pow: return std::pow(eval(*n.a, x), eval(*n.b, x));
    case Op::neg: return -eval(*n.a, x);
    case Op::sin: return std::sin(eval(*n.a, x));
    case Op::cos: return std::cos(eval(*n.a, x));
    case Op::tan: return std::tan(eval(*n.a, x));
    case Op::exp: return std::exp(eval(*n.a, x));
    case Op::log: return std::log(eval(*n.a, x));
    case Op::sqrt: return std::sqrt(eval(*n.a, x));
    }
    return 0.0;
}

bool depends_on_coordinates(const Expression::Node& n)
{
    if (n.op == Op::var) return true;
    return (n.a && depends_on_coordinates(*n.a)) || (n.b && depends_on_coordinates(*n.b));
}

NodePtr diff(const NodePtr& n, int axis)
{
    const NodePtr& u = n->a;
    const NodePtr& v = n->b;
    switch (n->op) {
    case Op::num: return num(0.0);
    case Op::var: return num(n->var == axis ? 1.0 : 0.0);
    case Op::add: return node(Op::add, diff(u, axis), diff(v, axis));
    case Op::sub: return node(Op::sub, diff(u, axis), diff(v, axis));
    case Op::mul:
        return node(Op::add, node(Op::mul, diff(u, axis), v), node(Op::mul, u, diff(v, axis)));
    case Op::div:
        return node(Op::div,
                    node(Op::sub, node(Op::mul, diff(u, axis), v), node(Op::mul, u, diff(v, axis))),
                    node(Op::mul, v, v));
    case Op::pow:
        if (!depends_on_coordinates(*v)) {
            return node(Op::mul, node(Op::mul, v, node(Op::pow, u, node(Op::sub, v, num(1.0)))), diff(u, axis));
        }
        // d(u^v) = u^v (v' log u + v u'/u)
        return node(Op::mul, n,
                    node(Op::add, node(Op::mul, diff(v, axis), node(Op::log, u)),
                         node(Op::div, node(Op::mul, v, diff(u, axis)), u)));
    case Op::neg: return node(Op::neg, diff(u, axis));
    case Op::sin: return node(Op::mul, node(Op::cos, u), diff(u, axis));
    case Op::cos: return node(Op::neg, node(Op::mul, node(Op::sin, u), diff(u, axis)));
    case Op::tan: {
        auto c = node(Op::cos, u);
        return node(Op::div, diff(u, axis), node(Op::mul, c, c));
    }
    case Op::exp: return node(Op::mul, n, diff(u, axis));
    case Op::log: return node(Op::div, diff(u, axis), u);
    case Op::sqrt: return node(Op::div, diff(u, axis), node(Op::mul, num(2.0), n));
    }
    return num(0.0);
}

std::string print(const Expression::Node& n)
{
    auto fn = [&](const char* name) { return std::string(name) + "(" + print(*n.a) + ")"; };
    auto bin = [&](const char* op) { return "(" + print(*n.a) + op + print(*n.b) + ")"; };
    switch (n.op) {
    case Op::num: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        return n.value < 0 ? "(" + std::string(buf) + ")" : std::string(buf);
    }
    case Op::var: return std::string(1, "xyz"[n.var]);
    case Op::add: return bin("+");
    case Op::sub: return bin("-");
    case Op::mul: return bin("*");
    case Op::div: return bin("/");
    case Op::pow: return bin("^");
    case Op::neg: return "(-" + print(*n.a) + ")";
    case Op::sin: return fn("sin");
    case Op::cos: return fn("cos");
    case Op::tan: return fn("tan");
    case Op::exp: return fn("exp");
    case Op::log: return fn("log");
    case Op::sqrt: return fn("sqrt");
    }
    return "0";
}

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse()
    {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ExpressionError("expression \"" + s_ + "\" at column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expr()
    {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = node(Op::add, lhs, term());
            else if (accept('-')) lhs = node(Op::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term()
    {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = node(Op::mul, lhs, unary());
            else if (accept('/')) lhs = node(Op::div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return node(Op::neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (accept('^')) return node(Op::pow, base, unary());
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto n = expr();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("malformed number");
            pos_ += static_cast<std::size_t>(end - begin);
            return num(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string id = s_.substr(start, pos_ - start);
            if (id == "x") return var(0);
            if (id == "y") return var(1);
            if (id == "z") return var(2);
            if (id == "pi") return num(std::numbers::pi);
            if (id == "e") return num(std::numbers::e);
            static const std::pair<const char*, Op> fns[] = {{"sin", Op::sin}, {"cos", Op::cos}, {"tan", Op::tan},
                                                              {"exp", Op::exp}, {"log", Op::log}, {"sqrt", Op::sqrt}};
            for (const auto& [name, op] : fns) {
                if (id == name) {
                    if (!accept('(')) fail("expected '(' after " + id);
                    auto arg = expr();
                    if (!accept(')')) fail("expected ')'");
                    return node(op, arg);
                }
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

}  // namespace

Expression::Expression() : root_(num(0.0)), source_("0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source))
{
}

Expression Expression::parse(const std::string& source)
{
    Parser p(source);
    return Expression(p.parse(), source);
}

Expression Expression::constant(double v)
{
    auto n = num(v);
    return Expression(n, print(*n));
}

double Expression::operator()(const std::array<double, 3>& x) const { return eval(*root_, x); }

Expression Expression::derivative(int axis) const
{
    auto d = diff(root_, axis);
    return Expression(d, print(*d));
}

bool Expression::is_constant() const { return !depends_on_coordinates(*root_); }

}  // namespace ksns::model
