#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <string>

namespace ksns::model {

struct ExpressionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Closed-form scalar expression over the coordinates x, y, z.
///
/// Grammar: numbers, x y z, the constants pi and e, + - * / ^ with the usual
/// precedence (^ binds right), unary minus, parentheses and the functions
/// sin cos tan exp log sqrt. Derivatives are taken symbolically.
class Expression {
public:
    Expression();  ///< the constant 0
    static Expression parse(const std::string& source);
    static Expression constant(double v);

    double operator()(const std::array<double, 3>& x) const;

    /// d/dx_axis, built symbolically.
    Expression derivative(int axis) const;

    /// True when the expression does not reference x, y or z.
    bool is_constant() const;

    /// Text the expression was parsed from (derived expressions print their tree).
    const std::string& source() const { return source_; }

    bool operator==(const Expression& o) const { return source_ == o.source_; }

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, std::string source);
    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace ksns::model
