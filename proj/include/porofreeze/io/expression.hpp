#pragma once

#include <memory>
#include <string>
#include <vector>

namespace porofreeze::io {

/// Arithmetic expression over named variables, used for space- and time-dependent
/// scenario data.
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := ('+' | '-') unary | power
///     power   := primary ('^' unary)?            right associative
///     primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Functions: sin cos tan exp log sqrt abs tanh (one argument), min max pow (two),
/// step(z) = 1 for z >= 0 and 0 otherwise. `pi` is always defined.
class Expression {
public:
    /// Throws ParseError (column set, line 0) on a syntax error or a name not in `variables`.
    static Expression parse(const std::string& text, const std::vector<std::string>& variables);
    static Expression constant(double value);

    Expression();

    const std::string& text() const { return text_; }
    /// Values in the order of the `variables` list given to parse().
    double eval(const std::vector<double>& values) const;
    bool uses(const std::string& variable) const;
    bool is_constant() const;

    struct Node;

private:
    std::string text_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

/// Shortest decimal text that reads back to exactly the same double ("inf" and "-inf" for
/// infinities).
std::string format_double(double v);

}  // namespace porofreeze::io
