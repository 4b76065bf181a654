#include "porofreeze/io/expression.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "porofreeze/errors.hpp"

namespace porofreeze::io {

struct Expression::Node {
    enum class Op { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

    Op op = Op::Number;
    double value = 0.0;
    std::size_t slot = 0;
    std::string function;
    std::vector<std::shared_ptr<const Node>> args;

    double eval(const std::vector<double>& vars) const
    {
        switch (op) {
            case Op::Number: return value;
            case Op::Variable: return vars[slot];
            case Op::Neg: return -args[0]->eval(vars);
            case Op::Add: return args[0]->eval(vars) + args[1]->eval(vars);
            case Op::Sub: return args[0]->eval(vars) - args[1]->eval(vars);
            case Op::Mul: return args[0]->eval(vars) * args[1]->eval(vars);
            case Op::Div: return args[0]->eval(vars) / args[1]->eval(vars);
            case Op::Pow: return std::pow(args[0]->eval(vars), args[1]->eval(vars));
            case Op::Call: return call(vars);
        }
        return 0.0;
    }

    double call(const std::vector<double>& vars) const
    {
        const double a = args[0]->eval(vars);
        if (function == "sin") return std::sin(a);
        if (function == "cos") return std::cos(a);
        if (function == "tan") return std::tan(a);
        if (function == "exp") return std::exp(a);
        if (function == "log") return std::log(a);
        if (function == "sqrt") return std::sqrt(a);
        if (function == "abs") return std::abs(a);
        if (function == "tanh") return std::tanh(a);
        if (function == "step") return a >= 0.0 ? 1.0 : 0.0;
        const double b = args[1]->eval(vars);
        if (function == "min") return std::min(a, b);
        if (function == "max") return std::max(a, b);
        return std::pow(a, b);
    }

    bool uses(std::size_t s) const
    {
        if (op == Op::Variable) return slot == s;
        return std::any_of(args.begin(), args.end(), [s](const auto& a) { return a->uses(s); });
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

int arity(const std::string& name)
{
    static const std::array<const char*, 9> unary{"sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "step"};
    static const std::array<const char*, 3> binary{"min", "max", "pow"};
    for (const char* f : unary) {
        if (name == f) return 1;
    }
    for (const char* f : binary) {
        if (name == f) return 2;
    }
    return -1;
}

}  // namespace

class Parser {
public:
    using Node = Expression::Node;
    using Op = Node::Op;

    Parser(const std::string& text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

    NodePtr run()
    {
        auto n = expr();
        skip();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("expression '" + s_ + "': " + what, 0, static_cast<int>(pos_) + 1);
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

    static NodePtr make(Op op, std::vector<NodePtr> args)
    {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->args = std::move(args);
        return n;
    }

    NodePtr expr()
    {
        auto left = term();
        for (;;) {
            if (accept('+')) {
                left = make(Op::Add, {left, term()});
            } else if (accept('-')) {
                left = make(Op::Sub, {left, term()});
            } else {
                return left;
            }
        }
    }

    NodePtr term()
    {
        auto left = unary();
        for (;;) {
            if (accept('*')) {
                left = make(Op::Mul, {left, unary()});
            } else if (accept('/')) {
                left = make(Op::Div, {left, unary()});
            } else {
                return left;
            }
        }
    }

    NodePtr unary()
    {
        if (accept('-')) return make(Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power()
    {
        auto base = primary();
        if (accept('^')) return make(Op::Pow, {base, unary()});
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expr();
            if (!accept(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    NodePtr number()
    {
        double v = 0.0;
        const char* first = s_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{}) fail("malformed number");
        pos_ += static_cast<std::size_t>(ptr - first);
        auto n = std::make_shared<Node>();
        n->value = v;
        return n;
    }

    NodePtr name()
    {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string id = s_.substr(start, pos_ - start);
        if (accept('(')) {
            const int n_args = arity(id);
            if (n_args < 0) {
                pos_ = start;
                fail("unknown function '" + id + "'");
            }
            auto call = std::make_shared<Node>();
            call->op = Op::Call;
            call->function = id;
            call->args.push_back(expr());
            while (accept(',')) call->args.push_back(expr());
            if (!accept(')')) fail("missing ')' after arguments of '" + id + "'");
            if (static_cast<int>(call->args.size()) != n_args) {
                pos_ = start;
                fail("'" + id + "' takes " + std::to_string(n_args) + " argument(s)");
            }
            return call;
        }
        const auto it = std::find(vars_.begin(), vars_.end(), id);
        if (it != vars_.end()) {
            auto n = std::make_shared<Node>();
            n->op = Op::Variable;
            n->slot = static_cast<std::size_t>(it - vars_.begin());
            return n;
        }
        if (id == "pi") {
            auto n = std::make_shared<Node>();
            n->value = std::numbers::pi;
            return n;
        }
        pos_ = start;
        fail("unknown name '" + id + "'");
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

Expression::Expression() : text_("0")
{
    root_ = std::make_shared<Node>();
}

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables)
{
    Expression e;
    e.text_ = text;
    e.variables_ = variables;
    e.root_ = Parser(text, variables).run();
    return e;
}

Expression Expression::constant(double value)
{
    Expression e;
    e.text_ = format_double(value);
    auto n = std::make_shared<Node>();
    n->value = value;
    e.root_ = n;
    return e;
}

double Expression::eval(const std::vector<double>& values) const
{
    if (values.size() < variables_.size()) throw InvalidState("expression '" + text_ + "': missing variable values");
    return root_->eval(values);
}

bool Expression::uses(const std::string& variable) const
{
    const auto it = std::find(variables_.begin(), variables_.end(), variable);
    return it != variables_.end() && root_->uses(static_cast<std::size_t>(it - variables_.begin()));
}

bool Expression::is_constant() const
{
    for (std::size_t k = 0; k < variables_.size(); ++k) {
        if (root_->uses(k)) return false;
    }
    return true;
}

std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw InternalError("number formatting failed");
    return std::string(buf.data(), ptr);
}

}  // namespace porofreeze::io
