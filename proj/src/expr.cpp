#include "mfg/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace mfg::expr {

ParseError::ParseError(const std::string& what, std::size_t position)
    : Error(what + " at position " + std::to_string(position)), position_(position) {}

struct Expression::Node {
    enum class Op { num, var, add, sub, mul, div, pow, neg, call };
    Op op;
    double value = 0.0;
    std::string fn;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0, std::string fn = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->args = std::move(args);
    n->value = value;
    n->fn = std::move(fn);
    return n;
}

std::size_t arity(const std::string& fn) {
    if (fn == "min" || fn == "max") return 2;
    if (fn == "exp" || fn == "abs" || fn == "sqrt" || fn == "log") return 1;
    return 0;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
        return n;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) {
            if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but the input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (eat('+')) n = make(Op::add, {n, term()});
            else if (eat('-')) n = make(Op::sub, {n, term()});
            else return n;
        }
    }
    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (eat('*')) n = make(Op::mul, {n, unary()});
            else if (eat('/')) n = make(Op::div, {n, unary()});
            else return n;
        }
    }
    NodePtr unary() {
        if (eat('-')) return make(Op::neg, {unary()});
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Op::pow, {base, unary()});
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("expected an operand but the input ended", pos_);
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = expr();
            expect(')');
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const char* first = s_.data() + pos_;
            const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
            if (ec != std::errc()) throw ParseError("malformed number", pos_);
            pos_ += static_cast<std::size_t>(ptr - first);
            return make(Op::num, {}, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string name(s_.substr(start, pos_ - start));
            if (name == "y" || name == "x") return make(Op::var);
            const std::size_t n = arity(name);
            if (n == 0) throw ParseError("unknown name '" + name + "'", start);
            expect('(');
            std::vector<NodePtr> args{expr()};
            while (eat(',')) args.push_back(expr());
            expect(')');
            if (args.size() != n)
                throw ParseError(name + " takes " + std::to_string(n) + " argument(s)", start);
            return make(Op::call, std::move(args), 0.0, name);
        }
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
    }
};

double eval(const Expression::Node& n, double y) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return y;
        case Op::add: return eval(*n.args[0], y) + eval(*n.args[1], y);
        case Op::sub: return eval(*n.args[0], y) - eval(*n.args[1], y);
        case Op::mul: return eval(*n.args[0], y) * eval(*n.args[1], y);
        case Op::div: return eval(*n.args[0], y) / eval(*n.args[1], y);
        case Op::neg: return -eval(*n.args[0], y);
        case Op::pow: {
            const double b = eval(*n.args[0], y), e = eval(*n.args[1], y);
            // small integer exponents as products, so y^2 is exact and defined for y < 0
            if (e == std::round(e) && std::abs(e) <= 16) {
                double r = 1.0;
                for (int k = 0; k < static_cast<int>(std::abs(e)); ++k) r *= b;
                return e < 0 ? 1.0 / r : r;
            }
            return std::pow(b, e);
        }
        case Op::call: {
            const double a = eval(*n.args[0], y);
            if (n.fn == "exp") return std::exp(a);
            if (n.fn == "abs") return std::abs(a);
            if (n.fn == "sqrt") return std::sqrt(a);
            if (n.fn == "log") return std::log(a);
            const double b = eval(*n.args[1], y);
            return n.fn == "min" ? std::min(a, b) : std::max(a, b);
        }
    }
    return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    e.text_ = std::string(text);
    e.root_ = Parser(text).parse();
    return e;
}

double Expression::operator()(double y) const { return eval(*root_, y); }

std::function<double(double)> Expression::function() const {
    auto root = root_;
    return [root](double y) { return eval(*root, y); };
}

const std::vector<Preset>& presets() {
    static const std::vector<Preset> p{
        {"gauss-well", "-exp(-y^2)"},
        {"convex-quadratic", "y^2/2"},
        {"two-wells", "min(abs(y), abs(y-4)+1)"},
        {"super-quadratic", "y^4"},
    };
    return p;
}

std::string preset_text(std::string_view name) {
    std::ostringstream known;
    for (const auto& p : presets()) {
        if (p.name == name) return p.text;
        known << (known.tellp() > 0 ? ", " : "") << p.name;
    }
    throw DomainError("unknown preset '" + std::string(name) + "' (known: " + known.str() + ")");
}

}  // namespace mfg::expr
