#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/error.hpp"

namespace mfg::expr {

/// Grammar error; `position` is the 0-based byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Expression in the single variable y (x is accepted as an alias).
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'y' | 'x' | '(' expr ')' | fn '(' expr (',' expr)* ')'
///   fn      := exp | abs | min | max | sqrt | log
///
/// Parsing builds a tree; nothing is executed beyond these operations.
class Expression {
public:
    static Expression parse(std::string_view text);
    double operator()(double y) const;
    const std::string& text() const { return text_; }
    std::function<double(double)> function() const;

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

struct Preset {
    std::string name;
    std::string text;
};

/// gauss-well, convex-quadratic, two-wells, super-quadratic.
const std::vector<Preset>& presets();
/// Expression text of a preset, or DomainError listing the known names.
std::string preset_text(std::string_view name);

}  // namespace mfg::expr
