/// @file expression.hpp
/// @brief Closed-form coefficient expressions: parser, printer, evaluator,
/// and sampling onto torus grids.
///
/// Grammar (see docs/grammar.md for the full EBNF):
///   expr   := term   (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' factor)?          -- right associative
///   atom   := number | 'pi' | fn '(' expr ')' | var | '(' expr ')'
///   var    := ('y'|'x') digit+            -- index 1..dim
///   fn     := sin | cos | exp | log | sqrt | tanh
/// '^' binds tighter than unary minus, so -y1^2 parses as -(y1^2).
/// Identifiers are case-sensitive and angles are radians.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perihom/fields.hpp"

namespace perihom {

enum class VarSpace { Torus, Domain };  // y-variables vs x-variables

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Number, Pi, Var, Add, Sub, Mul, Div, Pow, Neg, Fun };
    enum class Fn { Sin, Cos, Exp, Log, Sqrt, Tanh };

    Kind kind;
    Real value = 0.0;            // Number
    int var_index = 0;           // Var, 1-based
    VarSpace space = VarSpace::Torus;
    Fn fn = Fn::Sin;             // Fun
    NodePtr left, right;         // children (unary ops use left only)
    std::size_t offset = 0;      // byte offset into the source, for errors
};

/// Immutable parsed coefficient formula in variables y1..yd (or x1..xd).
class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, int dim) : root_(std::move(root)), dim_(dim) {}

    bool empty() const { return root_ == nullptr; }
    int dim() const { return dim_; }
    const NodePtr& root() const { return root_; }

    bool uses_torus_vars() const;
    bool uses_domain_vars() const;

private:
    NodePtr root_;
    int dim_ = 0;
};

/// Parse `source` for dimension `dim`. Throws ParseError with a byte offset.
Expression parse_expression(const std::string& source, int dim);

/// Canonical text form; parse(print(e)) is structurally identical to e.
std::string print_expression(const Expression& e);

/// Structural tree equality (used by round-trip tests).
bool structurally_equal(const Expression& a, const Expression& b);

/// Exact recursive evaluation at a point of length dim (radians).
/// Throws DomainEvalError with the offending node's byte offset.
Real evaluate(const Expression& e, const Eigen::VectorXd& point);

/// Sample onto grid nodes y = (k1/n1, ..., kd/nd). Rejects expressions that
/// use x-variables: only y-expressions live on the torus.
ScalarField sample_scalar(const Expression& e, const TorusGrid& grid);

}  // namespace perihom
