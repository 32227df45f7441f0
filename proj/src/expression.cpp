#include "perihom/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace perihom {

namespace {

using Kind = ExprNode::Kind;
using Fn = ExprNode::Fn;

std::shared_ptr<ExprNode> make(Kind k, std::size_t off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->offset = off;
    return n;
}

class Parser {
public:
    Parser(const std::string& src, int dim) : src_(src), dim_(dim) {}

    NodePtr run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError("unexpected trailing input '" + std::string(1, src_[pos_]) + "'",
                             pos_);
        return e;
    }

private:
    const std::string& src_;
    int dim_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= src_.size() || src_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('+')) {
                auto n = make(Kind::Add, off);
                n->left = lhs;
                n->right = parse_term();
                lhs = n;
            } else if (accept('-')) {
                auto n = make(Kind::Sub, off);
                n->left = lhs;
                n->right = parse_term();
                lhs = n;
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('*')) {
                auto n = make(Kind::Mul, off);
                n->left = lhs;
                n->right = parse_factor();
                lhs = n;
            } else if (accept('/')) {
                auto n = make(Kind::Div, off);
                n->left = lhs;
                n->right = parse_factor();
                lhs = n;
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        skip_ws();
        const std::size_t off = pos_;
        if (accept('-')) {
            auto n = make(Kind::Neg, off);
            n->left = parse_factor();
            return n;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        const std::size_t off = pos_;
        if (accept('^')) {
            auto n = make(Kind::Pow, off);
            n->left = base;
            n->right = parse_factor();  // right-assoc, allows 2^-3
            return n;
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        const std::size_t off = pos_;
        const char c = src_[pos_];

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }

        if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();

        throw ParseError("unexpected character '" + std::string(1, c) + "'", off);
    }

    NodePtr parse_number() {
        const std::size_t off = pos_;
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", off);
        pos_ += static_cast<std::size_t>(end - begin);
        auto n = make(Kind::Number, off);
        n->value = v;
        return n;
    }

    NodePtr parse_identifier() {
        const std::size_t off = pos_;
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
            ++end;
        const std::string name = src_.substr(pos_, end - pos_);
        pos_ = end;

        if (name == "pi") return make(Kind::Pi, off);

        static const std::pair<const char*, Fn> fns[] = {
            {"sin", Fn::Sin},   {"cos", Fn::Cos},  {"exp", Fn::Exp},
            {"log", Fn::Log},   {"sqrt", Fn::Sqrt}, {"tanh", Fn::Tanh}};
        for (const auto& [fname, fid] : fns) {
            if (name == fname) {
                expect('(');
                NodePtr arg = parse_expr();
                expect(')');
                auto n = make(Kind::Fun, off);
                n->fn = fid;
                n->left = arg;
                return n;
            }
        }

        if ((name[0] == 'y' || name[0] == 'x') && name.size() > 1) {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                const int idx = std::atoi(name.c_str() + 1);
                if (idx < 1 || idx > dim_)
                    throw ParseError("variable index out of range: " + name + " with dim " +
                                         std::to_string(dim_),
                                     off);
                auto n = make(Kind::Var, off);
                n->var_index = idx;
                n->space = (name[0] == 'y') ? VarSpace::Torus : VarSpace::Domain;
                return n;
            }
        }

        throw ParseError("unknown identifier '" + name + "'", off);
    }
};

int precedence(Kind k) {
    switch (k) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

void print_node(std::ostringstream& os, const NodePtr& n, int parent_prec, bool rhs_of_sub) {
    const int prec = precedence(n->kind);
    const bool parens = prec < parent_prec || (rhs_of_sub && prec == parent_prec);
    if (parens) os << '(';
    switch (n->kind) {
        case Kind::Number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n->value;
            os << tmp.str();
            break;
        }
        case Kind::Pi: os << "pi"; break;
        case Kind::Var:
            os << (n->space == VarSpace::Torus ? 'y' : 'x') << n->var_index;
            break;
        case Kind::Add:
            print_node(os, n->left, prec, false);
            os << '+';
            print_node(os, n->right, prec, true);
            break;
        case Kind::Sub:
            print_node(os, n->left, prec, false);
            os << '-';
            print_node(os, n->right, prec, true);
            break;
        case Kind::Mul:
            print_node(os, n->left, prec, false);
            os << '*';
            print_node(os, n->right, prec, true);
            break;
        case Kind::Div:
            print_node(os, n->left, prec, false);
            os << '/';
            print_node(os, n->right, prec, true);
            break;
        case Kind::Neg:
            os << '-';
            print_node(os, n->left, prec + 1, false);
            break;
        case Kind::Pow:
            // left operand needs parens unless it is atomic: ^ is right-assoc
            print_node(os, n->left, prec + 1, false);
            os << '^';
            print_node(os, n->right, prec, false);
            break;
        case Kind::Fun: {
            static const char* names[] = {"sin", "cos", "exp", "log", "sqrt", "tanh"};
            os << names[static_cast<int>(n->fn)] << '(';
            print_node(os, n->left, 0, false);
            os << ')';
            break;
        }
    }
    if (parens) os << ')';
}

bool nodes_equal(const NodePtr& a, const NodePtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Number: return a->value == b->value;
        case Kind::Pi: return true;
        case Kind::Var: return a->var_index == b->var_index && a->space == b->space;
        case Kind::Fun:
            return a->fn == b->fn && nodes_equal(a->left, b->left);
        case Kind::Neg: return nodes_equal(a->left, b->left);
        default: return nodes_equal(a->left, b->left) && nodes_equal(a->right, b->right);
    }
}

Real eval_node(const ExprNode& n, const Eigen::VectorXd& p) {
    switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Pi: return kPi;
        case Kind::Var: return p[n.var_index - 1];
        case Kind::Add: return eval_node(*n.left, p) + eval_node(*n.right, p);
        case Kind::Sub: return eval_node(*n.left, p) - eval_node(*n.right, p);
        case Kind::Mul: return eval_node(*n.left, p) * eval_node(*n.right, p);
        case Kind::Div: {
            const Real denom = eval_node(*n.right, p);
            if (denom == 0.0) throw DomainEvalError("division by zero", n.offset);
            return eval_node(*n.left, p) / denom;
        }
        case Kind::Pow: {
            const Real base = eval_node(*n.left, p);
            const Real expo = eval_node(*n.right, p);
            const Real r = std::pow(base, expo);
            if (!std::isfinite(r))
                throw DomainEvalError("power produced a non-finite value", n.offset);
            return r;
        }
        case Kind::Neg: return -eval_node(*n.left, p);
        case Kind::Fun: {
            const Real x = eval_node(*n.left, p);
            switch (n.fn) {
                case Fn::Sin: return std::sin(x);
                case Fn::Cos: return std::cos(x);
                case Fn::Exp: return std::exp(x);
                case Fn::Log:
                    if (x <= 0.0) throw DomainEvalError("log of a nonpositive value", n.offset);
                    return std::log(x);
                case Fn::Sqrt:
                    if (x < 0.0) throw DomainEvalError("sqrt of a negative value", n.offset);
                    return std::sqrt(x);
                case Fn::Tanh: return std::tanh(x);
            }
        }
    }
    throw Error("corrupt expression node");
}

bool find_space(const NodePtr& n, VarSpace s) {
    if (!n) return false;
    if (n->kind == Kind::Var && n->space == s) return true;
    return find_space(n->left, s) || find_space(n->right, s);
}

}  // namespace

bool Expression::uses_torus_vars() const { return find_space(root_, VarSpace::Torus); }
bool Expression::uses_domain_vars() const { return find_space(root_, VarSpace::Domain); }

Expression parse_expression(const std::string& source, int dim) {
    if (dim < 1 || dim > 3) throw ConfigError("expression dimension must be 1..3");
    if (source.empty()) throw ParseError("empty expression", 0);
    Parser p(source, dim);
    return Expression(p.run(), dim);
}

std::string print_expression(const Expression& e) {
    if (e.empty()) return "";
    std::ostringstream os;
    print_node(os, e.root(), 0, false);
    return os.str();
}

bool structurally_equal(const Expression& a, const Expression& b) {
    return a.dim() == b.dim() && nodes_equal(a.root(), b.root());
}

Real evaluate(const Expression& e, const Eigen::VectorXd& point) {
    if (e.empty()) throw ConfigError("evaluate on an empty expression");
    if (point.size() != e.dim())
        throw ConfigError("evaluation point length " + std::to_string(point.size()) +
                          " does not match expression dimension " + std::to_string(e.dim()));
    return eval_node(*e.root(), point);
}

ScalarField sample_scalar(const Expression& e, const TorusGrid& grid) {
    if (e.dim() != grid.dim())
        throw ConfigError("expression dimension does not match grid dimension");
    if (e.uses_domain_vars())
        throw ConfigError("torus fields admit only y-variables; found x-variables");
    RealArray vals(grid.node_count());
    Eigen::VectorXd p(grid.dim());
    const std::int64_t N = grid.node_count();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        const auto k = grid.unflatten(idx);
        for (int a = 0; a < grid.dim(); ++a) p[a] = grid.coord(k[a], a);
        vals[idx] = evaluate(e, p);
    }
    return ScalarField(grid, std::move(vals));
}

}  // namespace perihom
