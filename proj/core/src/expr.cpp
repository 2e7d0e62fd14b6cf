#include "fmpinn/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "fmpinn/config.hpp"
#include "fmpinn/problems.hpp"

namespace fmpinn {

namespace detail {

struct ExprNode {
    enum class Kind {
        constant, variable, add, sub, mul, div, neg, pow_int,
        f_sin, f_cos, f_exp, f_sqrt, f_tanh, f_log, f_square
    };
    Kind kind;
    double cval = 0.0;
    int ival = 0;  // variable index or integer exponent
    std::shared_ptr<const ExprNode> a, b;

    template <class T>
    T eval(std::span<const T> x) const {
        switch (kind) {
            case Kind::constant: return T(cval);
            case Kind::variable: return x[static_cast<std::size_t>(ival)];
            case Kind::add: return a->eval(x) + b->eval(x);
            case Kind::sub: return a->eval(x) - b->eval(x);
            case Kind::mul: return a->eval(x) * b->eval(x);
            case Kind::div: return a->eval(x) / b->eval(x);
            case Kind::neg: return -a->eval(x);
            case Kind::pow_int: return powi(a->eval(x), ival);
            case Kind::f_sin: return sin(a->eval(x));
            case Kind::f_cos: return cos(a->eval(x));
            case Kind::f_exp: return exp(a->eval(x));
            case Kind::f_sqrt: return sqrt(a->eval(x));
            case Kind::f_tanh: return tanh(a->eval(x));
            case Kind::f_log: return log(a->eval(x));
            case Kind::f_square: default: return square(a->eval(x));
        }
    }
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size())
            throw ConfigError("expression: trailing characters at position " + std::to_string(pos_));
        return e;
    }

private:
    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            skip_ws();
            if (accept('+')) e = make(ExprNode::Kind::add, e, term());
            else if (accept('-')) e = make(ExprNode::Kind::sub, e, term());
            else return e;
        }
    }

    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            skip_ws();
            if (accept('*')) e = make(ExprNode::Kind::mul, e, unary());
            else if (accept('/')) e = make(ExprNode::Kind::div, e, unary());
            else return e;
        }
    }

    NodePtr unary() {
        skip_ws();
        if (accept('-')) return make(ExprNode::Kind::neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip_ws();
        if (!accept('^')) return base;
        skip_ws();
        bool negexp = accept('-');
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) throw ConfigError("expression: '^' requires an integer exponent");
        int e = std::atoi(s_.substr(start, pos_ - start).c_str());
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::pow_int;
        n->ival = negexp ? -e : e;
        n->a = base;
        return n;
    }

    NodePtr atom() {
        skip_ws();
        if (accept('(')) {
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (pos_ < s_.size() &&
            (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
            char* end = nullptr;
            double v = std::strtod(s_.c_str() + pos_, &end);
            pos_ = static_cast<std::size_t>(end - s_.c_str());
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::constant;
            n->cval = v;
            return n;
        }
        std::string id = ident();
        if (id.empty()) throw ConfigError("expression: unexpected character at position " + std::to_string(pos_));
        if (id == "pi") {
            auto n = std::make_shared<ExprNode>();
            n->kind = ExprNode::Kind::constant;
            n->cval = std::numbers::pi;
            return n;
        }
        if (id.size() >= 2 && id[0] == 'x') {
            const int k = std::atoi(id.c_str() + 1);
            if (k >= 1 && k <= dim_) {
                auto n = std::make_shared<ExprNode>();
                n->kind = ExprNode::Kind::variable;
                n->ival = k - 1;
                return n;
            }
            throw ConfigError("expression: variable " + id + " out of range for dim " + std::to_string(dim_));
        }
        static const std::pair<const char*, ExprNode::Kind> funcs[] = {
            {"sin", ExprNode::Kind::f_sin},   {"cos", ExprNode::Kind::f_cos},
            {"exp", ExprNode::Kind::f_exp},   {"sqrt", ExprNode::Kind::f_sqrt},
            {"tanh", ExprNode::Kind::f_tanh}, {"log", ExprNode::Kind::f_log},
            {"square", ExprNode::Kind::f_square}};
        for (const auto& [name, kind] : funcs) {
            if (id == name) {
                expect('(');
                NodePtr arg = expr();
                expect(')');
                return make(kind, arg);
            }
        }
        throw ConfigError("expression: unknown identifier '" + id + "'");
    }

    std::string ident() {
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c))
            throw ConfigError(std::string("expression: expected '") + c + "' at position " +
                              std::to_string(pos_));
    }

    std::string s_;
    std::size_t pos_ = 0;
    int dim_;
};

}  // namespace
}  // namespace detail

Expression Expression::parse(const std::string& text, int dim) {
    if (dim < 1) throw ConfigError("expression: dimension must be positive");
    Expression e;
    e.dim_ = dim;
    e.root_ = detail::Parser(text, dim).parse();
    return e;
}

ScalarField Expression::to_field() const {
    auto root = root_;
    return ScalarField::from([root]<class T>(std::span<const T> x) -> T { return root->eval(x); });
}

ProblemDefinition problem_from_file(const std::string& path) {
    const KvMap kv = parse_kv_file(path);
    ProblemDefinition p;
    p.name = kv_get_string(kv, "problem.name", "custom");
    p.dim = static_cast<int>(kv_get_int(kv, "problem.dim"));
    std::vector<double> lo = kv_get_double_list(kv, "problem.lo");
    std::vector<double> hi = kv_get_double_list(kv, "problem.hi");
    if (static_cast<int>(lo.size()) != p.dim || static_cast<int>(hi.size()) != p.dim)
        throw ConfigError(path + ": lo/hi must have 'dim' entries");
    p.domain = Box(lo, hi);
    p.coefficient = Expression::parse(kv_get_string(kv, "problem.coefficient"), p.dim).to_field();
    p.boundary = Expression::parse(kv_get_string(kv, "problem.boundary", "0"), p.dim).to_field();
    if (kv.count("problem.exact_u"))
        p.exact_u = Expression::parse(kv.at("problem.exact_u"), p.dim).to_field();
    if (kv.count("problem.forcing")) {
        p.forcing = Expression::parse(kv.at("problem.forcing"), p.dim).to_field();
    } else if (p.exact_u) {
        p.forcing = differentiate_forcing(p.coefficient, *p.exact_u, p.dim);
    } else {
        throw ConfigError(path + ": needs a forcing expression or an exact_u to derive it from");
    }
    if (kv.count("problem.exact_flux_1")) {
        std::vector<ScalarField> flux;
        for (int k = 1; k <= p.dim; ++k)
            flux.push_back(Expression::parse(kv.at("problem.exact_flux_" + std::to_string(k)), p.dim).to_field());
        p.exact_flux = std::move(flux);
    }
    if (kv.count("problem.epsilons")) p.epsilons = kv_get_double_list(kv, "problem.epsilons");
    run_ellipticity_probe(p);
    return p;
}

}  // namespace fmpinn
