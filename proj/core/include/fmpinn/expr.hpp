#pragma once

#include <memory>
#include <string>

#include "fmpinn/scalar_field.hpp"

namespace fmpinn {

namespace detail {
struct ExprNode;
}

/// Arithmetic expression over variables x1..xd, parsed once and evaluable
/// at doubles and duals. Grammar: + - * / unary-minus, integer powers via ^,
/// parentheses, the constant pi, and the functions sin cos exp sqrt tanh
/// log square. Everything reduces to the primitive operation set.
class Expression {
public:
    static Expression parse(const std::string& text, int dim);

    ScalarField to_field() const;
    int dim() const { return dim_; }

private:
    std::shared_ptr<const detail::ExprNode> root_;
    int dim_ = 0;
};

}  // namespace fmpinn
