#pragma once

#include <span>
#include <vector>

#include "sf/grid.hpp"

namespace sf {

// Sample offsets (in units of the grid spacing) and the exact weights that
// reproduce the requested derivative on all polynomials the point count can
// resolve.
struct StencilSpec {
    int derivative_order;
    std::vector<Rational> offsets;
    std::vector<Rational> weights;
};

// Exact weights w_k with sum_k w_k * p(offset_k) = p^(d)(0) for every
// polynomial p of degree < offsets.size(), from the moment (Vandermonde)
// system solved in exact rational arithmetic.
std::vector<Rational> fd_weights(int derivative_order,
                                 std::span<const Rational> offsets);

StencilSpec make_stencil(int derivative_order,
                         std::vector<Rational> offsets);

// Centered sample offsets -p..p reaching the requested accuracy order.
std::vector<Rational> centered_offsets(int derivative_order,
                                       int accuracy_order);

// Expand a derivative of a registered function application at explicit
// offsets: sum_k w_k * f(..., dim + offset_k*spacing, ...) / spacing^d.
// The application may already be shifted in other dimensions.
Expr as_finite_diff(const Grid& grid, const Expr& func_app, const Expr& dim,
                    int derivative_order, std::span<const Rational> offsets);

// Accuracy-driven centered form.
Expr as_finite_diff(const Grid& grid, const Expr& func_app, const Expr& dim,
                    int derivative_order, int accuracy_order);

// Shorthand derivatives at the function's own discretization orders.
Expr dx(const GridFunction& gf);
Expr dy(const GridFunction& gf);
Expr dz(const GridFunction& gf);
Expr dx2(const GridFunction& gf);
Expr dy2(const GridFunction& gf);
Expr dz2(const GridFunction& gf);
Expr dxy(const GridFunction& gf);
Expr dt(const GridFunction& gf);
Expr dt2(const GridFunction& gf);

// dx2 + dy2 (+ dz2), matching the function's spatial rank.
Expr laplace(const GridFunction& gf);

// Highest / lowest point of the time stencil: u(t + s, ...) / u(t - s, ...).
Expr forward(const GridFunction& gf);
Expr backward(const GridFunction& gf);

} // namespace sf
