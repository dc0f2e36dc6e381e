#include "sf/fd.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include "sf/error.hpp"

namespace sf {

namespace mp = boost::multiprecision;
using WideRat = mp::cpp_rational;

namespace {

WideRat widen(const Rational& r) {
    return WideRat(r.num()) / WideRat(r.den());
}

Rational narrow(const WideRat& w) {
    mp::cpp_int n = mp::numerator(w);
    mp::cpp_int d = mp::denominator(w);
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
        throw RationalOverflowError("stencil weight exceeds 64-bit range");
    return Rational(n.convert_to<long long>(), d.convert_to<long long>());
}

} // namespace

std::vector<Rational> fd_weights(int derivative_order,
                                 std::span<const Rational> offsets) {
    const size_t n = offsets.size();
    if (derivative_order < 1)
        throw InsufficientPointsError("derivative order must be positive");
    if (n < static_cast<size_t>(derivative_order) + 1)
        throw InsufficientPointsError(
            "need at least " + std::to_string(derivative_order + 1) +
            " points, got " + std::to_string(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (offsets[i] == offsets[j])
                throw DuplicateOffsetsError("repeated offset " +
                                            offsets[i].str());

    // moment system: row j demands sum_k w_k x_k^j = d! [j == d]
    std::vector<std::vector<WideRat>> m(n, std::vector<WideRat>(n + 1));
    for (size_t j = 0; j < n; ++j) {
        for (size_t k = 0; k < n; ++k) {
            WideRat x = widen(offsets[k]);
            WideRat p = 1;
            for (size_t e = 0; e < j; ++e) p *= x;
            m[j][k] = p;
        }
        m[j][n] = 0;
    }
    WideRat dfact = 1;
    for (int i = 2; i <= derivative_order; ++i) dfact *= i;
    m[static_cast<size_t>(derivative_order)][n] = dfact;

    // exact Gauss-Jordan; the matrix is Vandermonde, hence regular
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && m[piv][col] == 0) ++piv;
        std::swap(m[col], m[piv]);
        for (size_t row = 0; row < n; ++row) {
            if (row == col || m[row][col] == 0) continue;
            WideRat f = m[row][col] / m[col][col];
            for (size_t k = col; k <= n; ++k) m[row][k] -= f * m[col][k];
        }
    }

    std::vector<Rational> w(n);
    for (size_t k = 0; k < n; ++k) w[k] = narrow(m[k][n] / m[k][k]);
    return w;
}

StencilSpec make_stencil(int derivative_order, std::vector<Rational> offsets) {
    StencilSpec spec;
    spec.derivative_order = derivative_order;
    spec.weights = fd_weights(derivative_order, offsets);
    spec.offsets = std::move(offsets);
    return spec;
}

std::vector<Rational> centered_offsets(int derivative_order,
                                       int accuracy_order) {
    if (accuracy_order < 2 || accuracy_order % 2 != 0)
        throw InvalidOrderError("centered stencils need even accuracy >= 2");
    int p = (accuracy_order + 2 * ((derivative_order - 1) / 2)) / 2;
    std::vector<Rational> offsets;
    offsets.reserve(2 * p + 1);
    for (int k = -p; k <= p; ++k) offsets.emplace_back(k);
    return offsets;
}

namespace {

size_t dim_slot(const GridFunction& gf, const Expr& dim) {
    if (dim.kind() != ExprKind::Symbol)
        throw BadDimensionError("dimension must be a symbol");
    for (size_t i = 0; i < gf.dims().size(); ++i)
        if (gf.dims()[i].name == dim.name()) return i;
    throw BadDimensionError("function " + gf.name() + " has no dimension " +
                            dim.name());
}

Expr expand_derivative(const GridFunction& gf, const Expr& func_app,
                       const Expr& dim, int derivative_order,
                       std::span<const Rational> offsets) {
    size_t slot = dim_slot(gf, dim);
    const std::string& spacing = gf.dims()[slot].spacing;
    if (spacing.empty())
        throw BadDimensionError("dimension " + dim.name() + " has no spacing");
    Expr spacing_sym = Expr::symbol(spacing);

    std::vector<Rational> weights = fd_weights(derivative_order, offsets);
    Expr inv_spacing = Expr::pow(spacing_sym, Expr::integer(-derivative_order));

    std::vector<Expr> terms;
    terms.reserve(offsets.size());
    for (size_t k = 0; k < offsets.size(); ++k) {
        if (weights[k].is_zero()) continue;
        std::vector<Expr> args = func_app.args();
        args[slot] =
            simplify(args[slot] + Expr::rational(offsets[k]) * spacing_sym);
        terms.push_back(Expr::mul({Expr::rational(weights[k]),
                                   Expr::func(gf.name(), std::move(args)),
                                   inv_spacing}));
    }
    return simplify(Expr::add(std::move(terms)));
}

void require_time(const GridFunction& gf, const char* what) {
    if (!gf.is_time_varying())
        throw MissingTimeDimensionError(std::string(what) + " needs a " +
                                        "time-varying function, " + gf.name() +
                                        " is dense");
}

Expr spatial(const GridFunction& gf, const char* dim, int deriv_order) {
    std::vector<Rational> offsets =
        centered_offsets(deriv_order, gf.space_order());
    return expand_derivative(gf, gf.sym(), Expr::symbol(dim), deriv_order,
                             offsets);
}

} // namespace

Expr as_finite_diff(const Grid& grid, const Expr& func_app, const Expr& dim,
                    int derivative_order, std::span<const Rational> offsets) {
    const GridFunction& gf = grid.metadata_of(func_app);
    return expand_derivative(gf, func_app, dim, derivative_order, offsets);
}

Expr as_finite_diff(const Grid& grid, const Expr& func_app, const Expr& dim,
                    int derivative_order, int accuracy_order) {
    std::vector<Rational> offsets =
        centered_offsets(derivative_order, accuracy_order);
    return as_finite_diff(grid, func_app, dim, derivative_order, offsets);
}

Expr dx(const GridFunction& gf) { return spatial(gf, "x", 1); }
Expr dy(const GridFunction& gf) { return spatial(gf, "y", 1); }
Expr dz(const GridFunction& gf) { return spatial(gf, "z", 1); }
Expr dx2(const GridFunction& gf) { return spatial(gf, "x", 2); }
Expr dy2(const GridFunction& gf) { return spatial(gf, "y", 2); }
Expr dz2(const GridFunction& gf) { return spatial(gf, "z", 2); }

Expr dxy(const GridFunction& gf) {
    // nested application: first derivative in x, then in y on every shifted
    // instance the x expansion produced
    std::vector<Rational> offsets = centered_offsets(1, gf.space_order());
    Expr in_x = spatial(gf, "x", 1);
    std::vector<std::pair<Expr, Expr>> mapping;
    for (const Expr& atom : atoms(in_x)) {
        if (atom.kind() != ExprKind::FunctionApp || atom.name() != gf.name())
            continue;
        mapping.emplace_back(
            atom, expand_derivative(gf, atom, Expr::symbol("y"), 1, offsets));
    }
    return substitute(in_x, mapping);
}

Expr dt(const GridFunction& gf) {
    require_time(gf, "dt");
    std::vector<Rational> offsets;
    if (*gf.time_order() == 1) {
        offsets = {Rational(0), Rational(1)}; // one-sided forward step
    } else {
        offsets = {Rational(-1), Rational(1)}; // centered two-point form
    }
    return expand_derivative(gf, gf.sym(), Expr::symbol("t"), 1, offsets);
}

Expr dt2(const GridFunction& gf) {
    require_time(gf, "dt2");
    if (*gf.time_order() < 2)
        throw InvalidOrderError("dt2 needs time_order >= 2 on " + gf.name());
    std::vector<Rational> offsets = centered_offsets(2, *gf.time_order());
    return expand_derivative(gf, gf.sym(), Expr::symbol("t"), 2, offsets);
}

Expr laplace(const GridFunction& gf) {
    size_t rank = gf.space_shape().size();
    std::vector<Expr> parts{dx2(gf)};
    if (rank >= 2) parts.push_back(dy2(gf));
    if (rank >= 3) parts.push_back(dz2(gf));
    return simplify(Expr::add(std::move(parts)));
}

namespace {

Expr time_shift(const GridFunction& gf, int direction) {
    require_time(gf, direction > 0 ? "forward" : "backward");
    std::vector<Expr> args = gf.sym().args();
    args[0] = simplify(args[0] + Expr::integer(direction) * symbols::s());
    return Expr::func(gf.name(), std::move(args));
}

} // namespace

Expr forward(const GridFunction& gf) { return time_shift(gf, 1); }
Expr backward(const GridFunction& gf) { return time_shift(gf, -1); }

} // namespace sf
