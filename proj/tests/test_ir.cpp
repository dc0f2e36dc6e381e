#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sf/error.hpp"
#include "sf/fd.hpp"
#include "sf/interp.hpp"
#include "sf/ir.hpp"

using namespace sf;

namespace {

Expr sym(const char* s) { return Expr::symbol(s); }

} // namespace

TEST_CASE("indexify resolves spacing shifts to integer offsets") {
    Grid grid;
    grid.create_dense("f", {10, 12}, 2);
    grid.create_time("u", {10, 12}, 1, 2);

    Expr fshift = Expr::func("f", {simplify(sym("h") + sym("x")), sym("y")});
    Expr expected = Expr::indexed("f", {simplify(sym("x") + Expr::integer(1)),
                                        sym("y")});
    CHECK(indexify(fshift, grid).equals(expected));

    Expr ushift = Expr::func("u", {simplify(sym("s") + sym("t")), sym("x"),
                                   sym("y")});
    Expr uexp = Expr::indexed("u", {simplify(sym("t") + Expr::integer(1)),
                                    sym("x"), sym("y")});
    CHECK(indexify(ushift, grid).equals(uexp));

    // spacing symbols in coefficient positions survive untouched
    Expr coeff = simplify(Expr::func("f", {sym("x"), sym("y")}) *
                          Expr::pow(sym("h"), Expr::integer(-2)));
    Expr lowered = indexify(coeff, grid);
    CHECK(free_symbols(lowered) ==
          std::vector<std::string>{"h", "x", "y"});

    Expr bad = Expr::func("f", {simplify(sym("x") + sym("h") * sym("h")),
                                sym("y")});
    CHECK_THROWS_AS(indexify(bad, grid), NonIntegerOffsetError);
}

TEST_CASE("indexify is idempotent on already-indexed expressions") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {10, 12}, 1, 2);
    Expr once = indexify(simplify(laplace(u) + forward(u)), grid);
    Expr twice = indexify(once, grid);
    CHECK(once.equals(twice));
    CHECK(to_string(once) == to_string(twice));
}

TEST_CASE("iteration space follows maximal stencil offsets") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {1000, 1000}, 1, 2);
    Eqn eq = indexify({forward(u), simplify(laplace(u))}, grid);
    std::vector<Dimension> dims = infer_iteration_space({&eq, 1}, grid);
    REQUIRE(dims.size() == 3);
    CHECK(dims[0].is_time);
    CHECK(dims[1].name == "x");
    CHECK(dims[1].lower_pad == 1);
    CHECK(dims[1].upper_pad == 1);
    CHECK(dims[1].extent == 1000);
    CHECK(dims[2].name == "y");

    Grid g4;
    GridFunction& f = g4.create_dense("f", {100}, 4);
    Eqn e4 = indexify({f.sym(), dx2(f)}, g4);
    std::vector<Dimension> d4 = infer_iteration_space({&e4, 1}, g4);
    REQUIRE(d4.size() == 1);
    CHECK(d4[0].lower_pad == 2);
    CHECK(d4[0].upper_pad == 2);

    // no offsets: full range
    Grid g0;
    GridFunction& w = g0.create_dense("w", {16, 16}, 2);
    Eqn e0 = indexify({w.sym(), simplify(w.sym() * Expr::integer(2))}, g0);
    std::vector<Dimension> d0 = infer_iteration_space({&e0, 1}, g0);
    CHECK(d0[0].lower_pad == 0);
    CHECK(d0[0].upper_pad == 0);
}

TEST_CASE("pads exhausting the extent is an error") {
    Grid grid;
    grid.create_dense("f", {3}, 2);
    Expr x = sym("x");
    Eqn eq{Expr::indexed("f", {x}),
           simplify(Expr::indexed("f", {simplify(x + Expr::integer(-2))}) +
                    Expr::indexed("f", {simplify(x + Expr::integer(2))}))};
    CHECK_THROWS_AS(infer_iteration_space({&eq, 1}, grid),
                    EmptyIterationSpaceError);
}

TEST_CASE("time buffers lower to modulo aliases") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {16, 16}, 1, 2);
    Expr a = sym("a");
    Eqn eq = indexify({forward(u),
                       simplify(u.sym() + a * symbols::s() * laplace(u))},
                      grid);
    std::vector<Dimension> dims = infer_iteration_space({&eq, 1}, grid);
    for (Dimension& d : dims)
        if (d.is_time) d.extent = 4;
    LoopNest nest = make_loop_nest(dims, {&eq, 1});
    nest = lower_time_buffers(std::move(nest), grid);

    std::string text = to_string(nest);
    CHECK(text.find("t0 = (t + 0) % 2") != std::string::npos);
    CHECK(text.find("t1 = (t + 1) % 2") != std::string::npos);
    CHECK(text.find("u[t1, x, y]") != std::string::npos);

    // second-order time: three slots
    Grid g3;
    GridFunction& v = g3.create_time("v", {16, 16}, 2, 2);
    Eqn eq3 = indexify(
        {forward(v), simplify(v.sym() + backward(v) + laplace(v))}, g3);
    std::vector<Dimension> dims3 = infer_iteration_space({&eq3, 1}, g3);
    for (Dimension& d : dims3)
        if (d.is_time) d.extent = 3;
    LoopNest nest3 = lower_time_buffers(make_loop_nest(dims3, {&eq3, 1}), g3);
    std::string t3 = to_string(nest3);
    CHECK(t3.find("t0 = (t + 2) % 3") != std::string::npos);
    CHECK(t3.find("t1 = (t + 0) % 3") != std::string::npos);
    CHECK(t3.find("t2 = (t + 1) % 3") != std::string::npos);
}

TEST_CASE("no intra-step read-after-write hazard across aliases") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {16, 16}, 1, 2);
    Expr a = sym("a");
    Eqn eq = indexify({forward(u),
                       simplify(u.sym() + a * symbols::s() * laplace(u))},
                      grid);
    std::vector<Dimension> dims = infer_iteration_space({&eq, 1}, grid);
    for (Dimension& d : dims)
        if (d.is_time) d.extent = 4;
    LoopNest nest = lower_time_buffers(make_loop_nest(dims, {&eq, 1}), grid);

    for_each_assign(nest, [&](const IrNode& n) {
        if (n.lhs.kind() != ExprKind::Indexed) return;
        std::string written = n.lhs.args()[0].name();
        std::function<void(const Expr&)> scan = [&](const Expr& e) {
            if (e.kind() == ExprKind::Indexed && e.name() == "u")
                CHECK(e.args()[0].name() != written);
            for (const Expr& c : e.args()) scan(c);
        };
        scan(n.rhs);
    });
}

TEST_CASE("custom iterations insert sequential loops") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {16, 16}, 1, 2);
    Expr a = sym("a");
    Eqn eq = indexify({forward(u),
                       simplify(u.sym() + a * symbols::s() * laplace(u))},
                      grid);
    std::vector<Dimension> dims = infer_iteration_space({&eq, 1}, grid);
    for (Dimension& d : dims)
        if (d.is_time) d.extent = 4;
    LoopNest nest = make_loop_nest(dims, {&eq, 1});

    // empty equation set: unchanged
    std::string before = to_string(nest);
    Dimension p{"p", 5};
    nest = add_custom_iteration(std::move(nest), {}, p, 0, 5, true);
    CHECK(to_string(nest) == before);

    grid.create_array("q", {{"t", 4, "", true}, {"p", 5, "", false}},
                      ElemType::f32);
    Expr psym = sym("p");
    Expr tsym = sym("t");
    Eqn inject{Expr::indexed("u", {simplify(tsym + Expr::integer(1)),
                                   Expr::integer(3), Expr::integer(3)}),
               Expr::indexed("q", {tsym, psym})};
    nest = add_custom_iteration(std::move(nest), {&inject, 1}, p, 0, 5, true);
    std::string text = to_string(nest);
    CHECK(text.find("for p = 0 .. 5 [single]") != std::string::npos);

    Eqn bad{Expr::indexed("u", {tsym, sym("x"), Expr::integer(0)}),
            Expr::integer(1)};
    CHECK_THROWS_AS(
        add_custom_iteration(std::move(nest), {&bad, 1}, p, 0, 5, true),
        UnboundIndexError);
}

TEST_CASE("interpreting the lowered nest matches direct evaluation") {
    // one diffusion-like update on a small grid, checked point by point
    Grid grid;
    GridFunction& u = grid.create_time("u", {8, 8}, 1, 2, ElemType::f64);
    Expr a = sym("a");
    Eqn sym_eq{forward(u),
               simplify(u.sym() + a * symbols::s() * laplace(u))};
    Eqn eq = indexify(sym_eq, grid);

    std::vector<std::pair<Expr, Expr>> subs = {
        {sym("a"), Expr::rational(1, 4)},
        {symbols::h(), Expr::integer(1)},
        {symbols::s(), Expr::rational(1, 2)},
    };
    Eqn folded{substitute(eq.lhs, subs), substitute(eq.rhs, subs)};

    const long nt = 3;
    std::vector<Dimension> dims = infer_iteration_space({&folded, 1}, grid);
    for (Dimension& d : dims)
        if (d.is_time) d.extent = nt;
    LoopNest nest = lower_time_buffers(make_loop_nest(dims, {&folded, 1}),
                                       grid);

    for (long i = 0; i < 8; ++i)
        for (long j = 0; j < 8; ++j)
            u.set({0, i, j}, std::sin(0.7 * i) + 0.3 * std::cos(1.1 * j));

    // direct evaluation with the same alternating-slot semantics
    std::vector<double> bufs[2];
    bufs[0].assign(64, 0.0);
    bufs[1].assign(64, 0.0);
    for (long i = 0; i < 8; ++i)
        for (long j = 0; j < 8; ++j) bufs[0][i * 8 + j] = u.get({0, i, j});
    for (long step = 0; step < nt; ++step) {
        const std::vector<double>& cur = bufs[step % 2];
        std::vector<double>& nxt = bufs[(step + 1) % 2];
        for (long i = 1; i < 7; ++i)
            for (long j = 1; j < 7; ++j)
                nxt[i * 8 + j] =
                    cur[i * 8 + j] +
                    0.125 * (cur[(i + 1) * 8 + j] + cur[(i - 1) * 8 + j] +
                             cur[i * 8 + j + 1] + cur[i * 8 + j - 1] -
                             4.0 * cur[i * 8 + j]);
    }

    interpret(nest, grid);
    long slot = nt % 2;
    for (long i = 1; i < 7; ++i)
        for (long j = 1; j < 7; ++j)
            CHECK(u.get({slot, i, j}) ==
                  doctest::Approx(bufs[slot][i * 8 + j]).epsilon(1e-12));
}
