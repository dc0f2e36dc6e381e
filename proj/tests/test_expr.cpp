#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sf/error.hpp"
#include "sf/expr.hpp"

using namespace sf;

namespace {

Expr X() { return Expr::symbol("x"); }
Expr Y() { return Expr::symbol("y"); }
Expr H() { return Expr::symbol("h"); }

Expr f_xy() { return Expr::func("f", {X(), Y()}); }

// Random tree over a small symbol pool; may be non-canonical via *_raw.
Expr random_raw_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 6);
    switch (pick(rng)) {
        case 0: {
            std::uniform_int_distribution<int> c(-3, 3);
            return Expr::integer(c(rng));
        }
        case 1: {
            std::uniform_int_distribution<int> n(-4, 4);
            std::uniform_int_distribution<int> d(1, 5);
            return Expr::rational(n(rng), d(rng));
        }
        case 2: {
            const char* names[] = {"x", "y", "h"};
            std::uniform_int_distribution<int> s(0, 2);
            return Expr::symbol(names[s(rng)]);
        }
        case 3:
        case 4: {
            std::uniform_int_distribution<int> n(2, 3);
            std::vector<Expr> kids;
            for (int i = 0, m = n(rng); i < m; ++i)
                kids.push_back(random_raw_expr(rng, depth - 1));
            return pick(rng) % 2 ? Expr::add_raw(std::move(kids))
                                 : Expr::mul_raw(std::move(kids));
        }
        case 5: {
            std::uniform_int_distribution<int> e(1, 3);
            const char* names[] = {"x", "y", "h"};
            std::uniform_int_distribution<int> s(0, 2);
            return Expr::pow_raw(Expr::symbol(names[s(rng)]),
                                 Expr::integer(e(rng)));
        }
        default:
            return Expr::func("g", {random_raw_expr(rng, depth - 1)});
    }
}

Expr shuffle_children(const Expr& e, std::mt19937_64& rng) {
    std::vector<Expr> kids;
    kids.reserve(e.args().size());
    for (const Expr& a : e.args()) kids.push_back(shuffle_children(a, rng));
    switch (e.kind()) {
        case ExprKind::Add:
            std::shuffle(kids.begin(), kids.end(), rng);
            return Expr::add_raw(std::move(kids));
        case ExprKind::Mul:
            std::shuffle(kids.begin(), kids.end(), rng);
            return Expr::mul_raw(std::move(kids));
        case ExprKind::Pow:
            return Expr::pow_raw(kids[0], kids[1]);
        case ExprKind::FunctionApp:
            return Expr::func(e.name(), std::move(kids));
        case ExprKind::Indexed:
            return Expr::indexed(e.name(), std::move(kids));
        default:
            return e;
    }
}

EvalEnv random_env(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> val(0.5, 2.0);
    EvalEnv env;
    env.bind(Expr::symbol("x"), val(rng));
    env.bind(Expr::symbol("y"), val(rng));
    env.bind(Expr::symbol("h"), val(rng));
    return env;
}

} // namespace

TEST_CASE("like terms collect") {
    Expr e = X() + X();
    CHECK(e.equals(Expr::mul({Expr::integer(2), X()})));
}

TEST_CASE("rationals normalize to lowest terms") {
    Expr e = Expr::mul({Expr::rational(2, 4), H()});
    CHECK(e.equals(Expr::mul({Expr::rational(1, 2), H()})));
    CHECK(to_string(e) == "h/2");
}

TEST_CASE("laplacian center cancellation collapses to zero") {
    Expr hm2 = Expr::pow_raw(H(), Expr::integer(-2));
    Expr e = Expr::add_raw({
        Expr::mul_raw({Expr::integer(-2), f_xy(), hm2}),
        Expr::mul_raw({f_xy(), hm2}),
        Expr::mul_raw({f_xy(), hm2}),
    });
    Expr s = simplify(e);
    CHECK(s.is_zero());

    std::mt19937_64 rng(42);
    for (int i = 0; i < 20; ++i) {
        EvalEnv env = random_env(rng);
        CHECK(std::abs(eval(e, env)) <= 1e-12);
    }
}

TEST_CASE("simplify is idempotent on random trees") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Expr e = random_raw_expr(rng, 4);
        Expr s1 = simplify(e);
        Expr s2 = simplify(s1);
        CHECK(s1.equals(s2));
    }
}

TEST_CASE("canonicalization is confluent under child reordering") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        Expr e = random_raw_expr(rng, 4);
        Expr a = simplify(e);
        Expr b = simplify(shuffle_children(e, rng));
        CHECK(a.equals(b));
    }
}

TEST_CASE("numeric faithfulness of simplify") {
    std::mt19937_64 rng(13);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        Expr e = random_raw_expr(rng, 4);
        Expr s = simplify(e);
        EvalEnv env = random_env(rng);
        double ve = eval(e, env);
        double vs = eval(s, env);
        if (!std::isfinite(ve)) continue;
        ++checked;
        double scale = std::max({std::abs(ve), std::abs(vs), 1.0});
        CHECK(std::abs(ve - vs) / scale <= 1e-12);
    }
    CHECK(checked > 200);
}

TEST_CASE("division by exact zero") {
    CHECK_THROWS_AS(X() / Expr::integer(0), ZeroDivisionError);
    CHECK_THROWS_AS(Expr::pow(Expr::integer(0), Expr::integer(-1)),
                    ZeroDivisionError);
}

TEST_CASE("substitute replaces maximal subtrees") {
    Expr e = Expr::func("f", {X() + H(), Y()});
    Expr r = substitute(e, X(), Expr::integer(0));
    CHECK(r.equals(Expr::func("f", {H(), Y()})));
}

TEST_CASE("substitute folds constants") {
    Expr a = Expr::symbol("a");
    Expr dt = Expr::symbol("dt");
    std::vector<std::pair<Expr, Expr>> m = {
        {a, Expr::rational(1, 2)},
        {dt, Expr::rational(1, 2)},
    };
    Expr r = substitute(Expr::mul({a, dt}), m);
    CHECK(r.equals(Expr::rational(1, 4)));
    CHECK(to_string(r) == "1/4");
}

TEST_CASE("substitute is simultaneous, values not rescanned") {
    std::vector<std::pair<Expr, Expr>> swap = {{X(), Y()}, {Y(), X()}};
    Expr e = X() + Expr::mul({Expr::integer(2), Y()});
    Expr r = substitute(e, swap);
    CHECK(r.equals(Y() + Expr::mul({Expr::integer(2), X()})));
}

TEST_CASE("substitute with unmatched keys is a no-op") {
    Expr e = X() + Y();
    Expr r = substitute(e, Expr::symbol("zz"), Expr::integer(5));
    CHECK(r.equals(e));
}

TEST_CASE("solve_linear identity and scaled cases") {
    Expr u_next = Expr::symbol("u_next");
    Expr q = Expr::symbol("q");
    Expr u = Expr::symbol("u");

    CHECK(solve_linear({X(), Y()}, X()).equals(Y()));

    Expr sol = solve_linear({Expr::mul({Expr::integer(2), u_next}), u + q},
                            u_next);
    Expr expected = simplify(Expr::mul({Expr::rational(1, 2), u + q}));
    CHECK(sol.equals(expected));
}

TEST_CASE("solve_linear rejects nonlinear and absent targets") {
    Expr w = Expr::symbol("w");
    CHECK_THROWS_AS(solve_linear({Expr::mul({w, w}), X()}, w), NotAffineError);
    CHECK_THROWS_AS(solve_linear({Expr::func("g", {w}), X()}, w),
                    NotAffineError);
    CHECK_THROWS_AS(solve_linear({X(), Y()}, w), SingularCoefficientError);
    // coefficient that cancels to zero
    CHECK_THROWS_AS(
        solve_linear({Expr::add_raw({Expr::mul_raw({X(), w}),
                                     Expr::mul_raw({Expr::integer(-1), X(), w}),
                                     Y()}),
                      Expr::integer(0)},
                     w),
        SingularCoefficientError);
}

TEST_CASE("solve_linear round-trip on random affine equations") {
    std::mt19937_64 rng(23);
    Expr w = Expr::symbol("w");
    for (int i = 0; i < 100; ++i) {
        std::uniform_int_distribution<int> cn(-5, 5);
        std::uniform_int_distribution<int> cd(1, 4);
        Rational a(0);
        while (a.is_zero()) a = Rational(cn(rng), cd(rng));
        Expr b = simplify(random_raw_expr(rng, 3));
        Expr c = simplify(random_raw_expr(rng, 3));
        if (contains(b, w) || contains(c, w)) continue;
        Eqn eq{Expr::add({Expr::mul({Expr::rational(a), w}), b}), c};
        Expr sol = solve_linear(eq, w);
        Expr residual = simplify(expand(substitute(eq.lhs - eq.rhs, w, sol)));
        CHECK(residual.is_zero());
    }
}

TEST_CASE("count_ops") {
    CHECK(count_ops(X()) == 0);
    CHECK(count_ops(Expr::add_raw({X(), Y(), Expr::symbol("z")})) == 2);
    CHECK(count_ops(Expr::pow_raw(H(), Expr::integer(-2))) == 1);
    Expr term = Expr::mul_raw({Expr::integer(-2), f_xy(),
                               Expr::pow_raw(H(), Expr::integer(-2))});
    CHECK(count_ops(term) == 3); // two mul ops plus one pow
}

TEST_CASE("pretty printer matches reference notation") {
    Expr hm2 = Expr::pow(H(), Expr::integer(-2));
    Expr center = Expr::mul({Expr::integer(-2), f_xy(), hm2});
    Expr left = Expr::mul({Expr::func("f", {-H() + X(), Y()}), hm2});
    Expr right = Expr::mul({Expr::func("f", {H() + X(), Y()}), hm2});
    Expr e = Expr::add({center, left, right});
    CHECK(to_string(e) ==
          "-2*f(x, y)/h**2 + f(-h + x, y)/h**2 + f(h + x, y)/h**2");

    Expr hm1 = Expr::pow(H(), Expr::integer(-1));
    Expr d1 = Expr::add({Expr::mul({Expr::integer(-1), f_xy(), hm1}),
                         Expr::mul({Expr::func("f", {H() + X(), Y()}), hm1})});
    CHECK(to_string(d1) == "-f(x, y)/h + f(h + x, y)/h");
}

TEST_CASE("printer handles coefficients and denominators") {
    CHECK(to_string(Expr::mul({Expr::rational(3, 4), X()})) == "3*x/4");
    CHECK(to_string(Expr::mul({Expr::rational(1, 4), X()})) == "x/4");
    CHECK(to_string(X() / (H() * Expr::symbol("s"))) == "x/(h*s)");
    CHECK(to_string(X() - Y()) == "x - y");
    Expr m = Expr::func("m", {X(), Y()});
    Expr sum = X() + Y();
    CHECK(to_string(Expr::mul({m, sum})) == "(x + y)*m(x, y)");
    CHECK(to_string(Expr::indexed("u", {X(), Y()})) == "u[x, y]");
}

TEST_CASE("canonical order is a consistent total order") {
    std::mt19937_64 rng(37);
    std::vector<Expr> pool;
    for (int i = 0; i < 60; ++i) pool.push_back(simplify(random_raw_expr(rng, 3)));
    for (int i = 0; i < 400; ++i) {
        std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
        const Expr& a = pool[pick(rng)];
        const Expr& b = pool[pick(rng)];
        const Expr& c = pool[pick(rng)];
        int ab = compare(a, b);
        CHECK(ab == -compare(b, a));
        if (ab <= 0 && compare(b, c) <= 0) CHECK(compare(a, c) <= 0);
        if (a.equals(b)) CHECK(ab == 0);
    }
}

TEST_CASE("expand distributes products over sums") {
    Expr e = Expr::mul({X() + Y(), H()});
    Expr ex = expand(e);
    CHECK(ex.equals(Expr::add({Expr::mul({X(), H()}), Expr::mul({Y(), H()})})));
}

TEST_CASE("atoms and free symbols") {
    Expr e = Expr::mul({f_xy(), Expr::pow(H(), Expr::integer(-2))});
    auto at = atoms(e);
    REQUIRE(at.size() == 2);
    auto syms = free_symbols(e);
    CHECK(syms == std::vector<std::string>{"h", "x", "y"});
}
