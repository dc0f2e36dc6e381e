#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "sf/error.hpp"
#include "sf/interp.hpp"
#include "sf/sparse.hpp"

using namespace sf;

namespace {

// run an operator consisting only of custom iterations for one step
void run_customs(Grid& grid, std::vector<CustomIteration> customs) {
    Operator::Options opt;
    opt.nt = 1;
    opt.customs = std::move(customs);
    Operator op(grid, {}, std::move(opt));
    op.interpret();
}

} // namespace

TEST_CASE("weights on a node and at the cell center") {
    std::vector<long> extents{10, 10};
    double coord_node[] = {3.0, 4.0};
    InterpWeights on_node = interpolation_weights(coord_node, 1.0, extents);
    CHECK(on_node.cell == std::vector<long>{3, 4});
    CHECK(on_node.weights[0] == 1.0);
    CHECK(on_node.weights[1] == 0.0);
    CHECK(on_node.weights[2] == 0.0);
    CHECK(on_node.weights[3] == 0.0);

    double coord_center[] = {3.5, 4.5};
    InterpWeights center = interpolation_weights(coord_center, 1.0, extents);
    for (double w : center.weights) CHECK(w == doctest::Approx(0.25));
}

TEST_CASE("partition of unity and linear reproduction") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(0.0, 8.999);
    std::vector<long> extents{10, 10};
    for (int i = 0; i < 100; ++i) {
        double c[] = {pos(rng), pos(rng)};
        InterpWeights w = interpolation_weights(c, 1.0, extents);
        double sum = 0.0;
        double lin = 0.0;
        for (size_t k = 0; k < w.weights.size(); ++k) {
            double cx = static_cast<double>(w.cell[0] + ((k >> 0) & 1));
            double cy = static_cast<double>(w.cell[1] + ((k >> 1) & 1));
            sum += w.weights[k];
            lin += w.weights[k] * (0.5 + 1.25 * cx - 0.75 * cy);
        }
        CHECK(std::abs(sum - 1.0) <= 1e-14);
        CHECK(lin == doctest::Approx(0.5 + 1.25 * c[0] - 0.75 * c[1])
                         .epsilon(1e-12));
    }
}

TEST_CASE("points outside the valid extent are rejected") {
    std::vector<long> extents{10, 10};
    double neg[] = {-0.5, 2.0};
    CHECK_THROWS_AS(interpolation_weights(neg, 1.0, extents),
                    OutOfDomainError);
    double far[] = {9.5, 2.0}; // cell 9 has no upper neighbor
    CHECK_THROWS_AS(interpolation_weights(far, 1.0, extents),
                    OutOfDomainError);
}

TEST_CASE("injection accumulates and coincident points sum") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {12, 12}, 1, 2, ElemType::f64);
    std::vector<std::vector<double>> coords = {{5.0, 5.0}, {5.0, 5.0}};
    SparsePointSet pts(grid, "src", coords, 1, 1.0, u);
    pts.set_series(0, 0, 2.0);
    pts.set_series(0, 1, 3.0);

    CustomIteration inject =
        build_inject(u, pts, Expr::integer(1), 0, 0);
    CHECK(inject.eqs.size() == 4); // 2^d corner updates
    run_customs(grid, {inject});

    CHECK(u.get({0, 5, 5}) == 5.0); // both contributions on one node
    CHECK(u.get({0, 6, 5}) == 0.0);
}

TEST_CASE("sampling a grid node returns the node value") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {12, 12}, 1, 2, ElemType::f64);
    u.set({0, 4, 7}, 2.5);
    std::vector<std::vector<double>> coords = {{4.0, 7.0}};
    SparsePointSet rec(grid, "rec", coords, 1, 1.0, u);
    run_customs(grid, {build_sample(u, rec, 0, 0)});
    CHECK(rec.series(0, 0) == 2.5);
}

TEST_CASE("sampling reproduces affine fields") {
    Grid grid;
    GridFunction& u = grid.create_time("u", {16, 16}, 1, 2, ElemType::f32);
    for (long i = 0; i < 16; ++i)
        for (long j = 0; j < 16; ++j)
            u.set({0, i, j}, 0.2 + 0.7 * i - 0.4 * j);

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> pos(0.0, 14.999);
    std::vector<std::vector<double>> coords;
    for (int p = 0; p < 50; ++p) coords.push_back({pos(rng), pos(rng)});
    SparsePointSet rec(grid, "rec", coords, 1, 1.0, u);
    run_customs(grid, {build_sample(u, rec, 0, 0)});
    for (int p = 0; p < 50; ++p) {
        double expect = 0.2 + 0.7 * coords[p][0] - 0.4 * coords[p][1];
        CHECK(std::abs(rec.series(0, p) - expect) <= 1e-5);
    }
}

TEST_CASE("inject and sample are transposes") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> pos(0.5, 18.0);
    std::uniform_real_distribution<double> val(-1.0, 1.0);

    std::vector<std::vector<double>> coords;
    for (int p = 0; p < 40; ++p) coords.push_back({pos(rng), pos(rng)});

    // <inject(r), g>
    Grid gi;
    GridFunction& ui = gi.create_time("u", {20, 20}, 1, 2, ElemType::f32);
    SparsePointSet pi(gi, "pts", coords, 1, 1.0, ui);
    std::vector<double> r(coords.size());
    for (double& v : r) v = val(rng);
    for (size_t p = 0; p < r.size(); ++p) pi.set_series(0, p, r[p]);
    run_customs(gi, {build_inject(ui, pi, Expr::integer(1), 0, 0)});

    std::vector<double> g(20 * 20);
    for (double& v : g) v = val(rng);
    double lhs = 0.0;
    for (long i = 0; i < 20; ++i)
        for (long j = 0; j < 20; ++j)
            lhs += ui.get({0, i, j}) * g[static_cast<size_t>(i * 20 + j)];

    // <r, sample(g)>
    Grid gs;
    GridFunction& us = gs.create_time("u", {20, 20}, 1, 2, ElemType::f32);
    for (long i = 0; i < 20; ++i)
        for (long j = 0; j < 20; ++j)
            us.set({0, i, j}, g[static_cast<size_t>(i * 20 + j)]);
    SparsePointSet ps(gs, "pts", coords, 1, 1.0, us);
    run_customs(gs, {build_sample(us, ps, 0, 0)});
    double rhs = 0.0;
    for (size_t p = 0; p < r.size(); ++p) rhs += r[p] * ps.series(0, p);

    double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    CHECK(std::abs(lhs - rhs) / scale <= 1e-6);
}

TEST_CASE("point files round trip") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "sf_points.txt";
    fs::path series = fs::temp_directory_path() / "sf_series.txt";
    {
        std::ofstream out(path);
        out << "# two points, one with its own series\n";
        out << "1.5 2.5 @" << series.string() << "\n3.25 4.75\n";
        std::ofstream s(series);
        s << "0.5\n-0.25\n1\n";
    }
    PointFile pf = load_point_file(path.string());
    REQUIRE(pf.coords.size() == 2);
    CHECK(pf.coords[1][0] == 3.25);
    CHECK(pf.coords[1][1] == 4.75);
    CHECK(pf.series_refs[0] == series.string());
    CHECK(pf.series_refs[1].empty());
    std::vector<double> col = load_series_column(pf.series_refs[0]);
    CHECK(col == std::vector<double>{0.5, -0.25, 1.0});
    fs::remove(path);
    fs::remove(series);
}
