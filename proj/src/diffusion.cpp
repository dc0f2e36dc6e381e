#include "sf/diffusion.hpp"

#include <cmath>

#include "sf/error.hpp"
#include "sf/fd.hpp"

namespace sf {

Rational DiffusionConfig::dt() const {
    Rational dx2 = dx * dx;
    Rational dy2 = dy * dy;
    Rational base = dx2 * dy2 / (Rational(2) * alpha * (dx2 + dy2));
    if (order == 2) return base;
    // the base step sits exactly at the order-2 stability limit; wider
    // stencils have a larger spectral radius and need the exact ratio
    std::vector<Rational> w = fd_weights(2, centered_offsets(2, order));
    Rational lam(0);
    for (const Rational& v : w)
        lam = lam + (v < Rational(0) ? -v : v);
    Rational ratio = Rational(4) / lam;
    return ratio < Rational(1) ? base * ratio : base;
}

std::vector<double> diffusion_reference(const DiffusionConfig& cfg,
                                        std::span<const double> u0) {
    if (static_cast<long>(u0.size()) != cfg.nx * cfg.ny)
        throw InvalidShapeError("initial field size mismatch");
    if (cfg.order != 2 && cfg.order != 4)
        throw InvalidOrderError("reference supports orders 2 and 4");

    const long nx = cfg.nx;
    const long ny = cfg.ny;
    const double a = cfg.alpha.to_double();
    const double dt = cfg.dt().to_double();
    const double dx2 = cfg.dx.to_double() * cfg.dx.to_double();
    const double dy2 = cfg.dy.to_double() * cfg.dy.to_double();

    // both slots start from the initial field so boundary values persist
    // across the alternating buffers
    std::vector<double> bufs[2];
    bufs[0].assign(u0.begin(), u0.end());
    bufs[1].assign(u0.begin(), u0.end());

    const long r = cfg.order / 2;
    auto at = [ny](const std::vector<double>& b, long i, long j) {
        return b[static_cast<size_t>(i * ny + j)];
    };

    for (long step = 0; step < cfg.nt; ++step) {
        const std::vector<double>& cur = bufs[step % 2];
        std::vector<double>& nxt = bufs[(step + 1) % 2];
        for (long i = r; i < nx - r; ++i) {
            for (long j = r; j < ny - r; ++j) {
                double uxx, uyy;
                if (cfg.order == 2) {
                    uxx = (at(cur, i + 1, j) - 2.0 * at(cur, i, j) +
                           at(cur, i - 1, j)) /
                          dx2;
                    uyy = (at(cur, i, j + 1) - 2.0 * at(cur, i, j) +
                           at(cur, i, j - 1)) /
                          dy2;
                } else {
                    uxx = (-at(cur, i + 2, j) / 12.0 +
                           4.0 * at(cur, i + 1, j) / 3.0 -
                           5.0 * at(cur, i, j) / 2.0 +
                           4.0 * at(cur, i - 1, j) / 3.0 -
                           at(cur, i - 2, j) / 12.0) /
                          dx2;
                    uyy = (-at(cur, i, j + 2) / 12.0 +
                           4.0 * at(cur, i, j + 1) / 3.0 -
                           5.0 * at(cur, i, j) / 2.0 +
                           4.0 * at(cur, i, j - 1) / 3.0 -
                           at(cur, i, j - 2) / 12.0) /
                          dy2;
                }
                nxt[static_cast<size_t>(i * ny + j)] =
                    at(cur, i, j) + dt * a * (uxx + uyy);
            }
        }
        // boundary strip is never written, matching the shrunk kernel loops
    }
    return bufs[cfg.nt % 2];
}

DiffusionBuild make_diffusion_operator(const DiffusionConfig& cfg) {
    if (!(cfg.dx == cfg.dy))
        throw InvalidShapeError("shared spacing symbol requires dx == dy");

    DiffusionBuild b;
    b.grid = std::make_unique<Grid>();
    b.u = &b.grid->create_time("u", {cfg.nx, cfg.ny}, 1, cfg.order, cfg.dtype);

    Expr a = Expr::symbol("a");
    Eqn eqn{dt(*b.u), simplify(a * (dx2(*b.u) + dy2(*b.u)))};
    Expr stencil = solve_linear(eqn, forward(*b.u));

    Operator::Options opt;
    opt.nt = cfg.nt;
    opt.subs = {
        {symbols::h(), Expr::rational(cfg.dx)},
        {symbols::s(), Expr::rational(cfg.dt())},
        {a, Expr::rational(cfg.alpha)},
    };
    opt.blocking = cfg.blocking;
    opt.cfg = cfg.cfg;
    opt.cfg.element_type = cfg.dtype;

    b.op = std::make_unique<Operator>(*b.grid, std::vector<Eqn>{
                                          {forward(*b.u), stencil}},
                                      std::move(opt));
    return b;
}

std::vector<double> diffusion_run(const DiffusionConfig& cfg,
                                  std::span<const double> u0,
                                  bool use_interpreter,
                                  std::string* source_out) {
    DiffusionBuild b = make_diffusion_operator(cfg);
    for (long i = 0; i < cfg.nx; ++i) {
        for (long j = 0; j < cfg.ny; ++j) {
            double v = u0[static_cast<size_t>(i * cfg.ny + j)];
            b.u->set({0, i, j}, v);
            b.u->set({1, i, j}, v);
        }
    }

    if (use_interpreter)
        b.op->interpret();
    else
        b.op->apply();
    if (source_out) *source_out = b.op->source();

    long slot = cfg.nt % b.u->slots();
    std::vector<double> out(static_cast<size_t>(cfg.nx * cfg.ny));
    for (long i = 0; i < cfg.nx; ++i)
        for (long j = 0; j < cfg.ny; ++j)
            out[static_cast<size_t>(i * cfg.ny + j)] = b.u->get({slot, i, j});
    return out;
}

std::vector<double> hot_cell_field(long nx, long ny) {
    std::vector<double> u(static_cast<size_t>(nx * ny), 0.0);
    u[static_cast<size_t>((nx / 2) * ny + ny / 2)] = 1.0;
    return u;
}

std::vector<double> gaussian_blob_field(long nx, long ny, unsigned seed) {
    std::vector<double> u(static_cast<size_t>(nx * ny), 0.0);
    double cx = static_cast<double>(nx) / 2.0 + (seed % 3);
    double cy = static_cast<double>(ny) / 2.0 - (seed % 5);
    double w = static_cast<double>(std::min(nx, ny)) / 12.0;
    for (long i = 0; i < nx; ++i) {
        for (long j = 0; j < ny; ++j) {
            double dx = (static_cast<double>(i) - cx) / w;
            double dy = (static_cast<double>(j) - cy) / w;
            double r2 = dx * dx + dy * dy;
            if (r2 < 9.0)
                u[static_cast<size_t>(i * ny + j)] = std::exp(-r2);
        }
    }
    return u;
}

} // namespace sf
