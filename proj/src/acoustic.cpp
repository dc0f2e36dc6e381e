#include "sf/acoustic.hpp"

#include <cmath>
#include <random>

#include "sf/error.hpp"

namespace sf {

double ricker_wavelet(double f0, double t, double t0) {
    double arg = M_PI * f0 * (t - t0);
    double a2 = arg * arg;
    return (1.0 - 2.0 * a2) * std::exp(-a2);
}

namespace {

// max |symbol| of the 1D second-derivative stencil: the weights alternate in
// sign, so the von Neumann peak at the Nyquist mode is the absolute sum
double stencil_eig_1d(int order) {
    std::vector<Rational> w = fd_weights(2, centered_offsets(2, order));
    double s = 0.0;
    for (const Rational& v : w) s += std::abs(v.to_double());
    return s;
}

} // namespace

double AcousticModel::stable_dt() const {
    double v_max = std::max(v_top, v_bottom);
    double m_min = 1.0 / (v_max * v_max);
    double lam = stencil_eig_1d(space_order) * dims();
    return 0.9 * 2.0 * std::sqrt(m_min / lam) * spacing;
}

std::vector<std::vector<double>> AcousticModel::default_src() const {
    std::vector<double> c;
    for (long e : shape)
        c.push_back((static_cast<double>(e) / 2.0 + 0.31) * spacing);
    return {c};
}

std::vector<std::vector<double>> AcousticModel::default_rec(int n) const {
    std::vector<std::vector<double>> out;
    double depth =
        (boundary_width + 3 + (shape[0] - 2 * boundary_width) / 4.0) * spacing;
    double lo = (boundary_width + 2) * spacing;
    double hi = (shape[1] - boundary_width - 3) * spacing;
    for (int i = 0; i < n; ++i) {
        std::vector<double> c{depth,
                              lo + (hi - lo) * (i + 0.17) / n};
        while (c.size() < shape.size())
            c.push_back((static_cast<double>(shape[c.size()]) / 2.0 + 0.23) *
                        spacing);
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

struct MediumGrids {
    GridFunction* m;
    GridFunction* eta;
};

MediumGrids build_medium(Grid& grid, const AcousticModel& model) {
    GridFunction& m = grid.create_dense("m", model.shape, model.space_order,
                                        model.dtype);
    GridFunction& eta = grid.create_dense("eta", model.shape,
                                          model.space_order, model.dtype);

    const double m_top = 1.0 / (model.v_top * model.v_top);
    const double m_bottom = 1.0 / (model.v_bottom * model.v_bottom);
    const double v_min = std::min(model.v_top, model.v_bottom);
    const long w = model.boundary_width;
    // absorbing sponge strength: quadratic profile peaking at the outer edge
    const double sigma_max =
        1.5 * std::log(1000.0) * v_min /
        (static_cast<double>(std::max<long>(w, 1)) * model.spacing);

    std::vector<long> idx(model.shape.size());
    std::function<void(size_t)> fill = [&](size_t d) {
        if (d == model.shape.size()) {
            double mv = idx[0] < model.shape[0] / 2 ? m_top : m_bottom;
            long dist = model.shape[0];
            for (size_t i = 0; i < idx.size(); ++i) {
                dist = std::min(dist, idx[i]);
                dist = std::min(dist, model.shape[i] - 1 - idx[i]);
            }
            double sigma = 0.0;
            if (w > 0 && dist < w) {
                double r = 1.0 - static_cast<double>(dist) / static_cast<double>(w);
                sigma = sigma_max * r * r;
            }
            std::span<const long> iv(idx);
            m.set(iv, mv);
            eta.set(iv, mv * sigma); // damping scaled by the medium term
            return;
        }
        for (idx[d] = 0; idx[d] < model.shape[d]; ++idx[d]) fill(d + 1);
    };
    fill(0);
    return {&m, &eta};
}

void fill_series(SparsePointSet& pts, std::span<const double> series,
                 const AcousticModel& model) {
    long nt = pts.nt();
    long np = pts.num_points();
    if (!series.empty()) {
        if (static_cast<long>(series.size()) != nt * np)
            throw InvalidShapeError("series must be nt x num_points");
        for (long t = 0; t < nt; ++t)
            for (long p = 0; p < np; ++p)
                pts.set_series(t, p, series[static_cast<size_t>(t * np + p)]);
        return;
    }
    double dt = model.effective_dt();
    double t0 = 1.0 / model.f0;
    for (long t = 0; t < nt; ++t)
        for (long p = 0; p < np; ++p)
            pts.set_series(t, p,
                           ricker_wavelet(model.f0,
                                          static_cast<double>(t) * dt, t0));
}

AcousticSetup build_acoustic(const AcousticModel& model, bool forward_run,
                             std::span<const double> src_series,
                             std::span<const double> rec_series) {
    if (model.dims() < 2 || model.dims() > 3)
        throw InvalidShapeError("acoustic model needs 2 or 3 dimensions");
    double dt_s = model.effective_dt();
    if (dt_s > model.stable_dt() * (1.0 + 1e-12))
        throw CflViolationError("dt " + std::to_string(dt_s) +
                                " exceeds stability bound " +
                                std::to_string(model.stable_dt()));

    AcousticSetup s;
    s.grid = std::make_unique<Grid>();
    s.nt = model.nt;
    s.dt = dt_s;
    const char* field_name = forward_run ? "u" : "v";
    s.field = &s.grid->create_time(field_name, model.shape, 2,
                                   model.space_order, model.dtype);
    MediumGrids med = build_medium(*s.grid, model);
    s.m = med.m;
    s.eta = med.eta;

    auto src_coords =
        model.src_coords.empty() ? model.default_src() : model.src_coords;
    auto rec_coords =
        model.rec_coords.empty() ? model.default_rec() : model.rec_coords;
    s.src = std::make_unique<SparsePointSet>(*s.grid, "src", src_coords,
                                             model.nt, model.spacing,
                                             *s.field);
    s.rec = std::make_unique<SparsePointSet>(*s.grid, "rec", rec_coords,
                                             model.nt, model.spacing,
                                             *s.field);

    GridFunction& f = *s.field;
    Expr eta_sym = s.eta->sym();
    Expr m_sym = s.m->sym();
    Expr scale = simplify(Expr::pow(symbols::s(), Expr::integer(2)) *
                          Expr::pow(m_sym, Expr::integer(-1)));

    Operator::Options opt;
    opt.nt = model.nt;
    opt.subs = {{symbols::h(), Expr::real(model.spacing)},
                {symbols::s(), Expr::real(dt_s)}};
    opt.blocking = model.blocking;
    opt.cfg = model.cfg;
    opt.cfg.element_type = model.dtype;

    Expr stencil;
    if (forward_run) {
        Expr eqn = simplify(m_sym * dt2(f) - laplace(f) + eta_sym * dt(f));
        stencil = solve_linear({eqn, Expr::integer(0)}, forward(f));
        opt.direction = Direction::forward;
        // inject the source and record at receivers on the just-written level
        opt.customs.push_back(build_inject(f, *s.src, scale, 1, 0));
        opt.customs.push_back(build_sample(f, *s.rec, 1, 0));
        fill_series(*s.src, src_series, model);
        Eqn update{forward(f), stencil};
        s.op = std::make_unique<Operator>(*s.grid, std::vector<Eqn>{update},
                                          std::move(opt));
    } else {
        Expr eqn = simplify(m_sym * dt2(f) - laplace(f) - eta_sym * dt(f));
        stencil = solve_linear({eqn, Expr::integer(0)}, backward(f));
        opt.direction = Direction::backward;
        // receivers turn into sources and source positions are sampled
        opt.customs.push_back(build_inject(f, *s.rec, scale, -1, -1));
        opt.customs.push_back(build_sample(f, *s.src, -1, -1));
        fill_series(*s.rec, rec_series, model);
        Eqn update{backward(f), stencil};
        s.op = std::make_unique<Operator>(*s.grid, std::vector<Eqn>{update},
                                          std::move(opt));
    }
    return s;
}

} // namespace

AcousticSetup acoustic_build(const AcousticModel& model, bool forward_run) {
    return build_acoustic(model, forward_run, {}, {});
}

AcousticSetup acoustic_forward(const AcousticModel& model,
                               std::span<const double> src_series) {
    AcousticSetup s = build_acoustic(model, true, src_series, {});
    s.op->apply();
    return s;
}

AcousticSetup acoustic_adjoint(const AcousticModel& model,
                               std::span<const double> rec_residual) {
    AcousticSetup s = build_acoustic(model, false, {}, rec_residual);
    s.op->apply();
    return s;
}

AdjointTestResult adjoint_test(const AcousticModel& model, unsigned seed) {
    auto src_coords =
        model.src_coords.empty() ? model.default_src() : model.src_coords;
    auto rec_coords =
        model.rec_coords.empty() ? model.default_rec() : model.rec_coords;
    long ns = static_cast<long>(src_coords.size());
    long nr = static_cast<long>(rec_coords.size());

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(static_cast<size_t>(model.nt * ns));
    std::vector<double> y(static_cast<size_t>(model.nt * nr));
    for (double& v : x) v = dist(rng);
    for (double& v : y) v = dist(rng);
    return adjoint_test_with(model, x, y);
}

AdjointTestResult adjoint_test_with(const AcousticModel& model,
                                    std::span<const double> x,
                                    std::span<const double> y) {
    auto src_coords =
        model.src_coords.empty() ? model.default_src() : model.src_coords;
    auto rec_coords =
        model.rec_coords.empty() ? model.default_rec() : model.rec_coords;
    long ns = static_cast<long>(src_coords.size());
    long nr = static_cast<long>(rec_coords.size());

    AcousticSetup fwd = acoustic_forward(model, x);
    double axy = 0.0;
    for (long t = 0; t < model.nt; ++t)
        for (long r = 0; r < nr; ++r)
            axy += fwd.rec->series(t, r) *
                   y[static_cast<size_t>(t * nr + r)];

    AcousticSetup adj = acoustic_adjoint(model, y);
    double xaty = 0.0;
    for (long t = 0; t < model.nt; ++t)
        for (long p = 0; p < ns; ++p)
            xaty += adj.src->series(t, p) *
                    x[static_cast<size_t>(t * ns + p)];

    AdjointTestResult res;
    res.forward_product = axy;
    res.adjoint_product = xaty;
    res.difference = axy - xaty;
    res.degenerate = axy == 0.0 && xaty == 0.0;
    res.ratio = res.degenerate ? std::nan("") : axy / xaty;
    return res;
}

std::string adjoint_report(const AcousticModel& base,
                           std::span<const int> orders, unsigned seed) {
    std::string out =
        "order dim <Ax,y> <x,A^Ty> difference ratio\n";
    for (int order : orders) {
        AcousticModel model = base;
        model.space_order = order;
        model.dt = 0.0; // re-derive the stability limit per order
        AdjointTestResult r = adjoint_test(model, seed);
        char line[256];
        snprintf(line, sizeof line, "%d %dD %.10g %.10g %.6e %.9f\n", order,
                 model.dims(), r.forward_product, r.adjoint_product,
                 r.difference, r.ratio);
        out += line;
    }
    return out;
}

} // namespace sf
