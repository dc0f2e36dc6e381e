// Command-line front end: diffusion and acoustic demo applications, the
// adjoint dot test, benchmarking and generated-source inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#ifdef SF_HAVE_OPENMP
#include <omp.h>
#endif

#include "sf/acoustic.hpp"
#include "sf/bench.hpp"
#include "sf/diffusion.hpp"
#include "sf/error.hpp"

using namespace sf;

namespace {

Rational parse_rational(const std::string& text) {
    if (size_t slash = text.find('/'); slash != std::string::npos) {
        return Rational(std::stoll(text.substr(0, slash)),
                        std::stoll(text.substr(slash + 1)));
    }
    size_t dot = text.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    long long den = 1;
    for (size_t i = dot + 1; i < text.size(); ++i) den *= 10;
    return Rational(std::stoll(digits), den);
}

std::vector<long> parse_shape(const std::string& text) {
    std::vector<long> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(std::stol(text.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

ElemType parse_dtype(const std::string& text) {
    if (text == "f32") return ElemType::f32;
    if (text == "f64") return ElemType::f64;
    throw CLI::ValidationError("--dtype must be f32 or f64");
}

// "8,8" | "auto" | "off"
struct BlockArg {
    std::string text = "off";
    bool is_auto() const { return text == "auto"; }
    BlockingPlan plan(int spatial_dims) const {
        BlockingPlan p;
        if (text == "off" || text == "auto") return p;
        std::vector<long> sizes = parse_shape(text);
        static const char* names[] = {"x", "y", "z"};
        for (size_t i = 0; i < sizes.size() &&
                           i < static_cast<size_t>(spatial_dims);
             ++i)
            if (sizes[i] > 0) p.block[names[i]] = sizes[i];
        return p;
    }
};

void apply_threads(int threads) {
#ifdef SF_HAVE_OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

void write_field_outputs(const GridFunction& gf, const std::string& out_bin,
                         const std::string& out_csv, long slot) {
    if (!out_bin.empty()) save_buffer(gf, out_bin);
    if (!out_csv.empty()) dump_csv(gf, out_csv, slot);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stencilforge: symbolic finite differences to JIT kernels"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string shape_s = "64,64";
    long nt = 100;
    int order = 2;
    std::string dtype_s = "f32";
    BlockArg block;
    std::string cc;
    std::string dump;
    int threads = 0;
    unsigned seed = 7;

    app.add_option("--shape", shape_s, "grid extents, comma separated");
    app.add_option("--nt", nt, "timesteps");
    app.add_option("--order", order, "spatial discretization order");
    app.add_option("--dtype", dtype_s, "f32 | f64");
    app.add_option("--block", block.text, "block sizes n,n | auto | off");
    app.add_option("--cc", cc, "compiler preset (gcc|clang|vendor) or path");
    app.add_option("--dump", dump, "write generated source to this path");
    app.add_option("--threads", threads, "OpenMP thread count (0 = default)");
    app.add_option("--seed", seed, "random seed");

    // diffusion configuration (shared with dump-code and bench)
    std::string d_alpha = "1", d_dx = "1";
    std::string d_out, d_csv, d_init = "blob";
    bool d_interp = false;
    app.add_option("--alpha", d_alpha, "diffusion coefficient");
    app.add_option("--dx", d_dx, "grid spacing (dy = dx)");

    auto* cmd_diff = app.add_subcommand("diffusion", "2D heat equation demo");
    cmd_diff->add_option("--init", d_init, "initial condition: hot | blob");
    cmd_diff->add_option("--out", d_out, "write final field (binary)");
    cmd_diff->add_option("--csv", d_csv, "write final field (csv)");
    cmd_diff->add_flag("--interpret", d_interp,
                       "run the reference executor instead of the kernel");

    // acoustic configuration (shared with dump-code, adjoint-test and bench)
    double a_spacing = 15.0, a_f0 = 10.0, a_dt = 0.0;
    int a_boundary = 10;
    std::string a_rec_out, a_field_out, a_src_file, a_rec_file;
    app.add_option("--spacing", a_spacing, "grid spacing in meters");
    app.add_option("--f0", a_f0, "source peak frequency (Hz)");
    app.add_option("--dt", a_dt, "timestep (s), 0 = stability limit");
    app.add_option("--boundary", a_boundary, "sponge width in cells");
    app.add_option("--src-points", a_src_file, "source point file");
    app.add_option("--rec-points", a_rec_file, "receiver point file");

    auto* cmd_ac = app.add_subcommand("acoustic-forward",
                                      "acoustic wave forward modeling");
    cmd_ac->add_option("--rec-out", a_rec_out, "receiver series output");
    cmd_ac->add_option("--field-out", a_field_out, "final wavefield (binary)");

    // adjoint test
    auto* cmd_adj = app.add_subcommand("adjoint-test",
                                       "forward/adjoint dot test");
    std::string adj_orders = "2,4,6,8,10,12";
    int adj_dim = 2;
    cmd_adj->add_option("--orders", adj_orders, "comma-separated orders");
    cmd_adj->add_option("--dim", adj_dim, "2 or 3");

    // bench
    auto* cmd_bench = app.add_subcommand("bench", "timing comparison");
    std::string b_scenario = "diffusion";
    int b_runs = 3;
    cmd_bench->add_option("--scenario", b_scenario, "diffusion | acoustic");
    cmd_bench->add_option("--runs", b_runs, "timed repetitions per variant");

    // dump-code
    auto* cmd_dump = app.add_subcommand("dump-code",
                                        "emit generated kernel source");
    std::string g_app = "diffusion";
    std::string g_out;
    cmd_dump->add_option("--app", g_app,
                         "diffusion | acoustic-forward | acoustic-adjoint");
    cmd_dump->add_option("--out", g_out, "output path (default stdout)");

    CLI11_PARSE(app, argc, argv);
    apply_threads(threads);

    try {
        std::vector<long> shape = parse_shape(shape_s);
        ElemType dtype = parse_dtype(dtype_s);

        auto make_diffusion_cfg = [&]() {
            DiffusionConfig cfg;
            cfg.nx = shape.at(0);
            cfg.ny = shape.size() > 1 ? shape[1] : shape[0];
            cfg.alpha = parse_rational(d_alpha);
            cfg.dx = cfg.dy = parse_rational(d_dx);
            cfg.nt = nt;
            cfg.order = order;
            cfg.dtype = dtype;
            cfg.blocking = block.plan(2);
            if (!cc.empty()) cfg.cfg.cc_override = cc;
            cfg.cfg.dump_path = dump;
            return cfg;
        };

        auto make_acoustic_model = [&]() {
            AcousticModel model;
            model.shape = shape;
            model.nt = nt;
            model.space_order = order;
            model.dtype = dtype;
            model.spacing = a_spacing;
            model.f0 = a_f0;
            model.dt = a_dt;
            model.boundary_width = a_boundary;
            model.blocking = block.plan(model.dims());
            if (!cc.empty()) model.cfg.cc_override = cc;
            model.cfg.dump_path = dump;
            if (!a_src_file.empty()) model.src_coords = load_points(a_src_file);
            if (!a_rec_file.empty()) model.rec_coords = load_points(a_rec_file);
            return model;
        };

        if (*cmd_diff) {
            DiffusionConfig cfg = make_diffusion_cfg();
            if (block.is_auto()) {
                DiffusionBuild b = make_diffusion_operator(cfg);
                auto plans = default_block_candidates(2);
                AutotuneReport rep = b.op->autotune(plans);
                for (const AutotuneEntry& e : rep.entries)
                    std::printf("autotune plan=%s median_s=%.6f\n",
                                e.plan.str().c_str(), e.median_seconds);
                std::printf("autotune best=%s\n", rep.best.str().c_str());
                cfg.blocking = rep.best;
            }
            std::vector<double> u0 = d_init == "hot"
                                         ? hot_cell_field(cfg.nx, cfg.ny)
                                         : gaussian_blob_field(cfg.nx, cfg.ny,
                                                               seed);
            std::vector<double> out = diffusion_run(cfg, u0, d_interp);
            double total = 0, peak = 0;
            for (double v : out) {
                total += v;
                peak = std::max(peak, std::abs(v));
            }
            std::printf("diffusion shape=%ldx%ld nt=%ld order=%d sum=%.12g "
                        "max=%.12g\n",
                        cfg.nx, cfg.ny, cfg.nt, cfg.order, total, peak);
            if (!d_out.empty() || !d_csv.empty()) {
                Grid grid;
                GridFunction& f =
                    grid.create_dense("u_final", {cfg.nx, cfg.ny}, 2,
                                      ElemType::f64);
                for (long i = 0; i < cfg.nx; ++i)
                    for (long j = 0; j < cfg.ny; ++j)
                        f.set({i, j},
                              out[static_cast<size_t>(i * cfg.ny + j)]);
                write_field_outputs(f, d_out, d_csv, 0);
            }
        } else if (*cmd_ac) {
            AcousticModel model = make_acoustic_model();
            // per-point series files override the default wavelet
            std::vector<double> series;
            if (!a_src_file.empty()) {
                PointFile pf = load_point_file(a_src_file);
                bool any_ref = false;
                for (const std::string& r : pf.series_refs)
                    any_ref |= !r.empty();
                if (any_ref) {
                    long ns = static_cast<long>(pf.coords.size());
                    series.assign(static_cast<size_t>(nt * ns), 0.0);
                    double dt_s = model.effective_dt();
                    for (long p = 0; p < ns; ++p) {
                        std::vector<double> col;
                        if (!pf.series_refs[static_cast<size_t>(p)].empty())
                            col = load_series_column(
                                pf.series_refs[static_cast<size_t>(p)]);
                        for (long t = 0; t < nt; ++t) {
                            double v =
                                static_cast<size_t>(t) < col.size()
                                    ? col[static_cast<size_t>(t)]
                                    : (col.empty()
                                           ? ricker_wavelet(model.f0,
                                                            t * dt_s,
                                                            1.0 / model.f0)
                                           : 0.0);
                            series[static_cast<size_t>(t * ns + p)] = v;
                        }
                    }
                }
            }
            AcousticSetup s = acoustic_forward(model, series);
            double peak = 0;
            for (long t = 0; t < model.nt; ++t)
                for (long p = 0; p < s.rec->num_points(); ++p)
                    peak = std::max(peak, std::abs(s.rec->series(t, p)));
            std::printf("acoustic-forward shape=%s nt=%ld order=%d dt=%.6g "
                        "rec_peak=%.6g\n",
                        shape_s.c_str(), model.nt, model.space_order, s.dt,
                        peak);
            if (!a_rec_out.empty()) save_series_text(s.rec->data(), a_rec_out);
            if (!a_field_out.empty()) save_buffer(*s.field, a_field_out);
        } else if (*cmd_adj) {
            AcousticModel model = make_acoustic_model();
            if (adj_dim == 3 && model.dims() == 2)
                model.shape = {40, 40, 30};
            std::vector<int> orders;
            for (long v : parse_shape(adj_orders))
                orders.push_back(static_cast<int>(v));
            std::fputs(adjoint_report(model, orders, seed).c_str(), stdout);
        } else if (*cmd_bench) {
            std::vector<BlockingPlan> plans;
            if (block.is_auto()) {
                for (const BlockingPlan& p :
                     default_block_candidates(b_scenario == "acoustic"
                                                  ? static_cast<int>(
                                                        shape.size())
                                                  : 2))
                    if (!p.empty()) plans.push_back(p);
            } else {
                BlockingPlan p = block.plan(static_cast<int>(shape.size()));
                if (!p.empty()) plans.push_back(p);
            }
            std::vector<BenchLine> lines;
            if (b_scenario == "acoustic") {
                AcousticModel model = make_acoustic_model();
                lines = bench_acoustic(model, plans, b_runs);
            } else {
                DiffusionConfig cfg = make_diffusion_cfg();
                lines = bench_diffusion(cfg, plans, b_runs);
            }
            std::fputs(format_bench(lines).c_str(), stdout);
        } else if (*cmd_dump) {
            std::string source;
            if (g_app == "diffusion") {
                DiffusionConfig cfg = make_diffusion_cfg();
                DiffusionBuild b = make_diffusion_operator(cfg);
                source = b.op->source();
            } else {
                AcousticModel model = make_acoustic_model();
                AcousticSetup s =
                    acoustic_build(model, g_app != "acoustic-adjoint");
                source = s.op->source();
            }
            if (g_out.empty()) {
                std::fputs(source.c_str(), stdout);
            } else {
                std::ofstream out(g_out);
                out << source;
            }
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
