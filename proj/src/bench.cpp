#include "sf/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>

namespace sf {

namespace {

double time_once(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

double median_of(std::vector<double> times) {
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

struct BufferSnapshot {
    std::vector<std::pair<GridFunction*, std::vector<char>>> saved;

    explicit BufferSnapshot(Grid& grid) {
        for (const auto& gf : grid.functions()) {
            std::vector<char> copy(gf->bytes());
            std::memcpy(copy.data(), gf->data(), gf->bytes());
            saved.emplace_back(gf.get(), std::move(copy));
        }
    }
    void restore() {
        for (auto& [gf, copy] : saved)
            std::memcpy(gf->data(), copy.data(), copy.size());
    }
};

BenchLine run_variant(const std::string& scenario, const std::string& variant,
                      const std::string& plan, int runs, Grid& grid,
                      const std::function<void()>& fn) {
    BufferSnapshot snap(grid);
    fn(); // warmup (also triggers compilation), excluded from timing
    std::vector<double> times;
    for (int r = 0; r < runs; ++r) {
        snap.restore();
        times.push_back(time_once(fn));
    }
    snap.restore();
    return {scenario, variant, plan, runs, median_of(times)};
}

} // namespace

std::vector<BenchLine> bench_diffusion(const DiffusionConfig& cfg,
                                       std::span<const BlockingPlan> plans,
                                       int runs, bool include_interpreter) {
    std::vector<BenchLine> out;
    std::vector<double> u0 = gaussian_blob_field(cfg.nx, cfg.ny);

    auto load_initial = [&](DiffusionBuild& b) {
        for (long i = 0; i < cfg.nx; ++i)
            for (long j = 0; j < cfg.ny; ++j)
                b.u->set({0, i, j}, u0[static_cast<size_t>(i * cfg.ny + j)]);
    };

    if (include_interpreter) {
        DiffusionBuild b = make_diffusion_operator(cfg);
        load_initial(b);
        out.push_back(run_variant("diffusion", "interpreter", "unblocked",
                                  runs, *b.grid, [&] { b.op->interpret(); }));
    }

    {
        DiffusionBuild b = make_diffusion_operator(cfg);
        load_initial(b);
        b.op->build();
        out.push_back(run_variant("diffusion", "jit", "unblocked", runs,
                                  *b.grid, [&] { b.op->apply(); }));
    }

    for (const BlockingPlan& plan : plans) {
        if (plan.empty()) continue;
        DiffusionConfig blocked = cfg;
        blocked.blocking = plan;
        DiffusionBuild b = make_diffusion_operator(blocked);
        load_initial(b);
        b.op->build();
        out.push_back(run_variant("diffusion", "jit", plan.str(), runs,
                                  *b.grid, [&] { b.op->apply(); }));
    }
    return out;
}

std::vector<BenchLine> bench_acoustic(const AcousticModel& model,
                                      std::span<const BlockingPlan> plans,
                                      int runs) {
    std::vector<BenchLine> out;

    size_t cells = 1;
    for (long e : model.shape) cells *= static_cast<size_t>(e);
    size_t bytes = cells * elem_size(model.dtype) * 5; // u slots + m + eta
    if (exceeds_memory(bytes)) {
        out.push_back({"acoustic", "jit", "SkippedTooLarge", 0, 0.0});
        return out;
    }

    {
        AcousticSetup s = acoustic_forward(model); // includes warmup run
        out.push_back(run_variant("acoustic", "jit", "unblocked", runs,
                                  *s.grid, [&] { s.op->apply(); }));
    }
    for (const BlockingPlan& plan : plans) {
        if (plan.empty()) continue;
        AcousticModel blocked = model;
        blocked.blocking = plan;
        AcousticSetup s = acoustic_forward(blocked);
        out.push_back(run_variant("acoustic", "jit", plan.str(), runs,
                                  *s.grid, [&] { s.op->apply(); }));
    }
    return out;
}

std::string format_bench(std::span<const BenchLine> lines) {
    std::string out;
    for (const BenchLine& l : lines) {
        char buf[256];
        snprintf(buf, sizeof buf,
                 "bench scenario=%s variant=%s plan=%s runs=%d median_s=%.6f\n",
                 l.scenario.c_str(), l.variant.c_str(), l.plan.c_str(),
                 l.runs, l.median_s);
        out += buf;
    }
    return out;
}

std::vector<BlockingPlan> default_block_candidates(int spatial_dims) {
    // all spatial dimensions except the innermost (simd) one
    std::vector<std::string> dims;
    static const char* names[] = {"x", "y", "z"};
    for (int i = 0; i + 1 < spatial_dims; ++i) dims.push_back(names[i]);

    std::vector<BlockingPlan> plans;
    plans.push_back({}); // unblocked
    if (dims.empty()) return plans;

    std::vector<long> sizes = {8, 16, 32, 64};
    std::vector<size_t> pick(dims.size(), 0);
    while (true) {
        BlockingPlan p;
        for (size_t d = 0; d < dims.size(); ++d)
            p.block[dims[d]] = sizes[pick[d]];
        plans.push_back(std::move(p));
        size_t d = 0;
        while (d < pick.size() && ++pick[d] == sizes.size()) pick[d++] = 0;
        if (d == pick.size()) break;
    }
    return plans;
}

bool exceeds_memory(size_t bytes) {
    long pages = sysconf(_SC_PHYS_PAGES);
    long page_size = sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page_size <= 0) return false;
    size_t total = static_cast<size_t>(pages) * static_cast<size_t>(page_size);
    return bytes > total / 2;
}

} // namespace sf
