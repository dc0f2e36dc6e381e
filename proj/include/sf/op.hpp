#pragma once

#include <optional>

#include "sf/interp.hpp"
#include "sf/jit.hpp"
#include "sf/opt.hpp"

namespace sf {

enum class Direction { forward, backward };

// A user loop (source injection, receiver sampling) inserted verbatim into
// the time loop, before or after the stencil update.
struct CustomIteration {
    std::string index;
    long limit_lo = 0;
    long limit_hi = 0;
    std::vector<Eqn> eqs; // low-level indexed equations
    bool after_stencil = true;
};

struct AutotuneEntry {
    BlockingPlan plan;
    double median_seconds;
};

struct AutotuneReport {
    std::vector<AutotuneEntry> entries;
    BlockingPlan best;
};

// A configured operator: stencil equations in solved form plus scalar
// substitutions, timestep count, direction, custom iterations, blocking and
// codegen settings. Building is deterministic; identical inputs emit
// byte-identical source.
class Operator {
  public:
    struct Options {
        long nt = 1;
        Direction direction = Direction::forward;
        std::vector<std::pair<Expr, Expr>> subs;
        std::vector<CustomIteration> customs;
        BlockingPlan blocking;
        CodegenConfig cfg;
        bool enable_cse = true;
    };

    Operator(Grid& grid, std::vector<Eqn> stencils, Options opt);

    const LoopNest& nest();
    const std::string& source();
    const KernelSignature& signature();

    void build(); // emit source, compile and load the kernel

    // Run nt timesteps on the grid's own buffers; returns the kernel status.
    int apply();
    // Explicit buffer list checked against the signature.
    int apply(std::span<GridFunction* const> buffers);

    // Reference executor over the same lowered nest.
    void interpret();

    // Brute-force search over candidate blocking plans: each candidate runs
    // `tune_nt` steps `repeats` times on scratch copies of the real buffers;
    // the plan with the smallest median wall time wins.
    AutotuneReport autotune(std::span<const BlockingPlan> candidates,
                            long tune_nt = 5, int repeats = 3);

    Grid& grid() { return grid_; }
    const Options& options() const { return opt_; }

  private:
    void lower();

    Grid& grid_;
    std::vector<Eqn> stencils_;
    Options opt_;
    std::optional<LoopNest> nest_;
    std::string source_;
    KernelSignature sig_;
    std::shared_ptr<CompiledKernel> kernel_;
};

} // namespace sf
