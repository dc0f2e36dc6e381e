#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sf/grid.hpp"

namespace sf {

// A named iteration index with its extent and stencil padding.
struct Dimension {
    std::string name;
    long extent = 0; // iteration extent (timestep count for the time dim)
    long lower_pad = 0;
    long upper_pad = 0;
    bool is_time = false;
    std::optional<int> buffer_count; // modulo window, time dimension only
    bool parallelizable = true;
};

// Affine loop bound: value of `var` (another loop counter) plus a constant;
// plain constants leave `var` empty.
struct Bound {
    long fixed = 0;
    std::string var;

    static Bound at(long v) { return {v, ""}; }
    static Bound rel(std::string var, long off) { return {off, std::move(var)}; }
};

struct TimeAlias {
    std::string name; // t0, t1, ...
    int offset;       // stencil offset this alias resolves
    int modulus;      // buffer count
};

// One node of the loop tree. Ascending loops treat `hi` as exclusive,
// descending loops as inclusive; `hi_cap` clips the bound for blocked
// remainder handling.
struct IrNode {
    enum class Kind { Loop, Assign, AliasBlock } kind = Kind::Assign;

    // Loop
    Dimension dim;
    Bound lo;
    Bound hi;
    std::optional<long> hi_cap;
    long step = 1;
    bool descending = false;
    bool parallel_for = false;
    bool simd = false;
    bool single = false; // executed by one thread inside the parallel region
    std::vector<IrNode> body;

    // Assign
    Expr lhs;
    Expr rhs;
    bool declare_scalar = false;

    // AliasBlock
    std::vector<TimeAlias> aliases;

    static IrNode assign(Expr lhs, Expr rhs, bool declare = false);
    static IrNode loop(Dimension dim, Bound lo, Bound hi);
};

struct LoopNest {
    std::vector<IrNode> roots;
};

// Function applications over dim + k*spacing arguments become indexed
// accesses over dim + k; spacing symbols in coefficient positions survive
// for numeric substitution later.
Expr indexify(const Expr& e, const Grid& grid);
Eqn indexify(const Eqn& eq, const Grid& grid);

// Per-dimension padding from the maximal stencil offsets of the indexed
// equations. Time (when present) comes first with unset extent; spatial
// dimensions follow in declaration order with bounds [lower_pad,
// extent - upper_pad).
std::vector<Dimension> infer_iteration_space(std::span<const Eqn> eqs,
                                             const Grid& grid);

// Nested loops over `dims` with the assignments in the innermost body. The
// outermost parallelizable spatial loop is marked parallel-for, the
// innermost one simd. A `nt`-extent must be set on the time dimension by the
// caller; `descending` reverses the time loop for backward marching.
LoopNest make_loop_nest(std::vector<Dimension> dims, std::span<const Eqn> eqs,
                        bool time_descending = false);

// Introduce modulo aliases t0..tk for every time offset used by buffered
// functions and rewrite their time indices to the aliases. The alias block
// runs single-threaded inside the parallel region.
LoopNest lower_time_buffers(LoopNest nest, const Grid& grid);

// Insert a sequential user loop over `index` with the given limits into the
// time loop, before or after the stencil block. Equations are preserved
// verbatim.
LoopNest add_custom_iteration(LoopNest nest, std::span<const Eqn> eqs,
                              const Dimension& index, long limit_lo,
                              long limit_hi, bool after_stencil);

// Indented textual form for debugging and golden tests.
std::string to_string(const LoopNest& nest);

// Indexed base names referenced anywhere in the nest that are registered,
// in grid declaration order (the kernel argument order).
std::vector<std::string> referenced_functions(const LoopNest& nest,
                                              const Grid& grid);

// Walk every assignment in the nest (visitor receives mutable access).
void for_each_assign(LoopNest& nest, const std::function<void(IrNode&)>& fn);
void for_each_assign(const LoopNest& nest,
                     const std::function<void(const IrNode&)>& fn);

} // namespace sf
