#pragma once

#include <map>

#include "sf/ir.hpp"

namespace sf {

// Per-dimension block sizes; dimensions without an entry stay unblocked.
struct BlockingPlan {
    std::map<std::string, long> block;

    bool empty() const { return block.empty(); }
    std::string str() const;
};

struct CseResult {
    std::vector<std::pair<std::string, Expr>> temps; // topologically ordered
    std::vector<Expr> body;
};

// Hoist every subtree that occurs at least twice and performs arithmetic
// into a fresh scalar (temp0, temp1, ...). Inlining the temps back gives an
// expression numerically equal to the input and the total op count never
// grows.
CseResult cse(std::span<const Expr> exprs);

// Replace free scalar symbols by numeric values and fold; every symbol other
// than loop counters, buffer aliases and hoisted temps must be covered.
LoopNest fold_scalars(LoopNest nest,
                      std::span<const std::pair<Expr, Expr>> subs);

// Split blocked loops into an outer loop over block starts and a min-capped
// inner loop; the parallel annotation moves to the outermost block loop.
LoopNest block_loops(LoopNest nest, const BlockingPlan& plan);

} // namespace sf
