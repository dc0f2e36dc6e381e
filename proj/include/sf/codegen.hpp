#pragma once

#include <string>
#include <vector>

#include "sf/ir.hpp"

namespace sf {

struct CodegenConfig {
    std::string preset = "gcc";            // gcc | clang | vendor
    std::string cc_override;               // explicit compiler executable
    std::vector<std::string> extra_flags;  // appended to the preset flags
    int alignment = 64;                    // must match buffer allocation
    ElemType element_type = ElemType::f32;
    bool parallel = true;                  // emit OpenMP annotations
    std::string entry = "Operator";
    std::string dump_path;                 // write emitted source here too
};

struct KernelArg {
    std::string name;
    ElemType elem;
    std::vector<long> shape;
};

struct KernelSignature {
    std::vector<KernelArg> args;
};

KernelSignature make_signature(const LoopNest& nest, const Grid& grid);

// One C99 translation unit: unmangled entry taking one flat buffer pointer
// per referenced function, buffers cast to fixed-shape array views, loops
// with literal bounds and OpenMP parallel/simd annotations.
std::string emit_source(const LoopNest& nest, const Grid& grid,
                        const CodegenConfig& cfg);

// Shortest round-trip literal in normalized scientific form with the
// element-type suffix, e.g. 0.25f -> "2.5e-1F".
std::string format_literal(double v, ElemType elem);

} // namespace sf
