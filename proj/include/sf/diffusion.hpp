#pragma once

#include <memory>

#include "sf/fd.hpp"
#include "sf/op.hpp"

namespace sf {

// Explicit 2D heat equation with the stability-limit timestep
// dt = dx^2 dy^2 / (2 alpha (dx^2 + dy^2)), exact in rational arithmetic so
// folded stencil coefficients stay exact.
struct DiffusionConfig {
    long nx = 64;
    long ny = 64;
    Rational alpha{1};
    Rational dx{1};
    Rational dy{1};
    long nt = 10;
    int order = 2;
    ElemType dtype = ElemType::f32;
    BlockingPlan blocking;
    CodegenConfig cfg;

    Rational dt() const;
};

// Naive double-precision nested loops over alternating buffers; the oracle
// every generated kernel is compared against. Weights for orders 2 and 4 are
// written out literally.
std::vector<double> diffusion_reference(const DiffusionConfig& cfg,
                                        std::span<const double> u0);

struct DiffusionBuild {
    std::unique_ptr<Grid> grid;
    GridFunction* u = nullptr;
    std::unique_ptr<Operator> op;
};

// Symbolic pipeline: solve the heat equation for the forward update and
// configure the operator with exact spacing/timestep substitutions.
DiffusionBuild make_diffusion_operator(const DiffusionConfig& cfg);

// Run the JIT kernel (or the in-process reference executor) from the given
// initial condition and return the final field as doubles.
std::vector<double> diffusion_run(const DiffusionConfig& cfg,
                                  std::span<const double> u0,
                                  bool use_interpreter = false,
                                  std::string* source_out = nullptr);

// Compact initial conditions used by tests and the CLI.
std::vector<double> hot_cell_field(long nx, long ny);
std::vector<double> gaussian_blob_field(long nx, long ny, unsigned seed = 0);

} // namespace sf
