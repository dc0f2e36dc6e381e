#pragma once

#include <memory>

#include "sf/fd.hpp"
#include "sf/sparse.hpp"

namespace sf {

// Ricker pulse with peak amplitude 1 at t = t0:
// (1 - 2 pi^2 f0^2 (t-t0)^2) exp(-pi^2 f0^2 (t-t0)^2)
double ricker_wavelet(double f0, double t, double t0);

// Acoustic medium on a computational grid that already includes the
// absorbing boundary layer. The default medium is a two-layer model split
// halfway along the first axis.
struct AcousticModel {
    std::vector<long> shape = {60, 60}; // 2 or 3 extents, boundary included
    int boundary_width = 10;            // sponge cells on every side
    double spacing = 15.0;              // meters
    long nt = 300;
    double dt = 0.0; // seconds; 0 derives the stability limit for the order
    int space_order = 2;
    ElemType dtype = ElemType::f32;
    double f0 = 10.0;  // source peak frequency, Hz
    double v_top = 1500.0;
    double v_bottom = 2500.0;
    std::vector<std::vector<double>> src_coords; // physical, meters
    std::vector<std::vector<double>> rec_coords;
    CodegenConfig cfg;
    BlockingPlan blocking;

    int dims() const { return static_cast<int>(shape.size()); }
    // largest stable timestep for the discretization order (von Neumann
    // bound with a 0.9 safety factor; reduces to spacing*sqrt(min m)/sqrt(d)
    // at order 2)
    double stable_dt() const;
    double effective_dt() const { return dt > 0 ? dt : stable_dt(); }
    // points placed mid-depth inside the damped frame
    std::vector<std::vector<double>> default_src() const;
    std::vector<std::vector<double>> default_rec(int n = 8) const;
};

struct AcousticSetup {
    std::unique_ptr<Grid> grid;
    GridFunction* field = nullptr; // u (forward) or v (adjoint)
    GridFunction* m = nullptr;
    GridFunction* eta = nullptr;
    std::unique_ptr<SparsePointSet> src;
    std::unique_ptr<SparsePointSet> rec;
    std::unique_ptr<Operator> op;
    long nt = 0;
    double dt = 0;
};

// Forward modeling: damping added, solved for the next time level, source
// injected and receivers sampled each step. `src_series` is the nt x
// num_sources time series (row major); empty means a Ricker wavelet.
AcousticSetup acoustic_forward(const AcousticModel& model,
                               std::span<const double> src_series = {});

// Adjoint modeling: damping subtracted, solved for the previous time level,
// marched backward; receivers inject the residual and the source positions
// are sampled.
AcousticSetup acoustic_adjoint(const AcousticModel& model,
                               std::span<const double> rec_residual);

// Configure without executing (source inspection, custom runs).
AcousticSetup acoustic_build(const AcousticModel& model, bool forward_run);

struct AdjointTestResult {
    double forward_product;  // < Ax, y >
    double adjoint_product;  // < x, A^T y >
    double difference;
    double ratio;  // NaN when both products vanish
    bool degenerate;
};

// Dot test with random source series x and receiver series y.
AdjointTestResult adjoint_test(const AcousticModel& model, unsigned seed = 7);

// Same test with caller-provided series (nt x num_sources and nt x
// num_receivers, row major). All-zero inputs are reported as degenerate
// rather than failed.
AdjointTestResult adjoint_test_with(const AcousticModel& model,
                                    std::span<const double> x,
                                    std::span<const double> y);

// One row per discretization order, formatted like
// "order dim <Ax,y> <x,A^Ty> difference ratio".
std::string adjoint_report(const AcousticModel& base,
                           std::span<const int> orders, unsigned seed = 7);

} // namespace sf
