#pragma once

#include "sf/op.hpp"

namespace sf {

struct InterpWeights {
    std::vector<long> cell;      // enclosing cell (floor of coord/spacing)
    std::vector<double> weights; // 2^d corner weights; bit d of k selects +1
};

// Multilinear corner weights for one physical point. Weights sum to 1 and
// reproduce affine fields exactly up to rounding.
InterpWeights interpolation_weights(std::span<const double> coord,
                                    double spacing,
                                    std::span<const long> extents);

// Sparse points bound to kernel-visible arrays: per-point time series plus
// precomputed enclosing-cell indices and corner weights, registered as
// "<name>", "<name>_ci" and "<name>_w".
class SparsePointSet {
  public:
    SparsePointSet(Grid& grid, std::string name,
                   std::span<const std::vector<double>> coords, long nt,
                   double spacing, const GridFunction& field);

    long num_points() const { return np_; }
    int sdim() const { return sdim_; }
    long nt() const { return nt_; }

    GridFunction& data() { return *data_; }
    const GridFunction& data() const { return *data_; }
    const GridFunction& cell_index() const { return *ci_; }
    const GridFunction& corner_weights() const { return *w_; }

    // series(t, p) accessors for filling sources / reading receivers
    void set_series(long t, long p, double v) { data_->set({t, p}, v); }
    double series(long t, long p) const { return data_->get({t, p}); }

  private:
    long np_;
    int sdim_;
    long nt_;
    GridFunction* data_;
    GridFunction* ci_;
    GridFunction* w_;
};

// Accumulate weight_k * scale * data[t + data_row_offset, p] into the 2^d
// corners of field[t + field_time_offset, ...] inside a sequential loop over
// p. `scale` is symbolic over the field's spatial dimensions (e.g. an
// expression in m(x, y)) and is rebased onto each corner.
CustomIteration build_inject(const GridFunction& field,
                             const SparsePointSet& pts, const Expr& scale,
                             int field_time_offset = 1,
                             int data_row_offset = 0);

// data[t + data_row_offset, p] = sum_k weight_k * field[t +
// field_time_offset, corner_k], placed after the stencil update.
CustomIteration build_sample(const GridFunction& field,
                             const SparsePointSet& pts,
                             int field_time_offset = 1,
                             int data_row_offset = 0);

// One point per line: whitespace-separated coordinates, optionally followed
// by @<file> naming a per-point time series (one value per line); '#' starts
// a comment.
struct PointFile {
    std::vector<std::vector<double>> coords;
    std::vector<std::string> series_refs; // empty string when absent
};
PointFile load_point_file(const std::string& path);
std::vector<std::vector<double>> load_points(const std::string& path);

// Per-point series file: one value per line, row t for timestep t.
std::vector<double> load_series_column(const std::string& path);

// nt x num_points series as plain text, one timestep per row.
void save_series_text(const GridFunction& data, const std::string& path);

} // namespace sf
