#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sf/expr.hpp"

namespace sf {

enum class ElemType : uint8_t { f32, f64, i32 };

size_t elem_size(ElemType t);
const char* elem_cname(ElemType t); // C type name used in generated code
const char* elem_id(ElemType t);    // short id used in file headers / CLI

class Grid;

struct GfDim {
    std::string name;    // iteration symbol: t, x, y, z, or a custom index
    long extent;         // storage extent along this dimension
    std::string spacing; // grid-spacing symbol resolved at lowering ("" = none)
    bool is_time = false;
};

// A symbolic function bound to an allocated, aligned, zero-initialized
// buffer. Time-varying functions store time_order+1 alternating slots as the
// slowest dimension; plain arrays created through the low-level interface
// carry caller-defined dimensions instead.
class GridFunction {
  public:
    const std::string& name() const { return name_; }
    const std::vector<GfDim>& dims() const { return dims_; }
    ElemType elem() const { return elem_; }
    int space_order() const { return space_order_; }
    std::optional<int> time_order() const { return time_order_; }
    bool is_time_varying() const { return time_order_.has_value(); }
    // true when the time dimension is modulo-aliased into a small slot window
    bool time_buffered() const { return time_buffered_; }

    std::vector<long> space_shape() const;
    long slots() const { return time_buffered_ ? *time_order_ + 1 : 1; }
    const Grid& grid() const { return *grid_; }

    // Symbolic view, e.g. f(x, y) or u(t, x, y).
    Expr sym() const;
    Expr dim_symbol(size_t slot) const;

    size_t numel() const;
    size_t bytes() const { return numel() * elem_size(elem_); }
    void* data() { return data_; }
    const void* data() const { return data_; }

    template <typename T>
    std::span<T> view() {
        return {static_cast<T*>(data_), numel()};
    }
    template <typename T>
    std::span<const T> view() const {
        return {static_cast<const T*>(data_), numel()};
    }

    // Element access through multi-index in storage order (time slot first
    // for time-varying functions). Values pass through double.
    double get(std::span<const long> idx) const;
    void set(std::span<const long> idx, double value);
    double get(std::initializer_list<long> idx) const {
        return get(std::span<const long>(idx.begin(), idx.size()));
    }
    void set(std::initializer_list<long> idx, double value) {
        set(std::span<const long>(idx.begin(), idx.size()), value);
    }

    void zero();
    size_t flat_index(std::span<const long> idx) const;

    GridFunction(const GridFunction&) = delete;
    GridFunction& operator=(const GridFunction&) = delete;
    ~GridFunction();

  private:
    friend class Grid;
    GridFunction(std::string name, std::vector<GfDim> dims, int space_order,
                 std::optional<int> time_order, bool time_buffered,
                 ElemType elem, size_t alignment);

    const Grid* grid_ = nullptr;
    std::string name_;
    std::vector<GfDim> dims_;
    int space_order_;
    std::optional<int> time_order_;
    bool time_buffered_;
    ElemType elem_;
    void* data_ = nullptr;
    size_t numel_ = 0;
};

// Owns every GridFunction of one problem and resolves symbolic references
// back to their metadata. Declaration order fixes kernel argument order.
class Grid {
  public:
    explicit Grid(size_t alignment = 64) : alignment_(alignment) {}
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    GridFunction& create_dense(const std::string& name,
                               std::vector<long> space_shape,
                               int space_order = 2,
                               ElemType elem = ElemType::f32);

    GridFunction& create_time(const std::string& name,
                              std::vector<long> space_shape, int time_order,
                              int space_order = 2,
                              ElemType elem = ElemType::f32);

    // Low-level escape hatch: a plain buffer with caller-defined dimensions,
    // used for sparse-point data and auxiliary tables.
    GridFunction& create_array(const std::string& name,
                               std::vector<GfDim> dims,
                               ElemType elem = ElemType::f32);

    GridFunction* find(const std::string& name);
    const GridFunction* find(const std::string& name) const;

    // Metadata for a FunctionApp/Indexed expression whose base is registered;
    // argument shifts are irrelevant, only the base name is consulted.
    const GridFunction& metadata_of(const Expr& e) const;

    size_t alignment() const { return alignment_; }
    std::span<const std::unique_ptr<GridFunction>> functions() const {
        return registry_;
    }

  private:
    GridFunction& insert(std::unique_ptr<GridFunction> gf);
    size_t alignment_;
    std::vector<std::unique_ptr<GridFunction>> registry_;
};

// Flat little-endian dump with a small self-describing header.
void save_buffer(const GridFunction& gf, const std::string& path);
void load_buffer(GridFunction& gf, const std::string& path);
// Plain-text table of one 2D slice (row per x, column per y).
void dump_csv(const GridFunction& gf, const std::string& path, long slot = 0);

// Canonical dimension/spacing symbols shared across the pipeline.
namespace symbols {
Expr t();
Expr x();
Expr y();
Expr z();
Expr h();
Expr s();
} // namespace symbols

} // namespace sf
