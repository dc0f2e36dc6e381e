#include "sf/grid.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "sf/error.hpp"

namespace sf {

size_t elem_size(ElemType t) {
    switch (t) {
        case ElemType::f32: return 4;
        case ElemType::f64: return 8;
        case ElemType::i32: return 4;
    }
    return 0;
}

const char* elem_cname(ElemType t) {
    switch (t) {
        case ElemType::f32: return "float";
        case ElemType::f64: return "double";
        case ElemType::i32: return "int";
    }
    return "?";
}

const char* elem_id(ElemType t) {
    switch (t) {
        case ElemType::f32: return "f32";
        case ElemType::f64: return "f64";
        case ElemType::i32: return "i32";
    }
    return "?";
}

namespace symbols {
Expr t() { return Expr::symbol("t"); }
Expr x() { return Expr::symbol("x"); }
Expr y() { return Expr::symbol("y"); }
Expr z() { return Expr::symbol("z"); }
Expr h() { return Expr::symbol("h"); }
Expr s() { return Expr::symbol("s"); }
} // namespace symbols

static const char* kSpatialNames[3] = {"x", "y", "z"};

GridFunction::GridFunction(std::string name, std::vector<GfDim> dims,
                           int space_order, std::optional<int> time_order,
                           bool time_buffered, ElemType elem, size_t alignment)
    : name_(std::move(name)),
      dims_(std::move(dims)),
      space_order_(space_order),
      time_order_(time_order),
      time_buffered_(time_buffered),
      elem_(elem) {
    numel_ = 1;
    for (const GfDim& d : dims_) numel_ *= static_cast<size_t>(d.extent);
    size_t nbytes = numel_ * elem_size(elem_);
    size_t padded = (nbytes + alignment - 1) / alignment * alignment;
    data_ = std::aligned_alloc(alignment, padded == 0 ? alignment : padded);
    if (!data_) throw Error("allocation failed for " + name_);
    std::memset(data_, 0, padded == 0 ? alignment : padded);
}

GridFunction::~GridFunction() { std::free(data_); }

std::vector<long> GridFunction::space_shape() const {
    std::vector<long> out;
    for (const GfDim& d : dims_)
        if (!d.is_time) out.push_back(d.extent);
    return out;
}

Expr GridFunction::sym() const {
    std::vector<Expr> args;
    args.reserve(dims_.size());
    for (const GfDim& d : dims_) args.push_back(Expr::symbol(d.name));
    return Expr::func(name_, std::move(args));
}

Expr GridFunction::dim_symbol(size_t slot) const {
    return Expr::symbol(dims_.at(slot).name);
}

size_t GridFunction::numel() const { return numel_; }

size_t GridFunction::flat_index(std::span<const long> idx) const {
    if (idx.size() != dims_.size())
        throw Error("index rank mismatch for " + name_);
    size_t flat = 0;
    for (size_t i = 0; i < dims_.size(); ++i) {
        long v = idx[i];
        if (v < 0 || v >= dims_[i].extent)
            throw Error("index out of range for " + name_);
        flat = flat * static_cast<size_t>(dims_[i].extent) +
               static_cast<size_t>(v);
    }
    return flat;
}

double GridFunction::get(std::span<const long> idx) const {
    size_t i = flat_index(idx);
    switch (elem_) {
        case ElemType::f32: return static_cast<const float*>(data_)[i];
        case ElemType::f64: return static_cast<const double*>(data_)[i];
        case ElemType::i32: return static_cast<const int*>(data_)[i];
    }
    return 0;
}

void GridFunction::set(std::span<const long> idx, double value) {
    size_t i = flat_index(idx);
    switch (elem_) {
        case ElemType::f32:
            static_cast<float*>(data_)[i] = static_cast<float>(value);
            break;
        case ElemType::f64:
            static_cast<double*>(data_)[i] = value;
            break;
        case ElemType::i32:
            static_cast<int*>(data_)[i] = static_cast<int>(value);
            break;
    }
}

void GridFunction::zero() { std::memset(data_, 0, bytes()); }

GridFunction& Grid::insert(std::unique_ptr<GridFunction> gf) {
    if (find(gf->name()))
        throw DuplicateNameError("name already registered: " + gf->name());
    gf->grid_ = this;
    registry_.push_back(std::move(gf));
    return *registry_.back();
}

static void validate_shape_order(const std::vector<long>& shape, int order) {
    if (shape.empty() || shape.size() > 3)
        throw InvalidShapeError("expected 1-3 spatial dimensions");
    if (order < 2 || order % 2 != 0)
        throw InvalidOrderError("space_order must be even and >= 2, got " +
                                std::to_string(order));
    for (long e : shape)
        if (e < order + 1)
            throw InvalidShapeError("extent " + std::to_string(e) +
                                    " too small for order " +
                                    std::to_string(order));
}

GridFunction& Grid::create_dense(const std::string& name,
                                 std::vector<long> space_shape,
                                 int space_order, ElemType elem) {
    validate_shape_order(space_shape, space_order);
    std::vector<GfDim> dims;
    for (size_t i = 0; i < space_shape.size(); ++i)
        dims.push_back({kSpatialNames[i], space_shape[i], "h", false});
    return insert(std::unique_ptr<GridFunction>(
        new GridFunction(name, std::move(dims), space_order, std::nullopt,
                         false, elem, alignment_)));
}

GridFunction& Grid::create_time(const std::string& name,
                                std::vector<long> space_shape, int time_order,
                                int space_order, ElemType elem) {
    validate_shape_order(space_shape, space_order);
    if (time_order < 1)
        throw InvalidOrderError("time_order must be >= 1, got " +
                                std::to_string(time_order));
    std::vector<GfDim> dims;
    dims.push_back({"t", static_cast<long>(time_order) + 1, "s", true});
    for (size_t i = 0; i < space_shape.size(); ++i)
        dims.push_back({kSpatialNames[i], space_shape[i], "h", false});
    return insert(std::unique_ptr<GridFunction>(
        new GridFunction(name, std::move(dims), space_order, time_order, true,
                         elem, alignment_)));
}

GridFunction& Grid::create_array(const std::string& name,
                                 std::vector<GfDim> dims, ElemType elem) {
    if (dims.empty()) throw InvalidShapeError("array needs dimensions");
    for (const GfDim& d : dims)
        if (d.extent < 1)
            throw InvalidShapeError("array extent must be positive");
    return insert(std::unique_ptr<GridFunction>(
        new GridFunction(name, std::move(dims), 0, std::nullopt, false, elem,
                         alignment_)));
}

GridFunction* Grid::find(const std::string& name) {
    for (auto& gf : registry_)
        if (gf->name() == name) return gf.get();
    return nullptr;
}

const GridFunction* Grid::find(const std::string& name) const {
    for (auto& gf : registry_)
        if (gf->name() == name) return gf.get();
    return nullptr;
}

const GridFunction& Grid::metadata_of(const Expr& e) const {
    if (e.kind() != ExprKind::FunctionApp && e.kind() != ExprKind::Indexed)
        throw UnknownSymbolError("not a function application: " + to_string(e));
    const GridFunction* gf = find(e.name());
    if (!gf) throw UnknownSymbolError("unregistered symbol: " + e.name());
    return *gf;
}

// ---------------------------------------------------------------------------
// Buffer import/export. Header: magic, name, element id, per-dim extents.

static constexpr uint32_t kMagic = 0x53464731; // "SFG1"

void save_buffer(const GridFunction& gf, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path);
    auto put_u32 = [&](uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), 4);
    };
    put_u32(kMagic);
    put_u32(static_cast<uint32_t>(gf.name().size()));
    out.write(gf.name().data(), static_cast<std::streamsize>(gf.name().size()));
    put_u32(static_cast<uint32_t>(gf.elem()));
    put_u32(static_cast<uint32_t>(gf.dims().size()));
    for (const GfDim& d : gf.dims()) put_u32(static_cast<uint32_t>(d.extent));
    out.write(static_cast<const char*>(gf.data()),
              static_cast<std::streamsize>(gf.bytes()));
    if (!out) throw IoError("short write: " + path);
}

void load_buffer(GridFunction& gf, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for read: " + path);
    auto get_u32 = [&]() {
        uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    if (get_u32() != kMagic) throw IoError("bad magic in " + path);
    uint32_t nlen = get_u32();
    std::string name(nlen, '\0');
    in.read(name.data(), nlen);
    if (get_u32() != static_cast<uint32_t>(gf.elem()))
        throw IoError("element type mismatch in " + path);
    uint32_t ndim = get_u32();
    if (ndim != gf.dims().size()) throw IoError("rank mismatch in " + path);
    for (const GfDim& d : gf.dims())
        if (get_u32() != static_cast<uint32_t>(d.extent))
            throw IoError("shape mismatch in " + path);
    in.read(static_cast<char*>(gf.data()),
            static_cast<std::streamsize>(gf.bytes()));
    if (!in) throw IoError("short read: " + path);
}

void dump_csv(const GridFunction& gf, const std::string& path, long slot) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    std::vector<long> shape = gf.space_shape();
    if (shape.size() != 2) throw IoError("csv dump supports 2D grids only");
    std::vector<long> idx;
    for (long i = 0; i < shape[0]; ++i) {
        for (long j = 0; j < shape[1]; ++j) {
            idx.clear();
            if (gf.is_time_varying()) idx.push_back(slot);
            idx.push_back(i);
            idx.push_back(j);
            if (j) out << ",";
            out << gf.get(std::span<const long>(idx));
        }
        out << "\n";
    }
}

} // namespace sf
