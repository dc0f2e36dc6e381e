#include "sf/sparse.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sf/error.hpp"

namespace sf {

InterpWeights interpolation_weights(std::span<const double> coord,
                                    double spacing,
                                    std::span<const long> extents) {
    if (coord.size() != extents.size())
        throw OutOfDomainError("coordinate rank mismatch");
    if (spacing <= 0) throw OutOfDomainError("spacing must be positive");

    const size_t d = coord.size();
    InterpWeights out;
    out.cell.resize(d);
    std::vector<double> frac(d);
    for (size_t i = 0; i < d; ++i) {
        double pos = coord[i] / spacing;
        if (pos < 0)
            throw OutOfDomainError("coordinate below the grid origin");
        long cell = static_cast<long>(std::floor(pos));
        if (cell > extents[i] - 2)
            throw OutOfDomainError("coordinate beyond the last cell");
        out.cell[i] = cell;
        frac[i] = pos - static_cast<double>(cell);
    }
    size_t corners = size_t{1} << d;
    out.weights.resize(corners);
    for (size_t k = 0; k < corners; ++k) {
        double w = 1.0;
        for (size_t i = 0; i < d; ++i)
            w *= (k >> i) & 1 ? frac[i] : 1.0 - frac[i];
        out.weights[k] = w;
    }
    return out;
}

SparsePointSet::SparsePointSet(Grid& grid, std::string name,
                               std::span<const std::vector<double>> coords,
                               long nt, double spacing,
                               const GridFunction& field) {
    if (coords.empty()) throw OutOfDomainError("point set is empty");
    std::vector<long> extents = field.space_shape();
    sdim_ = static_cast<int>(extents.size());
    np_ = static_cast<long>(coords.size());
    nt_ = nt;

    data_ = &grid.create_array(name,
                               {{"t", nt, "", true}, {"p", np_, "", false}},
                               field.elem());
    ci_ = &grid.create_array(name + "_ci",
                             {{"p", np_, "", false},
                              {"c", sdim_, "", false}},
                             ElemType::i32);
    long corners = 1L << sdim_;
    w_ = &grid.create_array(name + "_w",
                            {{"p", np_, "", false}, {"c", corners, "", false}},
                            field.elem());

    for (long p = 0; p < np_; ++p) {
        if (static_cast<int>(coords[p].size()) != sdim_)
            throw OutOfDomainError("point " + std::to_string(p) +
                                   " has wrong rank");
        InterpWeights iw =
            interpolation_weights(coords[p], spacing, extents);
        for (int d = 0; d < sdim_; ++d)
            ci_->set({p, d}, static_cast<double>(iw.cell[d]));
        for (long k = 0; k < corners; ++k) w_->set({p, k}, iw.weights[k]);
    }
}

namespace {

std::vector<Expr> corner_indices(const SparsePointSet& pts, long corner) {
    Expr p = Expr::symbol("p");
    std::vector<Expr> idx;
    for (int d = 0; d < pts.sdim(); ++d) {
        Expr base = Expr::indexed(pts.cell_index().name(),
                                  {p, Expr::integer(d)});
        if ((corner >> d) & 1) base = simplify(base + Expr::integer(1));
        idx.push_back(std::move(base));
    }
    return idx;
}

// spatial dimension symbols of the field replaced by the corner indices,
// after indexifying any function applications the scale carries
Expr rebase_scale(const Expr& scale, const GridFunction& field,
                  const std::vector<Expr>& corner) {
    Expr lowered = indexify(scale, field.grid());
    std::vector<std::pair<Expr, Expr>> subs;
    size_t c = 0;
    for (const GfDim& d : field.dims()) {
        if (d.is_time) continue;
        subs.emplace_back(Expr::symbol(d.name), corner[c++]);
    }
    return substitute(lowered, subs);
}

void require_time_varying(const GridFunction& field) {
    if (!field.is_time_varying())
        throw MissingTimeDimensionError("sparse interpolation needs a "
                                        "time-varying field, " +
                                        field.name() + " is dense");
}

} // namespace

CustomIteration build_inject(const GridFunction& field,
                             const SparsePointSet& pts, const Expr& scale,
                             int field_time_offset, int data_row_offset) {
    require_time_varying(field);
    Expr t = symbols::t();
    Expr p = Expr::symbol("p");
    Expr field_t = simplify(t + Expr::integer(field_time_offset));
    Expr row = simplify(t + Expr::integer(data_row_offset));
    Expr series = Expr::indexed(pts.data().name(), {row, p});

    CustomIteration it;
    it.index = "p";
    it.limit_lo = 0;
    it.limit_hi = pts.num_points();
    it.after_stencil = true;

    long corners = 1L << pts.sdim();
    for (long k = 0; k < corners; ++k) {
        std::vector<Expr> corner = corner_indices(pts, k);
        std::vector<Expr> lhs_idx{field_t};
        for (const Expr& c : corner) lhs_idx.push_back(c);
        Expr lhs = Expr::indexed(field.name(), lhs_idx);
        Expr weight = Expr::indexed(pts.corner_weights().name(),
                                    {p, Expr::integer(k)});
        Expr scaled = rebase_scale(scale, field, corner);
        Expr rhs = simplify(lhs + Expr::mul({weight, scaled, series}));
        it.eqs.push_back({lhs, rhs});
    }
    return it;
}

CustomIteration build_sample(const GridFunction& field,
                             const SparsePointSet& pts, int field_time_offset,
                             int data_row_offset) {
    require_time_varying(field);
    Expr t = symbols::t();
    Expr p = Expr::symbol("p");
    Expr field_t = simplify(t + Expr::integer(field_time_offset));
    Expr row = simplify(t + Expr::integer(data_row_offset));

    CustomIteration it;
    it.index = "p";
    it.limit_lo = 0;
    it.limit_hi = pts.num_points();
    it.after_stencil = true;

    long corners = 1L << pts.sdim();
    std::vector<Expr> terms;
    for (long k = 0; k < corners; ++k) {
        std::vector<Expr> corner = corner_indices(pts, k);
        std::vector<Expr> idx{field_t};
        for (const Expr& c : corner) idx.push_back(c);
        Expr weight = Expr::indexed(pts.corner_weights().name(),
                                    {p, Expr::integer(k)});
        terms.push_back(
            Expr::mul({weight, Expr::indexed(field.name(), idx)}));
    }
    Expr lhs = Expr::indexed(pts.data().name(), {row, p});
    it.eqs.push_back({lhs, simplify(Expr::add(std::move(terms)))});
    return it;
}

PointFile load_point_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open point file: " + path);
    PointFile out;
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::stringstream ss(line);
        std::vector<double> coord;
        std::string ref;
        std::string tok;
        while (ss >> tok) {
            if (tok[0] == '@') {
                ref = tok.substr(1);
                break;
            }
            coord.push_back(std::stod(tok));
        }
        if (coord.empty()) continue;
        out.coords.push_back(std::move(coord));
        out.series_refs.push_back(std::move(ref));
    }
    return out;
}

std::vector<std::vector<double>> load_points(const std::string& path) {
    return load_point_file(path).coords;
}

std::vector<double> load_series_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open series file: " + path);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

void save_series_text(const GridFunction& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path);
    long nt = data.dims()[0].extent;
    long np = data.dims()[1].extent;
    for (long t = 0; t < nt; ++t) {
        for (long p = 0; p < np; ++p) {
            if (p) out << " ";
            out << data.get({t, p});
        }
        out << "\n";
    }
}

} // namespace sf
