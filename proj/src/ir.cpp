#include "sf/ir.hpp"

#include <algorithm>
#include <map>

#include "sf/error.hpp"

namespace sf {

IrNode IrNode::assign(Expr lhs, Expr rhs, bool declare) {
    IrNode n;
    n.kind = Kind::Assign;
    n.lhs = std::move(lhs);
    n.rhs = std::move(rhs);
    n.declare_scalar = declare;
    return n;
}

IrNode IrNode::loop(Dimension dim, Bound lo, Bound hi) {
    IrNode n;
    n.kind = Kind::Loop;
    n.dim = std::move(dim);
    n.lo = lo;
    n.hi = hi;
    return n;
}

// ---------------------------------------------------------------------------
// indexify

namespace {

// arg - dim must reduce to k * spacing with integral k
long shift_of(const Expr& arg, const Expr& dim_sym, const std::string& spacing) {
    Expr diff = simplify(arg - dim_sym);
    if (diff.is_zero()) return 0;
    if (!spacing.empty()) {
        Expr spacing_sym = Expr::symbol(spacing);
        if (diff.equals(spacing_sym)) return 1;
        if (diff.kind() == ExprKind::Mul && diff.args().size() == 2 &&
            diff.args()[0].kind() == ExprKind::IntConst &&
            diff.args()[1].equals(spacing_sym))
            return diff.args()[0].rat().num();
    }
    throw NonIntegerOffsetError("argument " + to_string(arg) +
                                " is not dimension plus integral spacing");
}

Expr indexify_walk(const Expr& e, const Grid& grid) {
    switch (e.kind()) {
        case ExprKind::FunctionApp: {
            const GridFunction* gf = grid.find(e.name());
            if (!gf)
                throw UnknownSymbolError("unregistered function: " + e.name());
            if (e.args().size() != gf->dims().size())
                throw ShapeMismatchError("arity mismatch for " + e.name());
            std::vector<Expr> indices;
            indices.reserve(e.args().size());
            for (size_t i = 0; i < e.args().size(); ++i) {
                const GfDim& d = gf->dims()[i];
                Expr dim_sym = Expr::symbol(d.name);
                long k = shift_of(e.args()[i], dim_sym, d.spacing);
                indices.push_back(k == 0 ? dim_sym
                                         : simplify(dim_sym + Expr::integer(k)));
            }
            return Expr::indexed(e.name(), std::move(indices));
        }
        case ExprKind::Add: {
            std::vector<Expr> ts;
            ts.reserve(e.args().size());
            for (const Expr& t : e.args()) ts.push_back(indexify_walk(t, grid));
            return Expr::add(std::move(ts));
        }
        case ExprKind::Mul: {
            std::vector<Expr> fs;
            fs.reserve(e.args().size());
            for (const Expr& f : e.args()) fs.push_back(indexify_walk(f, grid));
            return Expr::mul(std::move(fs));
        }
        case ExprKind::Pow:
            return Expr::pow(indexify_walk(e.args()[0], grid),
                             indexify_walk(e.args()[1], grid));
        default:
            return e;
    }
}

} // namespace

Expr indexify(const Expr& e, const Grid& grid) {
    return simplify(indexify_walk(e, grid));
}

Eqn indexify(const Eqn& eq, const Grid& grid) {
    return {indexify(eq.lhs, grid), indexify(eq.rhs, grid)};
}

// ---------------------------------------------------------------------------
// iteration-space inference

namespace {

// (dim symbol + integer) decomposition of an index expression, when it has
// that shape; indirect indices (nested loads, aliases) yield nothing.
std::optional<std::pair<std::string, long>> direct_index(const Expr& idx) {
    if (idx.kind() == ExprKind::Symbol) return {{idx.name(), 0}};
    if (idx.kind() == ExprKind::Add && idx.args().size() == 2 &&
        idx.args()[0].kind() == ExprKind::IntConst &&
        idx.args()[1].kind() == ExprKind::Symbol)
        return {{idx.args()[1].name(), idx.args()[0].rat().num()}};
    return std::nullopt;
}

struct DimAcc {
    long min_off = 0;
    long max_off = 0;
    long extent = -1;
    bool is_time = false;
    std::optional<int> buffer_count;
};

void scan_indexed(const Expr& e, const Grid& grid,
                  std::map<std::string, DimAcc>& acc) {
    if (e.kind() == ExprKind::Indexed) {
        const GridFunction* gf = grid.find(e.name());
        if (gf && e.args().size() == gf->dims().size()) {
            for (size_t i = 0; i < e.args().size(); ++i) {
                auto di = direct_index(e.args()[i]);
                if (!di || di->first != gf->dims()[i].name) continue;
                const GfDim& d = gf->dims()[i];
                DimAcc& a = acc[d.name];
                a.min_off = std::min(a.min_off, di->second);
                a.max_off = std::max(a.max_off, di->second);
                a.is_time |= d.is_time;
                if (d.is_time && gf->time_buffered()) {
                    a.buffer_count = static_cast<int>(gf->slots());
                } else if (!d.is_time) {
                    if (a.extent != -1 && a.extent != d.extent)
                        throw ShapeMismatchError(
                            "conflicting extents for dimension " + d.name);
                    a.extent = d.extent;
                }
            }
        }
    }
    for (const Expr& a : e.args()) scan_indexed(a, grid, acc);
}

} // namespace

std::vector<Dimension> infer_iteration_space(std::span<const Eqn> eqs,
                                             const Grid& grid) {
    std::map<std::string, DimAcc> acc;
    for (const Eqn& eq : eqs) {
        scan_indexed(eq.lhs, grid, acc);
        scan_indexed(eq.rhs, grid, acc);
    }
    std::vector<Dimension> dims;
    static const char* order[] = {"t", "x", "y", "z"};
    for (const char* name : order) {
        auto it = acc.find(name);
        if (it == acc.end()) continue;
        const DimAcc& a = it->second;
        Dimension d;
        d.name = name;
        d.is_time = a.is_time;
        d.lower_pad = std::max(0L, -a.min_off);
        d.upper_pad = std::max(0L, a.max_off);
        d.buffer_count = a.buffer_count;
        d.parallelizable = !a.is_time;
        if (!a.is_time) {
            d.extent = a.extent;
            if (d.extent - d.lower_pad - d.upper_pad < 1)
                throw EmptyIterationSpaceError(
                    "stencil reach exhausts dimension " + d.name);
        }
        dims.push_back(std::move(d));
    }
    if (dims.empty())
        throw EmptyIterationSpaceError("no iteration dimensions inferred");
    return dims;
}

// ---------------------------------------------------------------------------
// loop-nest construction

LoopNest make_loop_nest(std::vector<Dimension> dims, std::span<const Eqn> eqs,
                        bool time_descending) {
    std::vector<IrNode> body;
    for (const Eqn& eq : eqs) body.push_back(IrNode::assign(eq.lhs, eq.rhs));

    std::vector<size_t> spatial;
    for (size_t i = 0; i < dims.size(); ++i)
        if (!dims[i].is_time) spatial.push_back(i);

    for (size_t r = spatial.size(); r-- > 0;) {
        const Dimension& d = dims[spatial[r]];
        IrNode loop = IrNode::loop(d, Bound::at(d.lower_pad),
                                   Bound::at(d.extent - d.upper_pad));
        loop.simd = (r + 1 == spatial.size()) && d.parallelizable;
        loop.parallel_for = (r == 0) && d.parallelizable;
        loop.body = std::move(body);
        body.clear();
        body.push_back(std::move(loop));
    }

    for (size_t i = 0; i < dims.size(); ++i) {
        if (!dims[i].is_time) continue;
        const Dimension& d = dims[i];
        IrNode tloop = time_descending
                           ? IrNode::loop(d, Bound::at(d.extent), Bound::at(1))
                           : IrNode::loop(d, Bound::at(0), Bound::at(d.extent));
        tloop.descending = time_descending;
        tloop.body = std::move(body);
        body.clear();
        body.push_back(std::move(tloop));
        break;
    }

    LoopNest nest;
    nest.roots = std::move(body);
    return nest;
}

// ---------------------------------------------------------------------------
// time-buffer lowering

namespace {

IrNode* find_time_loop(std::vector<IrNode>& nodes) {
    for (IrNode& n : nodes) {
        if (n.kind != IrNode::Kind::Loop) continue;
        if (n.dim.is_time) return &n;
        if (IrNode* inner = find_time_loop(n.body)) return inner;
    }
    return nullptr;
}

void collect_time_offsets(const Expr& e, const Grid& grid,
                          std::map<std::pair<long, int>, std::string>& req) {
    if (e.kind() == ExprKind::Indexed) {
        const GridFunction* gf = grid.find(e.name());
        if (gf && gf->time_buffered() && !e.args().empty()) {
            auto di = direct_index(e.args()[0]);
            if (di && di->first == "t")
                req[{di->second, static_cast<int>(gf->slots())}] = "";
        }
    }
    for (const Expr& a : e.args()) collect_time_offsets(a, grid, req);
}

Expr rewrite_time_indices(
    const Expr& e, const Grid& grid,
    const std::map<std::pair<long, int>, std::string>& names) {
    if (e.kind() == ExprKind::Indexed) {
        const GridFunction* gf = grid.find(e.name());
        std::vector<Expr> idx;
        idx.reserve(e.args().size());
        for (size_t i = 0; i < e.args().size(); ++i) {
            Expr cur = rewrite_time_indices(e.args()[i], grid, names);
            if (i == 0 && gf && gf->time_buffered()) {
                auto di = direct_index(cur);
                if (di && di->first == "t") {
                    auto it =
                        names.find({di->second, static_cast<int>(gf->slots())});
                    if (it != names.end()) cur = Expr::symbol(it->second);
                }
            }
            idx.push_back(std::move(cur));
        }
        return Expr::indexed(e.name(), std::move(idx));
    }
    if (e.args().empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(e.args().size());
    for (const Expr& a : e.args())
        kids.push_back(rewrite_time_indices(a, grid, names));
    switch (e.kind()) {
        case ExprKind::Add: return Expr::add(std::move(kids));
        case ExprKind::Mul: return Expr::mul(std::move(kids));
        case ExprKind::Pow: return Expr::pow(kids[0], kids[1]);
        case ExprKind::FunctionApp: return Expr::func(e.name(), std::move(kids));
        default: return e;
    }
}

void rewrite_assigns(std::vector<IrNode>& nodes, const Grid& grid,
                     const std::map<std::pair<long, int>, std::string>& names) {
    for (IrNode& n : nodes) {
        if (n.kind == IrNode::Kind::Assign) {
            n.lhs = rewrite_time_indices(n.lhs, grid, names);
            n.rhs = rewrite_time_indices(n.rhs, grid, names);
        } else if (n.kind == IrNode::Kind::Loop) {
            rewrite_assigns(n.body, grid, names);
        }
    }
}

} // namespace

LoopNest lower_time_buffers(LoopNest nest, const Grid& grid) {
    IrNode* tloop = find_time_loop(nest.roots);
    if (!tloop) return nest;

    std::map<std::pair<long, int>, std::string> req;
    for_each_assign(nest, [&](const IrNode& a) {
        collect_time_offsets(a.lhs, grid, req);
        collect_time_offsets(a.rhs, grid, req);
    });
    if (req.empty()) return nest;

    int counter = 0;
    IrNode block;
    block.kind = IrNode::Kind::AliasBlock;
    block.single = true;
    for (auto& [key, name] : req) {
        name = "t" + std::to_string(counter++);
        block.aliases.push_back({name, static_cast<int>(key.first),
                                 key.second});
    }

    rewrite_assigns(nest.roots, grid, req);
    tloop = find_time_loop(nest.roots);
    tloop->body.insert(tloop->body.begin(), std::move(block));
    return nest;
}

// ---------------------------------------------------------------------------
// custom iterations

LoopNest add_custom_iteration(LoopNest nest, std::span<const Eqn> eqs,
                              const Dimension& index, long limit_lo,
                              long limit_hi, bool after_stencil) {
    if (eqs.empty()) return nest;

    auto check_index_expr = [&](const Expr& idx) {
        for (const std::string& s : free_symbols(idx)) {
            if (s == "t" || s == index.name) continue;
            if (s.size() > 1 && s[0] == 't' &&
                s.find_first_not_of("0123456789", 1) == std::string::npos)
                continue; // already-lowered alias
            throw UnboundIndexError("index uses unenclosed dimension " + s);
        }
    };
    std::function<void(const Expr&)> check_expr = [&](const Expr& e) {
        if (e.kind() == ExprKind::Indexed)
            for (const Expr& idx : e.args()) check_index_expr(idx);
        for (const Expr& a : e.args()) check_expr(a);
    };
    for (const Eqn& eq : eqs) {
        check_expr(eq.lhs);
        check_expr(eq.rhs);
    }

    Dimension d = index;
    d.is_time = false;
    d.parallelizable = false;
    IrNode loop = IrNode::loop(d, Bound::at(limit_lo), Bound::at(limit_hi));
    loop.single = true; // sequential: sparse writes may collide
    for (const Eqn& eq : eqs) loop.body.push_back(IrNode::assign(eq.lhs, eq.rhs));

    IrNode* tloop = find_time_loop(nest.roots);
    std::vector<IrNode>& target = tloop ? tloop->body : nest.roots;

    if (after_stencil) {
        target.push_back(std::move(loop));
    } else {
        auto pos = target.begin();
        while (pos != target.end() &&
               (pos->kind == IrNode::Kind::AliasBlock ||
                (pos->kind == IrNode::Kind::Loop && pos->single)))
            ++pos;
        target.insert(pos, std::move(loop));
    }
    return nest;
}

// ---------------------------------------------------------------------------
// traversal and printing

namespace {

void walk_assigns(std::vector<IrNode>& nodes,
                  const std::function<void(IrNode&)>& fn) {
    for (IrNode& n : nodes) {
        if (n.kind == IrNode::Kind::Assign)
            fn(n);
        else if (n.kind == IrNode::Kind::Loop)
            walk_assigns(n.body, fn);
    }
}

std::string bound_str(const Bound& b) {
    if (b.var.empty()) return std::to_string(b.fixed);
    if (b.fixed == 0) return b.var;
    return b.var + (b.fixed >= 0 ? " + " + std::to_string(b.fixed)
                                 : " - " + std::to_string(-b.fixed));
}

void print_nodes(const std::vector<IrNode>& nodes, int depth,
                 std::string& out) {
    std::string pad(static_cast<size_t>(depth) * 2, ' ');
    for (const IrNode& n : nodes) {
        switch (n.kind) {
            case IrNode::Kind::Loop: {
                out += pad + "for " + n.dim.name + " = " + bound_str(n.lo);
                out += n.descending ? " down to " : " .. ";
                out += bound_str(n.hi);
                if (n.hi_cap) out += " cap " + std::to_string(*n.hi_cap);
                if (n.step != 1) out += " step " + std::to_string(n.step);
                if (n.parallel_for) out += " [parallel]";
                if (n.simd) out += " [simd]";
                if (n.single) out += " [single]";
                out += " {\n";
                print_nodes(n.body, depth + 1, out);
                out += pad + "}\n";
                break;
            }
            case IrNode::Kind::Assign:
                out += pad;
                if (n.declare_scalar) out += "scalar ";
                out += to_string(n.lhs) + " = " + to_string(n.rhs) + "\n";
                break;
            case IrNode::Kind::AliasBlock: {
                out += pad + "aliases";
                for (size_t i = 0; i < n.aliases.size(); ++i) {
                    const TimeAlias& a = n.aliases[i];
                    out += (i ? ", " : " ");
                    out += a.name + " = (t + " +
                           std::to_string(((a.offset % a.modulus) + a.modulus) %
                                          a.modulus) +
                           ") % " + std::to_string(a.modulus);
                }
                out += " [single]\n";
                break;
            }
        }
    }
}

} // namespace

void for_each_assign(LoopNest& nest, const std::function<void(IrNode&)>& fn) {
    walk_assigns(nest.roots, fn);
}

void for_each_assign(const LoopNest& nest,
                     const std::function<void(const IrNode&)>& fn) {
    walk_assigns(const_cast<LoopNest&>(nest).roots,
                 [&fn](IrNode& n) { fn(n); });
}

std::string to_string(const LoopNest& nest) {
    std::string out;
    print_nodes(nest.roots, 0, out);
    return out;
}

std::vector<std::string> referenced_functions(const LoopNest& nest,
                                              const Grid& grid) {
    std::vector<std::string> seen;
    for_each_assign(nest, [&](const IrNode& a) {
        std::function<void(const Expr&)> walk = [&](const Expr& e) {
            if (e.kind() == ExprKind::Indexed && grid.find(e.name())) {
                if (std::find(seen.begin(), seen.end(), e.name()) == seen.end())
                    seen.push_back(e.name());
            }
            for (const Expr& c : e.args()) walk(c);
        };
        walk(a.lhs);
        walk(a.rhs);
    });
    std::vector<std::string> ordered;
    for (const auto& gf : grid.functions())
        if (std::find(seen.begin(), seen.end(), gf->name()) != seen.end())
            ordered.push_back(gf->name());
    return ordered;
}

} // namespace sf
