#include "sf/codegen.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

#include "sf/error.hpp"

namespace sf {

// ---------------------------------------------------------------------------
// literals

std::string format_literal(double v, ElemType elem) {
    char buf[64];
    std::to_chars_result res;
    if (elem == ElemType::f32) {
        res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v),
                            std::chars_format::scientific);
    } else {
        res = std::to_chars(buf, buf + sizeof buf, v,
                            std::chars_format::scientific);
    }
    std::string s(buf, res.ptr);
    // normalize exponent: strip '+' and leading zeros ("2.5e-01" -> "2.5e-1")
    size_t e = s.find('e');
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    bool neg = !exp.empty() && exp[0] == '-';
    if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) exp.erase(0, 1);
    while (exp.size() > 1 && exp[0] == '0') exp.erase(0, 1);
    std::string out = mant + "e" + (neg ? "-" : "") + exp;
    if (elem == ElemType::f32) out += "F";
    return out;
}

// ---------------------------------------------------------------------------
// expression printing

namespace {

using Rename = std::map<std::string, std::string>;

std::string mapped(const Rename& rn, const std::string& name) {
    auto it = rn.find(name);
    return it == rn.end() ? name : it->second;
}

std::string c_index(const Expr& e, const Rename& rn);

std::string c_index_term(const Expr& e, const Rename& rn, bool leading,
                         std::string& out) {
    // integer-context term with explicit sign handling
    long coeff = 1;
    Expr body = e;
    if (e.kind() == ExprKind::IntConst) {
        long v = e.rat().num();
        if (leading)
            out += std::to_string(v);
        else
            out += (v < 0 ? " - " : " + ") + std::to_string(v < 0 ? -v : v);
        return out;
    }
    if (e.kind() == ExprKind::Mul && e.args().size() == 2 &&
        e.args()[0].kind() == ExprKind::IntConst) {
        coeff = e.args()[0].rat().num();
        body = e.args()[1];
    }
    std::string mag = c_index(body, rn);
    if (coeff == 1) {
        out += leading ? mag : " + " + mag;
    } else if (coeff == -1) {
        out += leading ? "-" + mag : " - " + mag;
    } else if (coeff < 0) {
        out += (leading ? "-" : " - ") + std::to_string(-coeff) + "*" + mag;
    } else {
        out += (leading ? "" : " + ") + std::to_string(coeff) + "*" + mag;
    }
    return out;
}

std::string c_index(const Expr& e, const Rename& rn) {
    switch (e.kind()) {
        case ExprKind::IntConst:
            return std::to_string(e.rat().num());
        case ExprKind::Symbol:
            return mapped(rn, e.name());
        case ExprKind::Indexed: {
            std::string out = e.name();
            for (const Expr& idx : e.args())
                out += "[" + c_index(idx, rn) + "]";
            return out;
        }
        case ExprKind::Add: {
            // counters before constants: "i2 - 1", not "-1 + i2"
            std::vector<const Expr*> terms;
            for (const Expr& t : e.args())
                if (!t.is_const()) terms.push_back(&t);
            for (const Expr& t : e.args())
                if (t.is_const()) terms.push_back(&t);
            std::string out;
            for (size_t i = 0; i < terms.size(); ++i)
                c_index_term(*terms[i], rn, i == 0, out);
            return out;
        }
        case ExprKind::Mul: {
            std::string out;
            c_index_term(e, rn, true, out);
            return out;
        }
        default:
            throw UnloweredConstructError("non-integral index expression: " +
                                          to_string(e));
    }
}

struct CPrinter {
    ElemType elem;
    const Rename* rn;

    std::string one() const {
        return elem == ElemType::f32 ? "1.0F" : "1.0";
    }

    std::string value(const Expr& e) const {
        switch (e.kind()) {
            case ExprKind::IntConst:
            case ExprKind::RationalConst:
                return format_literal(e.rat().to_double(), elem);
            case ExprKind::FloatConst:
                return format_literal(e.fval(), elem);
            case ExprKind::Symbol:
                return mapped(*rn, e.name());
            case ExprKind::Indexed: {
                std::string out = e.name();
                for (const Expr& idx : e.args())
                    out += "[" + c_index(idx, *rn) + "]";
                return out;
            }
            case ExprKind::FunctionApp:
                throw UnloweredConstructError("unlowered function in codegen: " +
                                              to_string(e));
            case ExprKind::Add: {
                std::string out;
                for (size_t i = 0; i < e.args().size(); ++i)
                    term(e.args()[i], i == 0, out);
                return out;
            }
            case ExprKind::Mul:
            case ExprKind::Pow: {
                std::string out;
                term(e, true, out);
                return out;
            }
        }
        return "?";
    }

    // base**n for positive integral n, parenthesized product form
    std::string int_power(const Expr& base, long n) const {
        std::string b = factor(base);
        if (n == 1) return b;
        std::string out = "(" + b;
        for (long i = 1; i < n; ++i) out += "*" + b;
        return out + ")";
    }

    std::string factor(const Expr& f) const {
        if (f.kind() == ExprKind::Add) return "(" + value(f) + ")";
        if (f.kind() == ExprKind::Pow) {
            const Expr& b = f.args()[0];
            const Expr& ex = f.args()[1];
            if (ex.kind() == ExprKind::IntConst && ex.rat().num() > 0)
                return int_power(b, ex.rat().num());
            std::string fn = elem == ElemType::f32 ? "powf" : "pow";
            return fn + "(" + value(b) + ", " + value(ex) + ")";
        }
        return value(f);
    }

    void term(const Expr& t, bool leading, std::string& out) const {
        bool negative = false;
        double coeff = 1.0;
        bool have_coeff = false;
        std::vector<std::string> num;
        std::vector<std::string> den;

        auto ingest = [&](const Expr& f) {
            if (f.is_const()) {
                coeff = f.const_value();
                have_coeff = true;
                return;
            }
            if (f.kind() == ExprKind::Pow &&
                f.args()[1].kind() == ExprKind::IntConst &&
                f.args()[1].rat().num() < 0) {
                den.push_back(int_power(f.args()[0], -f.args()[1].rat().num()));
                return;
            }
            num.push_back(factor(f));
        };

        if (t.kind() == ExprKind::Mul) {
            for (const Expr& f : t.args()) ingest(f);
        } else {
            ingest(t);
        }

        if (have_coeff && coeff < 0) {
            negative = true;
            coeff = -coeff;
        }

        std::string mag;
        if (have_coeff && (coeff != 1.0 || num.empty()))
            mag = format_literal(coeff, elem);
        for (const std::string& f : num) {
            if (!mag.empty()) mag += "*";
            mag += f;
        }
        if (mag.empty()) mag = one();
        if (!den.empty()) {
            std::string d;
            for (const std::string& f : den) {
                if (!d.empty()) d += "*";
                d += f;
            }
            if (den.size() > 1) d = "(" + d + ")";
            mag += "/" + d;
        }

        if (leading)
            out += negative ? "-" + mag : mag;
        else
            out += (negative ? " - " : " + ") + mag;
    }
};

// ---------------------------------------------------------------------------
// structure emission

struct Emitter {
    const Grid& grid;
    const CodegenConfig& cfg;
    const KernelSignature& sig;
    Rename rn;
    std::string out;
    int depth = 0;

    void line(const std::string& s) {
        out.append(static_cast<size_t>(depth) * 2, ' ');
        out += s;
        out += "\n";
    }

    std::string aligned_clause(const IrNode& loop) const {
        std::vector<std::string> bases;
        std::function<void(const Expr&)> walk = [&](const Expr& e) {
            if (e.kind() == ExprKind::Indexed) bases.push_back(e.name());
            for (const Expr& a : e.args()) walk(a);
        };
        std::function<void(const IrNode&)> visit = [&](const IrNode& n) {
            if (n.kind == IrNode::Kind::Assign) {
                walk(n.lhs);
                walk(n.rhs);
            }
            for (const IrNode& c : n.body) visit(c);
        };
        visit(loop);
        std::string list;
        for (const KernelArg& a : sig.args) {
            if (std::find(bases.begin(), bases.end(), a.name) == bases.end())
                continue;
            if (!list.empty()) list += ",";
            list += a.name;
        }
        if (list.empty()) return "";
        return " aligned(" + list + ":" + std::to_string(cfg.alignment) + ")";
    }

    std::string bound_expr(const Bound& b) const {
        if (b.var.empty()) return std::to_string(b.fixed);
        std::string v = mapped(rn, b.var);
        if (b.fixed == 0) return v;
        if (b.fixed > 0) return v + " + " + std::to_string(b.fixed);
        return v + " - " + std::to_string(-b.fixed);
    }

    void emit_loop(const IrNode& n) {
        std::string var = mapped(rn, n.dim.name);
        std::string hi = bound_expr(n.hi);
        if (n.hi_cap) {
            // remainder handling; declared ahead of any pragma since OpenMP
            // loop directives must be followed directly by the for statement
            std::string cap = std::to_string(*n.hi_cap);
            std::string hvar = var + "_hi";
            line("const int " + hvar + " = (" + hi + " < " + cap + ") ? " +
                 hi + " : " + cap + ";");
            hi = hvar;
        }

        if (cfg.parallel && n.single) line("#pragma omp single");
        if (cfg.parallel && n.parallel_for) {
            if (n.simd)
                line("#pragma omp for simd" + aligned_clause(n) +
                     " schedule(static)");
            else
                line("#pragma omp for schedule(static)");
        } else if (cfg.parallel && n.simd) {
            line("#pragma omp simd" + aligned_clause(n));
        }
        std::string head;
        if (n.descending) {
            head = "for (int " + var + " = " + bound_expr(n.lo) + "; " + var +
                   " >= " + hi + "; " + var + " -= " + std::to_string(n.step) +
                   ")";
        } else {
            head = "for (int " + var + " = " + bound_expr(n.lo) + "; " + var +
                   " < " + hi + "; " + var + " += " + std::to_string(n.step) +
                   ")";
        }
        line(head);
        line("{");
        ++depth;
        for (const IrNode& c : n.body) emit_node(c);
        --depth;
        line("}");
    }

    void emit_node(const IrNode& n) {
        switch (n.kind) {
            case IrNode::Kind::Loop:
                emit_loop(n);
                break;
            case IrNode::Kind::AliasBlock: {
                if (cfg.parallel) line("#pragma omp single");
                line("{");
                ++depth;
                std::string tvar = mapped(rn, "t");
                for (const TimeAlias& a : n.aliases) {
                    long norm =
                        ((a.offset % a.modulus) + a.modulus) % a.modulus;
                    std::string rhs = norm == 0
                                          ? "(" + tvar + ")"
                                          : "(" + tvar + " + " +
                                                std::to_string(norm) + ")";
                    line(a.name + " = " + rhs + " % " +
                         std::to_string(a.modulus) + ";");
                }
                --depth;
                line("}");
                break;
            }
            case IrNode::Kind::Assign: {
                CPrinter pr{cfg.element_type, &rn};
                if (n.declare_scalar) {
                    line(std::string("const ") +
                         elem_cname(cfg.element_type) + " " + n.lhs.name() +
                         " = " + pr.value(n.rhs) + ";");
                } else {
                    line(pr.value(n.lhs) + " = " + pr.value(n.rhs) + ";");
                }
                break;
            }
        }
    }
};

void validate_lowered(const LoopNest& nest) {
    std::vector<std::string> bound;
    std::function<void(const std::vector<IrNode>&)> collect =
        [&](const std::vector<IrNode>& nodes) {
            for (const IrNode& n : nodes) {
                if (n.kind == IrNode::Kind::Loop) {
                    bound.push_back(n.dim.name);
                    collect(n.body);
                } else if (n.kind == IrNode::Kind::AliasBlock) {
                    for (const TimeAlias& a : n.aliases) bound.push_back(a.name);
                } else if (n.declare_scalar) {
                    bound.push_back(n.lhs.name());
                }
            }
        };
    collect(nest.roots);
    for_each_assign(nest, [&](const IrNode& a) {
        for (const Expr* side : {&a.lhs, &a.rhs}) {
            for (const std::string& s : free_symbols(*side))
                if (std::find(bound.begin(), bound.end(), s) == bound.end())
                    throw UnloweredConstructError(
                        "free symbol reaches codegen: " + s);
        }
    });
}

} // namespace

KernelSignature make_signature(const LoopNest& nest, const Grid& grid) {
    KernelSignature sig;
    for (const std::string& name : referenced_functions(nest, grid)) {
        const GridFunction* gf = grid.find(name);
        KernelArg arg;
        arg.name = name;
        arg.elem = gf->elem();
        for (const GfDim& d : gf->dims()) arg.shape.push_back(d.extent);
        sig.args.push_back(std::move(arg));
    }
    return sig;
}

std::string emit_source(const LoopNest& nest, const Grid& grid,
                        const CodegenConfig& cfg) {
    validate_lowered(nest);
    KernelSignature sig = make_signature(nest, grid);
    if (sig.args.empty())
        throw EmptyIterationSpaceError("kernel references no buffers");

    Emitter em{grid, cfg, sig, {}, {}, 0};

    // loop-counter renaming: spatial dims first (i1..iN), then time
    std::vector<std::string> spatial;
    for (const char* d : {"x", "y", "z"}) {
        bool present = false;
        std::function<void(const std::vector<IrNode>&)> find =
            [&](const std::vector<IrNode>& nodes) {
                for (const IrNode& n : nodes) {
                    if (n.kind != IrNode::Kind::Loop) continue;
                    std::string base = n.dim.name;
                    if (base.size() > 1 && base.back() == 'b')
                        base.pop_back();
                    if (base == d) present = true;
                    find(n.body);
                }
            };
        find(nest.roots);
        if (present) spatial.push_back(d);
    }
    for (size_t i = 0; i < spatial.size(); ++i) {
        std::string ix = "i" + std::to_string(i + 1);
        em.rn[spatial[i]] = ix;
        em.rn[spatial[i] + "b"] = ix + "b";
    }
    em.rn["t"] = "i" + std::to_string(spatial.size() + 1);

    std::string& out = em.out;
    out += "#include <math.h>\n\n";

    out += "int " + cfg.entry + "(";
    for (size_t i = 0; i < sig.args.size(); ++i) {
        if (i) out += ", ";
        out += std::string(elem_cname(sig.args[i].elem)) + " *" +
               sig.args[i].name + "_vec";
    }
    out += ")\n{\n";
    em.depth = 1;

    for (const KernelArg& a : sig.args) {
        std::string ty = elem_cname(a.elem);
        if (a.shape.size() == 1) {
            em.line(ty + " *" + a.name + " = " + a.name + "_vec;");
        } else {
            std::string dims;
            for (size_t d = 1; d < a.shape.size(); ++d)
                dims += "[" + std::to_string(a.shape[d]) + "]";
            em.line(ty + " (*" + a.name + ")" + dims + " = (" + ty + " (*)" +
                    dims + ") " + a.name + "_vec;");
        }
    }

    // alias declarations shared across the parallel region
    std::vector<std::string> alias_names;
    std::function<void(const std::vector<IrNode>&)> aliases =
        [&](const std::vector<IrNode>& nodes) {
            for (const IrNode& n : nodes) {
                if (n.kind == IrNode::Kind::AliasBlock)
                    for (const TimeAlias& a : n.aliases)
                        alias_names.push_back(a.name);
                aliases(n.body);
            }
        };
    aliases(nest.roots);

    em.line("{");
    ++em.depth;
    for (const std::string& a : alias_names) em.line("int " + a + ";");
    if (cfg.parallel) em.line("#pragma omp parallel");
    if (nest.roots.size() == 1 && nest.roots[0].kind == IrNode::Kind::Loop) {
        em.emit_node(nest.roots[0]);
    } else {
        em.line("{");
        ++em.depth;
        for (const IrNode& n : nest.roots) em.emit_node(n);
        --em.depth;
        em.line("}");
    }
    --em.depth;
    em.line("}");

    em.line("return 0;");
    out += "}\n";
    return out;
}

} // namespace sf
