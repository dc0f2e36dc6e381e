#include "sf/interp.hpp"

#include <cmath>
#include <map>

#include "sf/error.hpp"

namespace sf {

namespace {

struct VmOp {
    enum class K : uint8_t { Const, Var, Load, Add2, Mul2, PowInt, PowD };
    K k;
    double c = 0.0; // Const payload
    int slot = -1;  // Var payload
    int buf = -1;   // Load payload
    int ndim = 0;   // Load index count
    long n = 0;     // PowInt exponent
};

struct VmBuffer {
    void* data = nullptr;
    ElemType elem = ElemType::f64;
    std::vector<long> extents;
};

struct Program {
    std::vector<VmOp> ops;
    int max_stack = 0;
};

struct XAssign {
    bool scalar = false;
    int scalar_slot = -1;
    int buf = -1;
    ElemType elem = ElemType::f64;
    std::vector<Program> index;
    Program rhs;
};

struct XAlias {
    int slot;
    long offset_norm; // nonnegative offset modulo the window
    long modulus;
};

struct XBound {
    long fixed = 0;
    int var_slot = -1;
};

struct XNode {
    enum class Kind { Loop, Assign, Alias } kind = Kind::Assign;
    // loop
    int var_slot = -1;
    XBound lo, hi;
    long hi_cap = -1; // <0: none
    long step = 1;
    bool descending = false;
    std::vector<XNode> body;
    // assign
    XAssign assign;
    // alias
    std::vector<XAlias> aliases;
    int time_slot = -1;
};

} // namespace

struct IrInterpreter::Impl {
    std::vector<VmBuffer> buffers;
    std::map<std::string, int> buffer_ids;
    std::map<std::string, int> var_slots;
    std::vector<double> vars;
    std::vector<double> stack;
    std::vector<XNode> program;

    int var_slot(const std::string& name) {
        auto it = var_slots.find(name);
        if (it != var_slots.end()) return it->second;
        int id = static_cast<int>(var_slots.size());
        var_slots.emplace(name, id);
        return id;
    }

    int buffer_id(const std::string& name, Grid& grid) {
        auto it = buffer_ids.find(name);
        if (it != buffer_ids.end()) return it->second;
        GridFunction* gf = grid.find(name);
        if (!gf) throw UnknownSymbolError("unregistered buffer: " + name);
        VmBuffer b;
        b.data = gf->data();
        b.elem = gf->elem();
        for (const GfDim& d : gf->dims()) b.extents.push_back(d.extent);
        int id = static_cast<int>(buffers.size());
        buffers.push_back(std::move(b));
        buffer_ids.emplace(name, id);
        return id;
    }

    void compile_expr(const Expr& e, Grid& grid, Program& p, int& depth) {
        switch (e.kind()) {
            case ExprKind::IntConst:
            case ExprKind::RationalConst:
                p.ops.push_back({VmOp::K::Const, e.rat().to_double()});
                bump(p, ++depth);
                return;
            case ExprKind::FloatConst:
                p.ops.push_back({VmOp::K::Const, e.fval()});
                bump(p, ++depth);
                return;
            case ExprKind::Symbol: {
                auto it = var_slots.find(e.name());
                if (it == var_slots.end())
                    throw UnloweredConstructError("free symbol in kernel: " +
                                                  e.name());
                VmOp op{VmOp::K::Var};
                op.slot = it->second;
                p.ops.push_back(op);
                bump(p, ++depth);
                return;
            }
            case ExprKind::FunctionApp:
                throw UnloweredConstructError("unlowered function: " +
                                              to_string(e));
            case ExprKind::Indexed: {
                for (const Expr& idx : e.args()) compile_expr(idx, grid, p, depth);
                VmOp op{VmOp::K::Load};
                op.buf = buffer_id(e.name(), grid);
                op.ndim = static_cast<int>(e.args().size());
                p.ops.push_back(op);
                depth -= op.ndim - 1;
                return;
            }
            case ExprKind::Add:
            case ExprKind::Mul: {
                VmOp::K fold =
                    e.kind() == ExprKind::Add ? VmOp::K::Add2 : VmOp::K::Mul2;
                compile_expr(e.args()[0], grid, p, depth);
                for (size_t i = 1; i < e.args().size(); ++i) {
                    compile_expr(e.args()[i], grid, p, depth);
                    p.ops.push_back({fold});
                    --depth;
                }
                return;
            }
            case ExprKind::Pow: {
                compile_expr(e.args()[0], grid, p, depth);
                const Expr& ex = e.args()[1];
                if (ex.kind() == ExprKind::IntConst) {
                    VmOp op{VmOp::K::PowInt};
                    op.n = ex.rat().num();
                    p.ops.push_back(op);
                } else {
                    compile_expr(ex, grid, p, depth);
                    p.ops.push_back({VmOp::K::PowD});
                    --depth;
                }
                return;
            }
        }
    }

    static void bump(Program& p, int depth) {
        if (depth > p.max_stack) p.max_stack = depth;
    }

    Program compile_program(const Expr& e, Grid& grid) {
        Program p;
        int depth = 0;
        compile_expr(e, grid, p, depth);
        bump(p, p.max_stack); // max tracked during compile
        return p;
    }

    XNode compile_node(const IrNode& n, Grid& grid, int time_slot) {
        XNode x;
        switch (n.kind) {
            case IrNode::Kind::Loop: {
                x.kind = XNode::Kind::Loop;
                x.var_slot = var_slot(n.dim.name);
                x.lo.fixed = n.lo.fixed;
                x.lo.var_slot = n.lo.var.empty() ? -1 : var_slot(n.lo.var);
                x.hi.fixed = n.hi.fixed;
                x.hi.var_slot = n.hi.var.empty() ? -1 : var_slot(n.hi.var);
                x.hi_cap = n.hi_cap.value_or(-1);
                x.step = n.step;
                x.descending = n.descending;
                int tslot = n.dim.is_time ? x.var_slot : time_slot;
                for (const IrNode& c : n.body)
                    x.body.push_back(compile_node(c, grid, tslot));
                return x;
            }
            case IrNode::Kind::AliasBlock: {
                x.kind = XNode::Kind::Alias;
                x.time_slot = time_slot;
                for (const TimeAlias& a : n.aliases) {
                    long norm = ((a.offset % a.modulus) + a.modulus) % a.modulus;
                    x.aliases.push_back({var_slot(a.name), norm, a.modulus});
                }
                return x;
            }
            case IrNode::Kind::Assign: {
                x.kind = XNode::Kind::Assign;
                XAssign& a = x.assign;
                if (n.declare_scalar || n.lhs.kind() == ExprKind::Symbol) {
                    a.scalar = true;
                    a.scalar_slot = var_slot(n.lhs.name());
                } else if (n.lhs.kind() == ExprKind::Indexed) {
                    a.buf = buffer_id(n.lhs.name(), grid);
                    a.elem = buffers[static_cast<size_t>(a.buf)].elem;
                    for (const Expr& idx : n.lhs.args())
                        a.index.push_back(compile_program(idx, grid));
                } else {
                    throw UnloweredConstructError("bad assignment target: " +
                                                  to_string(n.lhs));
                }
                a.rhs = compile_program(n.rhs, grid);
                return x;
            }
        }
        return x;
    }

    double run_program(const Program& p) {
        double* sp = stack.data();
        for (const VmOp& op : p.ops) {
            switch (op.k) {
                case VmOp::K::Const: *sp++ = op.c; break;
                case VmOp::K::Var: *sp++ = vars[static_cast<size_t>(op.slot)]; break;
                case VmOp::K::Load: {
                    sp -= op.ndim;
                    const VmBuffer& b = buffers[static_cast<size_t>(op.buf)];
                    long flat = static_cast<long>(sp[0]);
                    for (int d = 1; d < op.ndim; ++d)
                        flat = flat * b.extents[static_cast<size_t>(d)] +
                               static_cast<long>(sp[d]);
                    switch (b.elem) {
                        case ElemType::f32:
                            *sp++ = static_cast<const float*>(b.data)[flat];
                            break;
                        case ElemType::f64:
                            *sp++ = static_cast<const double*>(b.data)[flat];
                            break;
                        case ElemType::i32:
                            *sp++ = static_cast<const int*>(b.data)[flat];
                            break;
                    }
                    break;
                }
                case VmOp::K::Add2: sp[-2] += sp[-1]; --sp; break;
                case VmOp::K::Mul2: sp[-2] *= sp[-1]; --sp; break;
                case VmOp::K::PowInt: {
                    double b = sp[-1];
                    long n = op.n < 0 ? -op.n : op.n;
                    double acc = 1.0;
                    for (long i = 0; i < n; ++i) acc *= b;
                    sp[-1] = op.n < 0 ? 1.0 / acc : acc;
                    break;
                }
                case VmOp::K::PowD:
                    sp[-2] = std::pow(sp[-2], sp[-1]);
                    --sp;
                    break;
            }
        }
        return sp[-1];
    }

    void exec(const XNode& x) {
        switch (x.kind) {
            case XNode::Kind::Loop: {
                long lo = x.lo.fixed +
                          (x.lo.var_slot >= 0
                               ? static_cast<long>(vars[static_cast<size_t>(x.lo.var_slot)])
                               : 0);
                long hi = x.hi.fixed +
                          (x.hi.var_slot >= 0
                               ? static_cast<long>(vars[static_cast<size_t>(x.hi.var_slot)])
                               : 0);
                if (x.hi_cap >= 0 && hi > x.hi_cap) hi = x.hi_cap;
                double& v = vars[static_cast<size_t>(x.var_slot)];
                if (x.descending) {
                    for (long i = lo; i >= hi; i -= x.step) {
                        v = static_cast<double>(i);
                        for (const XNode& c : x.body) exec(c);
                    }
                } else {
                    for (long i = lo; i < hi; i += x.step) {
                        v = static_cast<double>(i);
                        for (const XNode& c : x.body) exec(c);
                    }
                }
                break;
            }
            case XNode::Kind::Alias: {
                long t = static_cast<long>(vars[static_cast<size_t>(x.time_slot)]);
                for (const XAlias& a : x.aliases)
                    vars[static_cast<size_t>(a.slot)] =
                        static_cast<double>((t + a.offset_norm) % a.modulus);
                break;
            }
            case XNode::Kind::Assign: {
                const XAssign& a = x.assign;
                if (a.scalar) {
                    vars[static_cast<size_t>(a.scalar_slot)] = run_program(a.rhs);
                    break;
                }
                VmBuffer& b = buffers[static_cast<size_t>(a.buf)];
                long flat = 0;
                for (size_t d = 0; d < a.index.size(); ++d) {
                    long idx = static_cast<long>(run_program(a.index[d]));
                    flat = flat * b.extents[d] + idx;
                }
                double v = run_program(a.rhs);
                switch (a.elem) {
                    case ElemType::f32:
                        static_cast<float*>(b.data)[flat] = static_cast<float>(v);
                        break;
                    case ElemType::f64:
                        static_cast<double*>(b.data)[flat] = v;
                        break;
                    case ElemType::i32:
                        static_cast<int*>(b.data)[flat] = static_cast<int>(v);
                        break;
                }
                break;
            }
        }
    }
};

IrInterpreter::IrInterpreter(const LoopNest& nest, Grid& grid)
    : impl_(new Impl) {
    // pre-register loop variables and aliases so expressions can resolve them
    std::function<void(const IrNode&)> preregister = [&](const IrNode& n) {
        if (n.kind == IrNode::Kind::Loop) {
            impl_->var_slot(n.dim.name);
            if (!n.lo.var.empty()) impl_->var_slot(n.lo.var);
            if (!n.hi.var.empty()) impl_->var_slot(n.hi.var);
            for (const IrNode& c : n.body) preregister(c);
        } else if (n.kind == IrNode::Kind::AliasBlock) {
            for (const TimeAlias& a : n.aliases) impl_->var_slot(a.name);
        } else if (n.declare_scalar) {
            impl_->var_slot(n.lhs.name());
        }
    };
    for (const IrNode& n : nest.roots) preregister(n);

    int max_stack = 0;
    for (const IrNode& n : nest.roots)
        impl_->program.push_back(impl_->compile_node(n, grid, -1));
    std::function<void(const XNode&)> measure = [&](const XNode& x) {
        if (x.kind == XNode::Kind::Assign) {
            max_stack = std::max(max_stack, x.assign.rhs.max_stack);
            for (const Program& p : x.assign.index)
                max_stack = std::max(max_stack, p.max_stack);
        }
        for (const XNode& c : x.body) measure(c);
    };
    for (const XNode& x : impl_->program) measure(x);

    impl_->vars.assign(impl_->var_slots.size(), 0.0);
    impl_->stack.assign(static_cast<size_t>(max_stack) + 8, 0.0);
}

IrInterpreter::~IrInterpreter() { delete impl_; }

void IrInterpreter::run() {
    for (const XNode& x : impl_->program) impl_->exec(x);
}

void interpret(const LoopNest& nest, Grid& grid) {
    IrInterpreter vm(nest, grid);
    vm.run();
}

} // namespace sf
