#include "sf/op.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "sf/error.hpp"

namespace sf {

Operator::Operator(Grid& grid, std::vector<Eqn> stencils, Options opt)
    : grid_(grid), stencils_(std::move(stencils)), opt_(std::move(opt)) {}

namespace {

// Innermost non-single spatial loop of the stencil nest, if any.
IrNode* innermost_stencil_body(std::vector<IrNode>& nodes) {
    for (IrNode& n : nodes) {
        if (n.kind != IrNode::Kind::Loop || n.single) continue;
        if (IrNode* deeper = innermost_stencil_body(n.body)) return deeper;
        if (!n.dim.is_time) return &n;
    }
    return nullptr;
}

void apply_cse_pass(LoopNest& nest) {
    IrNode* inner = innermost_stencil_body(nest.roots);
    if (!inner) return;

    std::vector<Expr> rhs;
    for (const IrNode& n : inner->body)
        if (n.kind == IrNode::Kind::Assign && !n.declare_scalar)
            rhs.push_back(n.rhs);
    if (rhs.empty()) return;

    CseResult r = cse(rhs);
    if (r.temps.empty()) return;

    std::vector<IrNode> body;
    for (auto& [name, def] : r.temps)
        body.push_back(IrNode::assign(Expr::symbol(name), def, true));
    size_t k = 0;
    for (IrNode& n : inner->body) {
        if (n.kind == IrNode::Kind::Assign && !n.declare_scalar)
            n.rhs = r.body[k++];
        body.push_back(std::move(n));
    }
    inner->body = std::move(body);
}

} // namespace

void Operator::lower() {
    if (nest_) return;

    std::vector<Eqn> indexed;
    indexed.reserve(stencils_.size());
    for (const Eqn& eq : stencils_) indexed.push_back(indexify(eq, grid_));

    std::vector<Dimension> dims;
    if (!indexed.empty()) {
        dims = infer_iteration_space(indexed, grid_);
    } else if (!opt_.customs.empty()) {
        Dimension t;
        t.name = "t";
        t.is_time = true;
        t.parallelizable = false;
        dims.push_back(std::move(t));
    } else {
        throw EmptyIterationSpaceError("operator has no equations");
    }
    for (Dimension& d : dims)
        if (d.is_time) d.extent = opt_.nt;

    LoopNest nest = make_loop_nest(dims, indexed,
                                   opt_.direction == Direction::backward);
    for (const CustomIteration& c : opt_.customs) {
        Dimension d;
        d.name = c.index;
        d.extent = c.limit_hi - c.limit_lo;
        d.parallelizable = false;
        nest = add_custom_iteration(nest, c.eqs, d, c.limit_lo, c.limit_hi,
                                    c.after_stencil);
    }
    nest = lower_time_buffers(std::move(nest), grid_);
    nest = fold_scalars(std::move(nest), opt_.subs);
    if (opt_.enable_cse) apply_cse_pass(nest);
    nest = block_loops(std::move(nest), opt_.blocking);
    nest_ = std::move(nest);
}

const LoopNest& Operator::nest() {
    lower();
    return *nest_;
}

const std::string& Operator::source() {
    if (source_.empty()) {
        lower();
        source_ = emit_source(*nest_, grid_, opt_.cfg);
        sig_ = make_signature(*nest_, grid_);

        std::string dump = opt_.cfg.dump_path;
        if (const char* env = std::getenv("STENCILFORGE_DUMP"); env && *env)
            dump = env;
        if (!dump.empty()) {
            std::ofstream out(dump);
            out << source_;
        }
    }
    return source_;
}

const KernelSignature& Operator::signature() {
    source();
    return sig_;
}

void Operator::build() {
    if (kernel_) return;
    kernel_ = jit_compile(source(), opt_.cfg, sig_);
}

int Operator::apply() {
    build();
    std::vector<GridFunction*> buffers;
    for (const KernelArg& a : sig_.args) buffers.push_back(grid_.find(a.name));
    return apply(buffers);
}

int Operator::apply(std::span<GridFunction* const> buffers) {
    build();
    if (buffers.size() != sig_.args.size())
        throw SignatureMismatchError(
            "expected " + std::to_string(sig_.args.size()) + " buffers, got " +
            std::to_string(buffers.size()));
    std::vector<void*> args;
    args.reserve(buffers.size());
    for (size_t i = 0; i < buffers.size(); ++i) {
        GridFunction* gf = buffers[i];
        const KernelArg& want = sig_.args[i];
        if (!gf || gf->name() != want.name)
            throw SignatureMismatchError("argument " + std::to_string(i) +
                                         " must be " + want.name);
        if (gf->elem() != want.elem)
            throw SignatureMismatchError("element type mismatch for " +
                                         want.name);
        std::vector<long> shape;
        for (const GfDim& d : gf->dims()) shape.push_back(d.extent);
        if (shape != want.shape)
            throw SignatureMismatchError("shape mismatch for " + want.name);
        args.push_back(gf->data());
    }
    int status = kernel_->invoke(args);
    if (status != 0)
        throw KernelFailedError("kernel returned status " +
                                std::to_string(status));
    return status;
}

void Operator::interpret() {
    lower();
    IrInterpreter vm(*nest_, grid_);
    vm.run();
}

AutotuneReport Operator::autotune(std::span<const BlockingPlan> candidates,
                                  long tune_nt, int repeats) {
    if (candidates.empty())
        throw BadBlockSizeError("autotune needs at least one candidate");

    // snapshot every buffer the kernel touches so timing runs are repeatable
    signature();
    std::vector<std::pair<GridFunction*, std::vector<char>>> saved;
    for (const KernelArg& a : sig_.args) {
        GridFunction* gf = grid_.find(a.name);
        std::vector<char> copy(gf->bytes());
        std::memcpy(copy.data(), gf->data(), gf->bytes());
        saved.emplace_back(gf, std::move(copy));
    }
    auto restore = [&] {
        for (auto& [gf, copy] : saved)
            std::memcpy(gf->data(), copy.data(), copy.size());
    };

    AutotuneReport report;
    double best_time = 0.0;
    bool first = true;
    for (const BlockingPlan& plan : candidates) {
        Options vopt = opt_;
        vopt.nt = tune_nt;
        vopt.blocking = plan;
        Operator variant(grid_, stencils_, std::move(vopt));
        try {
            variant.build();
        } catch (const BadBlockSizeError&) {
            continue; // candidate does not fit this iteration space
        }

        std::vector<double> times;
        for (int r = 0; r < repeats; ++r) {
            restore();
            auto t0 = std::chrono::steady_clock::now();
            variant.apply();
            auto t1 = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        double median = times[times.size() / 2];
        report.entries.push_back({plan, median});
        if (first || median < best_time) {
            best_time = median;
            report.best = plan;
            first = false;
        }
    }
    restore();
    return report;
}

} // namespace sf
