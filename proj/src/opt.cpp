#include "sf/opt.hpp"

#include <algorithm>
#include <unordered_map>

#include "sf/error.hpp"

namespace sf {

std::string BlockingPlan::str() const {
    if (block.empty()) return "unblocked";
    std::string out;
    for (const auto& [dim, size] : block) {
        if (!out.empty()) out += ",";
        out += dim + ":" + std::to_string(size);
    }
    return out;
}

// ---------------------------------------------------------------------------
// common subexpression elimination

namespace {

using ExprCount = std::unordered_map<Expr, long, ExprHash, ExprEq>;
using ExprMemo = std::unordered_map<Expr, Expr, ExprHash, ExprEq>;

void count_subtrees(const Expr& e, ExprCount& counts) {
    ++counts[e];
    for (const Expr& a : e.args()) count_subtrees(a, counts);
}

struct CseCtx {
    ExprCount counts;
    ExprMemo memo;
    CseResult result;
};

Expr cse_rewrite(const Expr& e, CseCtx& ctx) {
    if (auto it = ctx.memo.find(e); it != ctx.memo.end()) return it->second;

    Expr rebuilt = e;
    if (!e.args().empty()) {
        std::vector<Expr> kids;
        kids.reserve(e.args().size());
        for (const Expr& a : e.args()) kids.push_back(cse_rewrite(a, ctx));
        switch (e.kind()) {
            case ExprKind::Add: rebuilt = Expr::add(std::move(kids)); break;
            case ExprKind::Mul: rebuilt = Expr::mul(std::move(kids)); break;
            case ExprKind::Pow: rebuilt = Expr::pow(kids[0], kids[1]); break;
            case ExprKind::FunctionApp:
                rebuilt = Expr::func(e.name(), std::move(kids));
                break;
            case ExprKind::Indexed:
                rebuilt = Expr::indexed(e.name(), std::move(kids));
                break;
            default: break;
        }
    }

    Expr out = rebuilt;
    if (ctx.counts.at(e) >= 2 && count_ops(e) >= 1) {
        std::string name = "temp" + std::to_string(ctx.result.temps.size());
        ctx.result.temps.emplace_back(name, rebuilt);
        out = Expr::symbol(name);
    }
    ctx.memo.emplace(e, out);
    return out;
}

} // namespace

CseResult cse(std::span<const Expr> exprs) {
    CseCtx ctx;
    for (const Expr& e : exprs) count_subtrees(e, ctx.counts);
    for (const Expr& e : exprs)
        ctx.result.body.push_back(cse_rewrite(e, ctx));
    return std::move(ctx.result);
}

// ---------------------------------------------------------------------------
// scalar folding

namespace {

void collect_bound_names(const std::vector<IrNode>& nodes,
                         std::vector<std::string>& names) {
    for (const IrNode& n : nodes) {
        switch (n.kind) {
            case IrNode::Kind::Loop:
                names.push_back(n.dim.name);
                collect_bound_names(n.body, names);
                break;
            case IrNode::Kind::AliasBlock:
                for (const TimeAlias& a : n.aliases) names.push_back(a.name);
                break;
            case IrNode::Kind::Assign:
                if (n.declare_scalar) names.push_back(n.lhs.name());
                break;
        }
    }
}

} // namespace

LoopNest fold_scalars(LoopNest nest,
                      std::span<const std::pair<Expr, Expr>> subs) {
    for_each_assign(nest, [&](IrNode& a) {
        a.lhs = substitute(a.lhs, subs);
        a.rhs = substitute(a.rhs, subs);
    });

    std::vector<std::string> bound;
    collect_bound_names(nest.roots, bound);
    std::vector<std::string> offenders;
    for_each_assign(nest, [&](const IrNode& a) {
        for (const Expr* side : {&a.lhs, &a.rhs}) {
            for (const std::string& s : free_symbols(*side)) {
                if (std::find(bound.begin(), bound.end(), s) != bound.end())
                    continue;
                if (std::find(offenders.begin(), offenders.end(), s) ==
                    offenders.end())
                    offenders.push_back(s);
            }
        }
    });
    if (!offenders.empty()) {
        std::string msg = "unresolved scalar symbols:";
        for (const std::string& s : offenders) msg += " " + s;
        throw UnresolvedSymbolError(msg);
    }
    return nest;
}

// ---------------------------------------------------------------------------
// loop blocking

namespace {

// A maximal chain of directly nested spatial loops (the stencil nest).
std::vector<IrNode*> loop_chain(IrNode& head) {
    std::vector<IrNode*> chain{&head};
    IrNode* cur = &head;
    while (cur->body.size() == 1 &&
           cur->body[0].kind == IrNode::Kind::Loop &&
           !cur->body[0].dim.is_time && !cur->body[0].single)
        chain.push_back(cur = &cur->body[0]);
    return chain;
}

void block_in(std::vector<IrNode>& nodes, const BlockingPlan& plan);

IrNode block_chain(IrNode head, const BlockingPlan& plan) {
    std::vector<IrNode*> chain = loop_chain(head);

    struct Split {
        Dimension dim;
        Bound lo, hi;
        long size;
        bool parallel;
    };
    std::vector<Split> splits;
    bool any_parallel = false;
    for (IrNode* loop : chain) {
        auto it = plan.block.find(loop->dim.name);
        if (it == plan.block.end()) continue;
        if (!loop->dim.parallelizable)
            throw BadBlockSizeError("dimension " + loop->dim.name +
                                    " is not blockable");
        long extent = loop->hi.fixed - loop->lo.fixed;
        if (it->second <= 0 || it->second > extent)
            throw BadBlockSizeError("block size " +
                                    std::to_string(it->second) +
                                    " invalid for extent " +
                                    std::to_string(extent));
        if (it->second == extent) continue; // full-extent block: unblocked
        any_parallel |= loop->parallel_for;
        splits.push_back({loop->dim, loop->lo, loop->hi, it->second,
                          loop->parallel_for});
        // rewrite the original loop to cover one block
        std::string bvar = loop->dim.name + "b";
        loop->lo = Bound::rel(bvar, 0);
        loop->hi_cap = loop->hi.fixed;
        loop->hi = Bound::rel(bvar, it->second);
        loop->parallel_for = false;
    }

    // recurse into whatever hangs below the chain
    block_in(chain.back()->body, plan);

    if (splits.empty()) return head;

    IrNode result = std::move(head);
    for (size_t i = splits.size(); i-- > 0;) {
        const Split& s = splits[i];
        Dimension bdim = s.dim;
        bdim.name = s.dim.name + "b";
        IrNode outer = IrNode::loop(std::move(bdim), s.lo, s.hi);
        outer.step = s.size;
        outer.body.push_back(std::move(result));
        result = std::move(outer);
    }
    result.parallel_for = any_parallel;
    return result;
}

void block_in(std::vector<IrNode>& nodes, const BlockingPlan& plan) {
    for (IrNode& n : nodes) {
        if (n.kind != IrNode::Kind::Loop) continue;
        if (n.dim.is_time || n.single) {
            block_in(n.body, plan);
            continue;
        }
        n = block_chain(std::move(n), plan);
    }
}

} // namespace

LoopNest block_loops(LoopNest nest, const BlockingPlan& plan) {
    if (plan.empty()) return nest;
    block_in(nest.roots, plan);
    return nest;
}

} // namespace sf
