#include "sf/expr.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>

#include "sf/error.hpp"

namespace sf {

namespace {

uint64_t hash_mix(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

uint64_t hash_str(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t compute_hash(const ExprNode& n) {
    uint64_t h = static_cast<uint64_t>(n.kind) * 0x100000001b3ull + 17;
    switch (n.kind) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
            h = hash_mix(h, static_cast<uint64_t>(n.rat.num()));
            h = hash_mix(h, static_cast<uint64_t>(n.rat.den()));
            break;
        case ExprKind::FloatConst: {
            uint64_t bits;
            std::memcpy(&bits, &n.fval, sizeof bits);
            h = hash_mix(h, bits);
            break;
        }
        default:
            break;
    }
    if (!n.name.empty()) h = hash_mix(h, hash_str(n.name));
    for (const Expr& a : n.args) h = hash_mix(h, a.hash());
    return h;
}

} // namespace

ExprPtr detail_make_node(ExprNode n) {
    n.hash = compute_hash(n);
    return std::make_shared<const ExprNode>(std::move(n));
}

Expr detail_wrap(ExprPtr p) { return Expr(std::move(p)); }

Expr Expr::wrap(ExprNode n) { return detail_wrap(detail_make_node(std::move(n))); }

Expr::Expr() : node_(nullptr) {
    static const ExprPtr zero = [] {
        ExprNode n;
        n.kind = ExprKind::IntConst;
        n.rat = Rational(0);
        return detail_make_node(std::move(n));
    }();
    node_ = zero;
}

Expr Expr::integer(long long v) {
    ExprNode n;
    n.kind = ExprKind::IntConst;
    n.rat = Rational(v);
    return wrap(std::move(n));
}

Expr Expr::rational(const Rational& r) {
    if (r.is_integer()) return integer(r.num());
    ExprNode n;
    n.kind = ExprKind::RationalConst;
    n.rat = r;
    return wrap(std::move(n));
}

Expr Expr::rational(long long num, long long den) {
    return rational(Rational(num, den));
}

Expr Expr::real(double v) {
    ExprNode n;
    n.kind = ExprKind::FloatConst;
    n.fval = v;
    return wrap(std::move(n));
}

Expr Expr::symbol(std::string name) {
    ExprNode n;
    n.kind = ExprKind::Symbol;
    n.name = std::move(name);
    return wrap(std::move(n));
}

Expr Expr::func(std::string name, std::vector<Expr> args) {
    ExprNode n;
    n.kind = ExprKind::FunctionApp;
    n.name = std::move(name);
    n.args = std::move(args);
    return wrap(std::move(n));
}

Expr Expr::indexed(std::string base, std::vector<Expr> indices) {
    ExprNode n;
    n.kind = ExprKind::Indexed;
    n.name = std::move(base);
    n.args = std::move(indices);
    return wrap(std::move(n));
}

Expr Expr::add_raw(std::vector<Expr> terms) {
    ExprNode n;
    n.kind = ExprKind::Add;
    n.args = std::move(terms);
    return wrap(std::move(n));
}

Expr Expr::mul_raw(std::vector<Expr> factors) {
    ExprNode n;
    n.kind = ExprKind::Mul;
    n.args = std::move(factors);
    return wrap(std::move(n));
}

Expr Expr::pow_raw(Expr base, Expr exponent) {
    ExprNode n;
    n.kind = ExprKind::Pow;
    n.args = {std::move(base), std::move(exponent)};
    return wrap(std::move(n));
}

bool Expr::is_const() const {
    switch (kind()) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
        case ExprKind::FloatConst:
            return true;
        default:
            return false;
    }
}

bool Expr::is_zero() const {
    if (kind() == ExprKind::FloatConst) return fval() == 0.0;
    return is_const() && rat().is_zero();
}

bool Expr::is_one() const {
    if (kind() == ExprKind::FloatConst) return fval() == 1.0;
    return is_const() && rat().is_one();
}

bool Expr::is_int(long long v) const {
    return kind() == ExprKind::IntConst && rat() == Rational(v);
}

double Expr::const_value() const {
    return kind() == ExprKind::FloatConst ? fval() : rat().to_double();
}

bool Expr::equals(const Expr& other) const {
    const ExprNode* a = node_.get();
    const ExprNode* b = other.node_.get();
    if (a == b) return true;
    if (a->hash != b->hash || a->kind != b->kind) return false;
    switch (a->kind) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
            return a->rat == b->rat;
        case ExprKind::FloatConst:
            return a->fval == b->fval;
        default:
            break;
    }
    if (a->name != b->name || a->args.size() != b->args.size()) return false;
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!a->args[i].equals(b->args[i])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Constant arithmetic: exact while both operands are exact, double otherwise.

namespace {

struct ConstVal {
    bool is_float = false;
    Rational r = Rational(1);
    double f = 1.0;

    static ConstVal zero() { return {false, Rational(0), 0.0}; }
    static ConstVal one() { return {false, Rational(1), 1.0}; }
    static ConstVal of(const Expr& e) {
        ConstVal c;
        if (e.kind() == ExprKind::FloatConst) {
            c.is_float = true;
            c.f = e.fval();
        } else {
            c.r = e.rat();
        }
        return c;
    }

    double as_double() const { return is_float ? f : r.to_double(); }
    bool is_zero() const { return is_float ? f == 0.0 : r.is_zero(); }
    bool is_one() const { return is_float ? f == 1.0 : r.is_one(); }
    bool is_negative() const { return is_float ? f < 0.0 : r < Rational(0); }

    ConstVal neg() const {
        ConstVal c = *this;
        if (c.is_float)
            c.f = -c.f;
        else
            c.r = -c.r;
        return c;
    }

    Expr to_expr() const {
        return is_float ? Expr::real(f) : Expr::rational(r);
    }

    friend ConstVal operator+(const ConstVal& a, const ConstVal& b) {
        if (a.is_float || b.is_float)
            return {true, Rational(0), a.as_double() + b.as_double()};
        return {false, a.r + b.r, 0.0};
    }
    friend ConstVal operator*(const ConstVal& a, const ConstVal& b) {
        if (a.is_float || b.is_float)
            return {true, Rational(0), a.as_double() * b.as_double()};
        return {false, a.r * b.r, 0.0};
    }
};

int compare_const(const Expr& a, const Expr& b) {
    bool af = a.kind() == ExprKind::FloatConst;
    bool bf = b.kind() == ExprKind::FloatConst;
    if (!af && !bf) {
        if (a.rat() == b.rat()) return 0;
        return a.rat() < b.rat() ? -1 : 1;
    }
    double x = a.const_value();
    double y = b.const_value();
    if (x < y) return -1;
    if (x > y) return 1;
    return af == bf ? 0 : (af ? 1 : -1); // exact sorts before float on ties
}

int kind_rank(ExprKind k) {
    switch (k) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
        case ExprKind::FloatConst:
            return 0;
        case ExprKind::Symbol:
            return 1;
        case ExprKind::Add:
            return 2;
        case ExprKind::FunctionApp:
            return 3;
        case ExprKind::Indexed:
            return 4;
        case ExprKind::Mul:
            return 5;
        case ExprKind::Pow:
            return 6;
    }
    return 7;
}

// (coefficient, non-constant factors) view of a term. Canonical Mul always
// keeps its constant (if any) as args[0].
struct CoeffRest {
    ConstVal coeff;
    std::span<const Expr> rest;
};

CoeffRest as_coeff_rest(const Expr& e) {
    if (e.is_const()) return {ConstVal::of(e), {}};
    if (e.kind() == ExprKind::Mul) {
        const auto& fs = e.args();
        if (!fs.empty() && fs[0].is_const())
            return {ConstVal::of(fs[0]), std::span(fs).subspan(1)};
        return {ConstVal::one(), std::span(fs)};
    }
    return {ConstVal::one(), {&e, 1}};
}

std::pair<Expr, Expr> base_exp(const Expr& e) {
    if (e.kind() == ExprKind::Pow) return {e.args()[0], e.args()[1]};
    return {e, Expr::integer(1)};
}

int compare_base(const Expr& a, const Expr& b);

int compare_factor(const Expr& a, const Expr& b) {
    auto [ab, ae] = base_exp(a);
    auto [bb, be] = base_exp(b);
    if (int c = compare_base(ab, bb)) return c;
    return compare(ae, be);
}

int compare_base(const Expr& a, const Expr& b) {
    if (a.is_const() && b.is_const()) return compare_const(a, b);
    int ra = kind_rank(a.kind());
    int rb = kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case ExprKind::Symbol:
            return a.name().compare(b.name()) < 0   ? -1
                   : a.name() == b.name()           ? 0
                                                    : 1;
        case ExprKind::FunctionApp:
        case ExprKind::Indexed: {
            if (int c = a.name().compare(b.name())) return c < 0 ? -1 : 1;
            size_t n = std::min(a.args().size(), b.args().size());
            for (size_t i = 0; i < n; ++i)
                if (int c = compare(a.args()[i], b.args()[i])) return c;
            if (a.args().size() != b.args().size())
                return a.args().size() < b.args().size() ? -1 : 1;
            return 0;
        }
        case ExprKind::Add:
        case ExprKind::Mul: {
            size_t n = std::min(a.args().size(), b.args().size());
            for (size_t i = 0; i < n; ++i)
                if (int c = compare(a.args()[i], b.args()[i])) return c;
            if (a.args().size() != b.args().size())
                return a.args().size() < b.args().size() ? -1 : 1;
            return 0;
        }
        case ExprKind::Pow: {
            if (int c = compare(a.args()[0], b.args()[0])) return c;
            return compare(a.args()[1], b.args()[1]);
        }
        default:
            return 0;
    }
}

} // namespace

int compare(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return 0;
    bool ca = a.is_const();
    bool cb = b.is_const();
    if (ca && cb) return compare_const(a, b);
    if (ca != cb) return ca ? -1 : 1; // constants first
    auto da = as_coeff_rest(a);
    auto db = as_coeff_rest(b);
    size_t n = std::min(da.rest.size(), db.rest.size());
    for (size_t i = 0; i < n; ++i)
        if (int c = compare_factor(da.rest[i], db.rest[i])) return c;
    if (da.rest.size() != db.rest.size())
        return da.rest.size() < db.rest.size() ? -1 : 1;
    double x = da.coeff.as_double();
    double y = db.coeff.as_double();
    if (x < y) return -1;
    if (x > y) return 1;
    return 0;
}

// ---------------------------------------------------------------------------
// Canonicalizing constructors.

namespace {

// Constant != 1 goes first, remaining factors sorted; assumes inputs already
// individually canonical.
Expr assemble_mul(const ConstVal& coeff, std::vector<Expr> factors) {
    std::sort(factors.begin(), factors.end(),
              [](const Expr& x, const Expr& y) { return compare_factor(x, y) < 0; });
    if (coeff.is_zero()) return coeff.to_expr();
    if (factors.empty()) return coeff.to_expr();
    // a plain number times a sum distributes, mirroring symbolic convention
    if (!coeff.is_one() && factors.size() == 1 &&
        factors[0].kind() == ExprKind::Add) {
        std::vector<Expr> scaled;
        scaled.reserve(factors[0].args().size());
        for (const Expr& t : factors[0].args())
            scaled.push_back(Expr::mul({coeff.to_expr(), t}));
        return Expr::add(std::move(scaled));
    }
    if (coeff.is_one() && factors.size() == 1) return factors[0];
    std::vector<Expr> out;
    out.reserve(factors.size() + 1);
    if (!coeff.is_one()) out.push_back(coeff.to_expr());
    for (Expr& f : factors) out.push_back(std::move(f));
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = ExprKind::Mul;
    n.args = std::move(out);
    return detail_wrap(detail_make_node(std::move(n)));
}

Expr assemble_term(const ConstVal& coeff, std::span<const Expr> rest) {
    return assemble_mul(coeff, std::vector<Expr>(rest.begin(), rest.end()));
}

} // namespace

Expr Expr::add(std::vector<Expr> terms) {
    ConstVal cbucket = ConstVal::zero();
    // key: the factor list of the term; value: accumulated coefficient
    std::vector<std::pair<Expr, ConstVal>> groups; // key expr is rest-product
    std::vector<std::vector<Expr>> group_rest;

    auto ingest = [&](const Expr& t) {
        if (t.is_zero()) return;
        if (t.is_const()) {
            cbucket = cbucket + ConstVal::of(t);
            return;
        }
        auto [coeff, rest] = as_coeff_rest(t);
        Expr key = rest.size() == 1 ? rest[0]
                                    : assemble_term(ConstVal::one(), rest);
        for (auto& g : groups) {
            if (g.first.equals(key)) {
                g.second = g.second + coeff;
                return;
            }
        }
        groups.emplace_back(key, coeff);
        group_rest.emplace_back(rest.begin(), rest.end());
    };

    for (const Expr& t : terms) {
        if (t.kind() == ExprKind::Add) {
            for (const Expr& s : t.args()) ingest(s);
        } else {
            ingest(t);
        }
    }

    std::vector<Expr> out;
    out.reserve(groups.size() + 1);
    for (size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].second.is_zero()) continue;
        out.push_back(assemble_term(groups[i].second, group_rest[i]));
    }
    if (!cbucket.is_zero() || out.empty()) out.push_back(cbucket.to_expr());
    if (out.size() == 1) return out[0];
    std::sort(out.begin(), out.end(),
              [](const Expr& x, const Expr& y) { return compare(x, y) < 0; });
    ExprNode n;
    n.kind = ExprKind::Add;
    n.args = std::move(out);
    return wrap(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
    ConstVal coeff = ConstVal::one();
    std::vector<Expr> bases;
    std::vector<Expr> exps;

    auto ingest_factor = [&](const Expr& f) {
        if (f.is_const()) {
            coeff = coeff * ConstVal::of(f);
            return;
        }
        auto [b, e] = base_exp(f);
        for (size_t i = 0; i < bases.size(); ++i) {
            if (bases[i].equals(b)) {
                exps[i] = exps[i] + e;
                return;
            }
        }
        bases.push_back(b);
        exps.push_back(e);
    };

    for (const Expr& f : factors) {
        if (f.kind() == ExprKind::Mul) {
            for (const Expr& g : f.args()) ingest_factor(g);
        } else {
            ingest_factor(f);
        }
    }

    if (coeff.is_zero()) return coeff.to_expr();

    std::vector<Expr> out;
    out.reserve(bases.size());
    for (size_t i = 0; i < bases.size(); ++i) {
        Expr p = Expr::pow(bases[i], exps[i]);
        if (p.is_one()) continue;
        if (p.is_const()) {
            coeff = coeff * ConstVal::of(p);
            continue;
        }
        // merged exponents may collapse to a fresh product, e.g. (x*y)^1
        if (p.kind() == ExprKind::Mul) {
            for (const Expr& g : p.args()) {
                if (g.is_const())
                    coeff = coeff * ConstVal::of(g);
                else
                    out.push_back(g);
            }
            continue;
        }
        out.push_back(std::move(p));
    }
    if (coeff.is_zero()) return coeff.to_expr();
    return assemble_mul(coeff, std::move(out));
}

Expr Expr::pow(Expr base, Expr exponent) {
    if (exponent.is_int(0)) return integer(1);
    if (exponent.is_int(1)) return base;
    if (base.kind() == ExprKind::FloatConst && exponent.is_const())
        return real(std::pow(base.fval(), exponent.const_value()));
    if (base.is_const() && exponent.kind() == ExprKind::FloatConst)
        return real(std::pow(base.const_value(), exponent.fval()));
    if (base.is_const() && exponent.kind() == ExprKind::IntConst)
        return rational(base.rat().pow(exponent.rat().num()));
    if (base.kind() == ExprKind::Mul && exponent.kind() == ExprKind::IntConst) {
        std::vector<Expr> fs;
        fs.reserve(base.args().size());
        for (const Expr& f : base.args()) fs.push_back(pow(f, exponent));
        return mul(std::move(fs));
    }
    if (base.kind() == ExprKind::Pow &&
        base.args()[1].kind() == ExprKind::IntConst &&
        exponent.kind() == ExprKind::IntConst) {
        return pow(base.args()[0],
                   rational(base.args()[1].rat() * exponent.rat()));
    }
    ExprNode n;
    n.kind = ExprKind::Pow;
    n.args = {std::move(base), std::move(exponent)};
    return wrap(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
    return Expr::add({a, Expr::mul({Expr::integer(-1), b})});
}
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
    // built ahead of the factor list: a zero divisor throws here, and g++ 11
    // leaks list elements constructed before a throwing one
    Expr inverse = Expr::pow(b, Expr::integer(-1));
    return Expr::mul({a, std::move(inverse)});
}
Expr operator-(const Expr& a) { return Expr::mul({Expr::integer(-1), a}); }

// ---------------------------------------------------------------------------

Expr simplify(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
        case ExprKind::FloatConst:
        case ExprKind::Symbol:
            return e;
        case ExprKind::FunctionApp:
        case ExprKind::Indexed: {
            std::vector<Expr> args;
            args.reserve(e.args().size());
            for (const Expr& a : e.args()) args.push_back(simplify(a));
            return e.kind() == ExprKind::FunctionApp
                       ? Expr::func(e.name(), std::move(args))
                       : Expr::indexed(e.name(), std::move(args));
        }
        case ExprKind::Add: {
            std::vector<Expr> ts;
            ts.reserve(e.args().size());
            for (const Expr& a : e.args()) ts.push_back(simplify(a));
            return Expr::add(std::move(ts));
        }
        case ExprKind::Mul: {
            std::vector<Expr> fs;
            fs.reserve(e.args().size());
            for (const Expr& a : e.args()) fs.push_back(simplify(a));
            return Expr::mul(std::move(fs));
        }
        case ExprKind::Pow:
            return Expr::pow(simplify(e.args()[0]), simplify(e.args()[1]));
    }
    return e;
}

Expr expand(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Add: {
            std::vector<Expr> ts;
            ts.reserve(e.args().size());
            for (const Expr& t : e.args()) ts.push_back(expand(t));
            return Expr::add(std::move(ts));
        }
        case ExprKind::Mul: {
            std::vector<Expr> fs;
            fs.reserve(e.args().size());
            for (const Expr& f : e.args()) fs.push_back(expand(f));
            // distribute over the first Add factor, then recurse
            for (size_t i = 0; i < fs.size(); ++i) {
                if (fs[i].kind() != ExprKind::Add) continue;
                std::vector<Expr> terms;
                terms.reserve(fs[i].args().size());
                for (const Expr& t : fs[i].args()) {
                    std::vector<Expr> prod = fs;
                    prod[i] = t;
                    terms.push_back(Expr::mul(std::move(prod)));
                }
                return expand(Expr::add(std::move(terms)));
            }
            return Expr::mul(std::move(fs));
        }
        default:
            return e;
    }
}

// ---------------------------------------------------------------------------

namespace {

class SubstMapView {
  public:
    explicit SubstMapView(std::span<const std::pair<Expr, Expr>> mapping) {
        for (const auto& kv : mapping)
            slots_[kv.first.hash()].push_back(&kv);
    }

    const Expr* find(const Expr& e) const {
        auto it = slots_.find(e.hash());
        if (it == slots_.end()) return nullptr;
        for (const auto* kv : it->second)
            if (kv->first.equals(e)) return &kv->second;
        return nullptr;
    }

  private:
    std::unordered_map<uint64_t,
                       std::vector<const std::pair<Expr, Expr>*>>
        slots_;
};

Expr substitute_walk(const Expr& e, const SubstMapView& map) {
    if (const Expr* v = map.find(e)) return *v;
    switch (e.kind()) {
        case ExprKind::FunctionApp:
        case ExprKind::Indexed: {
            std::vector<Expr> args;
            args.reserve(e.args().size());
            for (const Expr& a : e.args()) args.push_back(substitute_walk(a, map));
            return e.kind() == ExprKind::FunctionApp
                       ? Expr::func(e.name(), std::move(args))
                       : Expr::indexed(e.name(), std::move(args));
        }
        case ExprKind::Add: {
            std::vector<Expr> ts;
            ts.reserve(e.args().size());
            for (const Expr& a : e.args()) ts.push_back(substitute_walk(a, map));
            return Expr::add(std::move(ts));
        }
        case ExprKind::Mul: {
            std::vector<Expr> fs;
            fs.reserve(e.args().size());
            for (const Expr& a : e.args()) fs.push_back(substitute_walk(a, map));
            return Expr::mul(std::move(fs));
        }
        case ExprKind::Pow:
            return Expr::pow(substitute_walk(e.args()[0], map),
                             substitute_walk(e.args()[1], map));
        default:
            return e;
    }
}

} // namespace

Expr substitute(const Expr& e, std::span<const std::pair<Expr, Expr>> mapping) {
    SubstMapView map(mapping);
    return simplify(substitute_walk(e, map));
}

Expr substitute(const Expr& e, const Expr& key, const Expr& value) {
    std::pair<Expr, Expr> kv{key, value};
    return substitute(e, std::span(&kv, 1));
}

// ---------------------------------------------------------------------------

bool contains(const Expr& e, const Expr& sub) {
    if (e.equals(sub)) return true;
    for (const Expr& a : e.args())
        if (contains(a, sub)) return true;
    return false;
}

Expr solve_linear(const Eqn& eq, const Expr& target) {
    Expr diff = expand(simplify(eq.lhs - eq.rhs));

    std::vector<Expr> coeff_terms;
    std::vector<Expr> rest_terms;

    auto classify = [&](const Expr& term) {
        if (!contains(term, target)) {
            rest_terms.push_back(term);
            return;
        }
        if (term.equals(target)) {
            coeff_terms.push_back(Expr::integer(1));
            return;
        }
        if (term.kind() == ExprKind::Mul) {
            std::vector<Expr> others;
            int hits = 0;
            for (const Expr& f : term.args()) {
                if (f.equals(target)) {
                    ++hits;
                    continue;
                }
                if (contains(f, target))
                    throw NotAffineError("target occurs inside " +
                                         to_string(f));
                others.push_back(f);
            }
            if (hits != 1)
                throw NotAffineError("target occurs nonlinearly in " +
                                     to_string(term));
            coeff_terms.push_back(Expr::mul(std::move(others)));
            return;
        }
        throw NotAffineError("target occurs nonlinearly in " + to_string(term));
    };

    if (diff.kind() == ExprKind::Add) {
        for (const Expr& t : diff.args()) classify(t);
    } else {
        classify(diff);
    }

    Expr a = simplify(Expr::add(std::move(coeff_terms)));
    if (a.is_zero())
        throw SingularCoefficientError("coefficient of target vanishes");
    Expr b = Expr::add(std::move(rest_terms));
    Expr solution = Expr::mul(
        {Expr::integer(-1), b, Expr::pow(a, Expr::integer(-1))});
    return simplify(expand(solution));
}

long count_ops(const Expr& e) {
    long n = 0;
    switch (e.kind()) {
        case ExprKind::Add:
        case ExprKind::Mul:
            n += static_cast<long>(e.args().size()) - 1;
            break;
        case ExprKind::Pow:
            n += 1;
            break;
        default:
            break;
    }
    for (const Expr& a : e.args()) n += count_ops(a);
    return n;
}

namespace {

void atoms_walk(const Expr& e, std::vector<Expr>& out) {
    switch (e.kind()) {
        case ExprKind::Symbol:
        case ExprKind::FunctionApp:
        case ExprKind::Indexed:
            for (const Expr& a : out)
                if (a.equals(e)) return;
            out.push_back(e);
            return;
        default:
            for (const Expr& a : e.args()) atoms_walk(a, out);
    }
}

} // namespace

std::vector<Expr> atoms(const Expr& e) {
    std::vector<Expr> out;
    atoms_walk(e, out);
    return out;
}

std::vector<std::string> free_symbols(const Expr& e) {
    std::vector<std::string> out;
    std::vector<const ExprNode*> stack{e.node()};
    while (!stack.empty()) {
        const ExprNode* n = stack.back();
        stack.pop_back();
        if (n->kind == ExprKind::Symbol) {
            if (std::find(out.begin(), out.end(), n->name) == out.end())
                out.push_back(n->name);
        }
        for (const Expr& a : n->args) stack.push_back(a.node());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Printer.

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string print_expr(const Expr& e);

bool exponent_is_negative_const(const Expr& e) {
    return e.is_const() && ConstVal::of(e).is_negative();
}

std::string print_base(const Expr& b) {
    switch (b.kind()) {
        case ExprKind::Symbol:
        case ExprKind::FunctionApp:
        case ExprKind::Indexed:
            return print_expr(b);
        case ExprKind::IntConst:
            if (!(b.rat() < Rational(0))) return print_expr(b);
            [[fallthrough]];
        default:
            return "(" + print_expr(b) + ")";
    }
}

std::string print_exponent(const Expr& e) {
    if (e.kind() == ExprKind::Symbol ||
        (e.kind() == ExprKind::IntConst && !(e.rat() < Rational(0))))
        return print_expr(e);
    return "(" + print_expr(e) + ")";
}

std::string print_pow(const Expr& base, const Expr& exp) {
    return print_base(base) + "**" + print_exponent(exp);
}

std::string print_factor(const Expr& f) {
    if (f.kind() == ExprKind::Add) return "(" + print_expr(f) + ")";
    if (f.kind() == ExprKind::Pow) return print_pow(f.args()[0], f.args()[1]);
    return print_expr(f);
}

// One additive term: sign handled by the caller, magnitude printed here.
std::string print_term_magnitude(const ConstVal& coeff,
                                 std::span<const Expr> rest) {
    std::vector<std::string> num;
    std::vector<std::string> den;

    ConstVal c = coeff.is_negative() ? coeff.neg() : coeff;
    std::string cnum, cden;
    if (c.is_float) {
        if (c.f != 1.0 || rest.empty()) cnum = format_double(c.f);
    } else {
        if (c.r.num() != 1 || rest.empty()) cnum = std::to_string(c.r.num());
        if (c.r.den() != 1) cden = std::to_string(c.r.den());
    }
    if (!cnum.empty()) num.push_back(cnum);
    if (!cden.empty()) den.push_back(cden);

    for (const Expr& f : rest) {
        auto [b, ex] = base_exp(f);
        if (exponent_is_negative_const(ex)) {
            Expr flipped = ex.kind() == ExprKind::FloatConst
                               ? Expr::real(-ex.fval())
                               : Expr::rational(-ex.rat());
            den.push_back(flipped.is_one() ? print_base(b)
                                           : print_pow(b, flipped));
        } else {
            num.push_back(print_factor(f));
        }
    }

    std::string out;
    if (num.empty()) {
        out = "1";
    } else {
        for (size_t i = 0; i < num.size(); ++i) {
            if (i) out += "*";
            out += num[i];
        }
    }
    if (!den.empty()) {
        if (den.size() == 1) {
            out += "/" + den[0];
        } else {
            out += "/(";
            for (size_t i = 0; i < den.size(); ++i) {
                if (i) out += "*";
                out += den[i];
            }
            out += ")";
        }
    }
    return out;
}

std::string print_term(const Expr& t, bool leading) {
    auto [coeff, rest] = as_coeff_rest(t);
    std::string mag = print_term_magnitude(coeff, rest);
    if (leading) return coeff.is_negative() ? "-" + mag : mag;
    return (coeff.is_negative() ? " - " : " + ") + mag;
}

std::string print_expr(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
            return e.rat().str();
        case ExprKind::FloatConst:
            return format_double(e.fval());
        case ExprKind::Symbol:
            return e.name();
        case ExprKind::FunctionApp: {
            std::string out = e.name() + "(";
            for (size_t i = 0; i < e.args().size(); ++i) {
                if (i) out += ", ";
                out += print_expr(e.args()[i]);
            }
            return out + ")";
        }
        case ExprKind::Indexed: {
            std::string out = e.name() + "[";
            for (size_t i = 0; i < e.args().size(); ++i) {
                if (i) out += ", ";
                out += print_expr(e.args()[i]);
            }
            return out + "]";
        }
        case ExprKind::Add: {
            std::string out;
            for (size_t i = 0; i < e.args().size(); ++i)
                out += print_term(e.args()[i], i == 0);
            return out;
        }
        case ExprKind::Mul:
            return print_term(e, true);
        case ExprKind::Pow:
            if (exponent_is_negative_const(e.args()[1]))
                return print_term(e, true);
            return print_pow(e.args()[0], e.args()[1]);
    }
    return "?";
}

} // namespace

std::string to_string(const Expr& e) { return print_expr(e); }

std::string to_string(const Eqn& eq) {
    return "Eq(" + to_string(eq.lhs) + ", " + to_string(eq.rhs) + ")";
}

// ---------------------------------------------------------------------------
// Evaluation.

void EvalEnv::bind(const Expr& atom, double value) {
    auto& bucket = slots_[atom.hash()];
    for (auto& kv : bucket) {
        if (kv.first.equals(atom)) {
            kv.second = value;
            return;
        }
    }
    bucket.emplace_back(atom, value);
}

const double* EvalEnv::lookup(const Expr& atom) const {
    auto it = slots_.find(atom.hash());
    if (it == slots_.end()) return nullptr;
    for (const auto& kv : it->second)
        if (kv.first.equals(atom)) return &kv.second;
    return nullptr;
}

namespace {

// Deterministic stand-in value for an unbound function application: a smooth
// function of the evaluated arguments with name-derived coefficients, so
// different spellings of the same quantity agree to rounding error.
double phantom_value(const std::string& name, std::span<const double> args) {
    uint64_t h = hash_str(name);
    double acc = static_cast<double>(h % 6283u) / 1000.0;
    for (size_t i = 0; i < args.size(); ++i) {
        h = hash_mix(h, i + 1);
        double k = 1.0 + static_cast<double>(h % 1000u) / 1000.0;
        acc += k * args[i];
    }
    return std::sin(acc);
}

} // namespace

double eval(const Expr& e, const EvalEnv& env) {
    if (const double* v = env.lookup(e)) return *v;
    switch (e.kind()) {
        case ExprKind::IntConst:
        case ExprKind::RationalConst:
            return e.rat().to_double();
        case ExprKind::FloatConst:
            return e.fval();
        case ExprKind::Symbol:
            throw UnknownSymbolError("unbound symbol in eval: " + e.name());
        case ExprKind::FunctionApp:
        case ExprKind::Indexed: {
            std::vector<double> args;
            args.reserve(e.args().size());
            for (const Expr& a : e.args()) args.push_back(eval(a, env));
            return phantom_value(e.name(), args);
        }
        case ExprKind::Add: {
            double acc = 0.0;
            for (const Expr& a : e.args()) acc += eval(a, env);
            return acc;
        }
        case ExprKind::Mul: {
            double acc = 1.0;
            for (const Expr& a : e.args()) acc *= eval(a, env);
            return acc;
        }
        case ExprKind::Pow: {
            double b = eval(e.args()[0], env);
            const Expr& ex = e.args()[1];
            if (ex.kind() == ExprKind::IntConst) {
                long long n = ex.rat().num();
                bool inv = n < 0;
                if (inv) n = -n;
                double acc = 1.0;
                for (long long i = 0; i < n; ++i) acc *= b;
                return inv ? 1.0 / acc : acc;
            }
            return std::pow(b, eval(ex, env));
        }
    }
    return 0.0;
}

} // namespace sf
