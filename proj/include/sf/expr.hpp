#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sf/rational.hpp"

namespace sf {

enum class ExprKind : uint8_t {
    IntConst,
    RationalConst,
    FloatConst,
    Symbol,
    FunctionApp,
    Indexed,
    Add,
    Mul,
    Pow,
};

class Expr;
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    Rational rat;          // IntConst / RationalConst payload
    double fval = 0.0;     // FloatConst payload
    std::string name;      // Symbol / FunctionApp name, Indexed base
    std::vector<Expr> args; // children (terms, factors, arguments, indices)
    uint64_t hash = 0;
};

// Immutable symbolic expression. Factory constructors canonicalize eagerly:
// Add/Mul flattened and sorted, constants folded exactly, Pow(x,1) collapsed.
// The *_raw builders skip canonicalization so tests can exercise simplify().
class Expr {
  public:
    Expr(); // integer zero

    static Expr integer(long long v);
    static Expr rational(const Rational& r);
    static Expr rational(long long num, long long den);
    static Expr real(double v);
    static Expr symbol(std::string name);
    static Expr func(std::string name, std::vector<Expr> args);
    static Expr indexed(std::string base, std::vector<Expr> indices);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(Expr base, Expr exponent);

    static Expr add_raw(std::vector<Expr> terms);
    static Expr mul_raw(std::vector<Expr> factors);
    static Expr pow_raw(Expr base, Expr exponent);

    ExprKind kind() const { return node_->kind; }
    const std::string& name() const { return node_->name; }
    const std::vector<Expr>& args() const { return node_->args; }
    const Rational& rat() const { return node_->rat; }
    double fval() const { return node_->fval; }
    uint64_t hash() const { return node_->hash; }

    bool is_const() const;
    bool is_zero() const;
    bool is_one() const;
    bool is_int(long long v) const;
    // Numeric value of a constant node (exact constants widened to double).
    double const_value() const;

    bool equals(const Expr& other) const;

    const ExprNode* node() const { return node_.get(); }

  private:
    explicit Expr(ExprPtr p) : node_(std::move(p)) {}
    static Expr wrap(ExprNode n);
    friend ExprPtr detail_make_node(ExprNode n);
    friend Expr detail_wrap(ExprPtr p);

    ExprPtr node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

struct Eqn {
    Expr lhs;
    Expr rhs;
};

// Deterministic total order used for canonical term/factor placement.
int compare(const Expr& a, const Expr& b);

// Recanonicalize a tree built through the *_raw constructors.
Expr simplify(const Expr& e);

// Distribute products over sums until no Mul has an Add factor.
Expr expand(const Expr& e);

// Simultaneous replacement of maximal subtrees; values are not rescanned.
Expr substitute(const Expr& e, std::span<const std::pair<Expr, Expr>> mapping);
Expr substitute(const Expr& e, const Expr& key, const Expr& value);

// Solve an equation affine in `target` for `target`.
Expr solve_linear(const Eqn& eq, const Expr& target);

// Number of arithmetic nodes: Add/Mul contribute arity-1, Pow contributes 1.
long count_ops(const Expr& e);

bool contains(const Expr& e, const Expr& sub);

// Distinct non-arithmetic leaves (symbols, function applications, indexed
// accesses), outermost first, deterministic order of first appearance.
std::vector<Expr> atoms(const Expr& e);
std::vector<std::string> free_symbols(const Expr& e);

// Infix form matching the conventional symbolic-python notation, e.g.
//   -2*f(x, y)/h**2 + f(-h + x, y)/h**2 + f(h + x, y)/h**2
std::string to_string(const Expr& e);
std::string to_string(const Eqn& eq);

// Point evaluation. Symbols must be bound; unbound function applications and
// indexed accesses evaluate to a deterministic pseudorandom value of their
// name and evaluated arguments, so structurally different spellings of the
// same quantity agree.
class EvalEnv {
  public:
    void bind(const Expr& atom, double value);
    const double* lookup(const Expr& atom) const;

  private:
    std::unordered_map<uint64_t, std::vector<std::pair<Expr, double>>> slots_;
};

double eval(const Expr& e, const EvalEnv& env);

struct ExprHash {
    size_t operator()(const Expr& e) const { return e.hash(); }
};
struct ExprEq {
    bool operator()(const Expr& a, const Expr& b) const { return a.equals(b); }
};

} // namespace sf
