#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kwb {

// Semantic failure: invalid model, inadmissible logic, broken precondition.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text (formula or file).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t pos);
    std::size_t position() const { return pos_; }

private:
    std::size_t pos_;
};

struct Signature {
    std::map<std::string, int> preds;
    std::set<std::string> consts;
    bool equality = false;

    bool has_pred(const std::string& p) const { return preds.count(p) != 0; }
    bool has_const(const std::string& c) const { return consts.count(c) != 0; }
    // Subsignature test; equality counts as a symbol.
    bool includes(const Signature& sub) const;
    // Throws Error when an arity is < 1 or a name is both predicate and constant.
    void check() const;

    friend bool operator==(const Signature&, const Signature&) = default;
};

Signature signature_union(const Signature& a, const Signature& b);

struct Term {
    bool is_const = false;
    std::string name;

    static Term var(std::string n) { return {false, std::move(n)}; }
    static Term cnst(std::string n) { return {true, std::move(n)}; }
    friend auto operator<=>(const Term&, const Term&) = default;
};

enum class Op { Atom, Eq, Bottom, And, Or, Implies, Forall, Exists };

class Formula {
public:
    Formula();  // _|_

    static Formula atom(std::string pred, std::vector<Term> args);
    static Formula eq(Term l, Term r);
    static Formula bottom();
    static Formula conj(Formula a, Formula b);
    static Formula disj(Formula a, Formula b);
    static Formula implies(Formula a, Formula b);
    static Formula forall(std::string var, Formula body);
    static Formula exists(std::string var, Formula body);
    static Formula neg(Formula a) { return implies(std::move(a), bottom()); }
    static Formula iff(const Formula& a, const Formula& b);
    static Formula top() { return neg(bottom()); }
    static Formula binary(Op op, Formula a, Formula b);
    static Formula quant(Op op, std::string var, Formula body);

    Op op() const;
    // Predicate name for atoms, bound variable for quantifiers.
    const std::string& name() const;
    const std::vector<Term>& terms() const;
    const Formula& lhs() const;
    const Formula& rhs() const;
    const Formula& body() const { return lhs(); }

    bool is_binary() const { return op() == Op::And || op() == Op::Or || op() == Op::Implies; }
    bool is_quant() const { return op() == Op::Forall || op() == Op::Exists; }
    bool is_atomic() const { return op() == Op::Atom || op() == Op::Eq || op() == Op::Bottom; }
    // Implies(x, Bottom)
    bool is_negation() const;

    std::size_t size() const;

    friend bool operator==(const Formula& a, const Formula& b);
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }
    friend bool operator<(const Formula& a, const Formula& b);

private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
    std::shared_ptr<const Node> n_;
};

Formula parse_formula(const std::string& text, const Signature& sig);
std::string print_formula(const Formula& f);

std::set<std::string> free_vars(const Formula& f);
std::set<std::string> bound_vars(const Formula& f);
bool is_sentence(const Formula& f);
int rank(const Formula& f);
Signature minimal_signature(const Formula& f);
// Throws Error naming the first symbol of f missing from sig.
void check_formula(const Formula& f, const Signature& sig);

using VarConst = std::vector<std::pair<std::string, std::string>>;

// Simultaneous replacement of free x_i by c_i.
Formula substitute_constants(const Formula& f, const VarConst& binding);
// Replacement of constant c_i by variable y_i; binding pairs are (const, var).
Formula abstract_constants(const Formula& f, const VarConst& binding);
Formula quantify_constant(const Formula& f, const std::string& c, Op kind);

struct RenamingMap {
    std::map<std::string, std::string> preds;
    std::map<std::string, std::string> consts;

    RenamingMap inverse() const;
    static RenamingMap identity(const Signature& sig);
};

// Throws Error when r is not an arity-preserving bijection covering sig.
Signature rename_signature(const RenamingMap& r, const Signature& sig);
Formula rename_formula(const RenamingMap& r, const Formula& f);

// Smallest name in prefix1, prefix2, ... not in used.
std::string fresh_name(const std::string& prefix, const std::set<std::string>& used);
std::vector<std::string> fresh_names(const std::string& prefix, std::size_t n, std::set<std::string> used);

// Flattens ∧/∨, sorts and dedupes their operands, rebuilds left-nested.
Formula normalize(const Formula& f);

}  // namespace kwb
