#include "kwb/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace kwb {

ParseError::ParseError(const std::string& msg, std::size_t pos)
    : Error("parse error at " + std::to_string(pos) + ": " + msg), pos_(pos) {}

bool Signature::includes(const Signature& sub) const {
    if (sub.equality && !equality) return false;
    for (const auto& [p, n] : sub.preds) {
        auto it = preds.find(p);
        if (it == preds.end() || it->second != n) return false;
    }
    return std::includes(consts.begin(), consts.end(), sub.consts.begin(), sub.consts.end());
}

void Signature::check() const {
    for (const auto& [p, n] : preds) {
        if (n < 1) throw Error("predicate " + p + " has arity " + std::to_string(n) + " (must be >= 1)");
        if (consts.count(p)) throw Error("name " + p + " is both a predicate and a constant");
    }
}

Signature signature_union(const Signature& a, const Signature& b) {
    Signature s = a;
    for (const auto& [p, n] : b.preds) {
        auto [it, fresh] = s.preds.emplace(p, n);
        if (!fresh && it->second != n) throw Error("predicate " + p + " used with two arities");
    }
    s.consts.insert(b.consts.begin(), b.consts.end());
    s.equality = a.equality || b.equality;
    return s;
}

// ---------------------------------------------------------------- AST

struct Formula::Node {
    Op op;
    std::string name;
    std::vector<Term> terms;
    Formula a, b;
    std::size_t size = 1;
};

Formula::Formula() = default;

namespace {
const std::vector<Term> kNoTerms;
const std::string kNoName;
const Formula kBottom;
}  // namespace

Formula Formula::atom(std::string pred, std::vector<Term> args) {
    auto n = std::make_shared<Node>();
    n->op = Op::Atom;
    n->name = std::move(pred);
    n->terms = std::move(args);
    return Formula(std::move(n));
}

Formula Formula::eq(Term l, Term r) {
    auto n = std::make_shared<Node>();
    n->op = Op::Eq;
    n->terms = {std::move(l), std::move(r)};
    return Formula(std::move(n));
}

Formula Formula::bottom() { return Formula(); }

Formula Formula::binary(Op op, Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->size = 1 + a.size() + b.size();
    n->a = std::move(a);
    n->b = std::move(b);
    return Formula(std::move(n));
}

Formula Formula::quant(Op op, std::string var, Formula body) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->name = std::move(var);
    n->size = 1 + body.size();
    n->a = std::move(body);
    return Formula(std::move(n));
}

Formula Formula::conj(Formula a, Formula b) { return binary(Op::And, std::move(a), std::move(b)); }
Formula Formula::disj(Formula a, Formula b) { return binary(Op::Or, std::move(a), std::move(b)); }
Formula Formula::implies(Formula a, Formula b) { return binary(Op::Implies, std::move(a), std::move(b)); }
Formula Formula::forall(std::string v, Formula body) { return quant(Op::Forall, std::move(v), std::move(body)); }
Formula Formula::exists(std::string v, Formula body) { return quant(Op::Exists, std::move(v), std::move(body)); }
Formula Formula::iff(const Formula& a, const Formula& b) { return conj(implies(a, b), implies(b, a)); }

Op Formula::op() const { return n_ ? n_->op : Op::Bottom; }
const std::string& Formula::name() const { return n_ ? n_->name : kNoName; }
const std::vector<Term>& Formula::terms() const { return n_ ? n_->terms : kNoTerms; }
const Formula& Formula::lhs() const { return n_ ? n_->a : kBottom; }
const Formula& Formula::rhs() const { return n_ ? n_->b : kBottom; }
std::size_t Formula::size() const { return n_ ? n_->size : 1; }
bool Formula::is_negation() const { return op() == Op::Implies && rhs().op() == Op::Bottom; }

namespace {
int compare(const Formula& x, const Formula& y) {
    if (x.op() != y.op()) return x.op() < y.op() ? -1 : 1;
    switch (x.op()) {
    case Op::Bottom:
        return 0;
    case Op::Atom:
    case Op::Eq:
        if (int c = x.name().compare(y.name())) return c < 0 ? -1 : 1;
        if (x.terms() != y.terms()) return x.terms() < y.terms() ? -1 : 1;
        return 0;
    case Op::Forall:
    case Op::Exists:
        if (int c = x.name().compare(y.name())) return c < 0 ? -1 : 1;
        return compare(x.body(), y.body());
    default:
        if (int c = compare(x.lhs(), y.lhs())) return c;
        return compare(x.rhs(), y.rhs());
    }
}
}  // namespace

bool operator==(const Formula& a, const Formula& b) { return compare(a, b) == 0; }
bool operator<(const Formula& a, const Formula& b) { return compare(a, b) < 0; }

// ---------------------------------------------------------------- lexer/parser

namespace {

enum class Tok { Ident, LParen, RParen, Comma, Dot, Amp, Bar, Arrow, Iff, Tilde, Equals, Bottom, Forall, Exists, End };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t p = i;
        if (s.compare(i, 3, "_|_") == 0) {
            out.push_back({Tok::Bottom, "_|_", p});
            i += 3;
        } else if (s.compare(i, 3, "<->") == 0) {
            out.push_back({Tok::Iff, "<->", p});
            i += 3;
        } else if (s.compare(i, 2, "->") == 0) {
            out.push_back({Tok::Arrow, "->", p});
            i += 2;
        } else if (ident_start(c)) {
            std::size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            std::string w = s.substr(i, j - i);
            Tok k = w == "forall" ? Tok::Forall : w == "exists" ? Tok::Exists : Tok::Ident;
            out.push_back({k, w, p});
            i = j;
        } else {
            Tok k;
            switch (c) {
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case ',': k = Tok::Comma; break;
            case '.': k = Tok::Dot; break;
            case '&': k = Tok::Amp; break;
            case '|': k = Tok::Bar; break;
            case '~': k = Tok::Tilde; break;
            case '=': k = Tok::Equals; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", p);
            }
            out.push_back({k, std::string(1, c), p});
            ++i;
        }
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

class Parser {
public:
    Parser(const std::string& text, const Signature& sig) : toks_(lex(text)), sig_(sig) {}

    Formula run() {
        Formula f = iff();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
        return f;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const Signature& sig_;

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }
    void expect(Tok k, const char* what) {
        if (peek().kind != k) fail(std::string("expected ") + what);
        next();
    }

    Formula iff() {
        Formula f = implication();
        if (peek().kind == Tok::Iff) {
            next();
            f = Formula::iff(f, implication());
        }
        return f;
    }

    Formula implication() {
        Formula f = disjunction();
        if (peek().kind == Tok::Arrow) {
            next();
            return Formula::implies(f, implication());
        }
        return f;
    }

    Formula disjunction() {
        Formula f = conjunction();
        while (peek().kind == Tok::Bar) {
            next();
            f = Formula::disj(f, conjunction());
        }
        return f;
    }

    Formula conjunction() {
        Formula f = unary();
        while (peek().kind == Tok::Amp) {
            next();
            f = Formula::conj(f, unary());
        }
        return f;
    }

    Formula unary() {
        switch (peek().kind) {
        case Tok::Tilde:
            next();
            return Formula::neg(unary());
        case Tok::Forall:
        case Tok::Exists: {
            Op op = next().kind == Tok::Forall ? Op::Forall : Op::Exists;
            if (peek().kind != Tok::Ident) fail("expected variable after quantifier");
            const Token& v = next();
            if (sig_.has_const(v.text)) throw ParseError("cannot quantify constant " + v.text, v.pos);
            if (sig_.has_pred(v.text)) throw ParseError("cannot quantify predicate " + v.text, v.pos);
            expect(Tok::Dot, "'.' after quantified variable");
            return Formula::quant(op, v.text, iff());
        }
        default:
            return primary();
        }
    }

    Term term() {
        if (peek().kind != Tok::Ident) fail("expected term");
        const Token& t = next();
        if (sig_.has_pred(t.text)) throw ParseError("predicate " + t.text + " used as a term", t.pos);
        return sig_.has_const(t.text) ? Term::cnst(t.text) : Term::var(t.text);
    }

    Formula primary() {
        const Token& t = peek();
        if (t.kind == Tok::Bottom) {
            next();
            return Formula::bottom();
        }
        if (t.kind == Tok::LParen) {
            next();
            Formula f = iff();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (t.kind != Tok::Ident) fail("expected formula");
        if (peek(1).kind == Tok::LParen) {
            const Token& p = next();
            next();
            auto it = sig_.preds.find(p.text);
            if (it == sig_.preds.end()) throw ParseError("unknown predicate " + p.text, p.pos);
            std::vector<Term> args{term()};
            while (peek().kind == Tok::Comma) {
                next();
                args.push_back(term());
            }
            expect(Tok::RParen, "')' closing argument list");
            if (static_cast<int>(args.size()) != it->second)
                throw ParseError("predicate " + p.text + " expects " + std::to_string(it->second) + " arguments, got " +
                                     std::to_string(args.size()),
                                 p.pos);
            return Formula::atom(p.text, std::move(args));
        }
        if (peek(1).kind == Tok::Equals) {
            std::size_t pos = t.pos;
            if (!sig_.equality) throw ParseError("equality not in language", pos);
            Term l = term();
            next();
            return Formula::eq(std::move(l), term());
        }
        if (sig_.has_pred(t.text)) fail("predicate " + t.text + " needs arguments");
        fail("arity-0 predicate or stray term '" + t.text + "'");
    }
};

// Printing. Quantifiers extend to the right, so they print bare only at the
// right edge of their enclosing context.
void print(const Formula& f, int ctx, bool rightmost, std::string& out) {
    auto terms = [&](const std::vector<Term>& ts) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i) out += ",";
            out += ts[i].name;
        }
    };
    switch (f.op()) {
    case Op::Bottom:
        out += "_|_";
        return;
    case Op::Atom:
        out += f.name();
        out += "(";
        terms(f.terms());
        out += ")";
        return;
    case Op::Eq:
        out += f.terms()[0].name + " = " + f.terms()[1].name;
        return;
    case Op::Forall:
    case Op::Exists: {
        if (!rightmost) out += "(";
        out += f.op() == Op::Forall ? "forall " : "exists ";
        out += f.name() + ". ";
        print(f.body(), 0, true, out);
        if (!rightmost) out += ")";
        return;
    }
    default:
        break;
    }
    if (f.is_negation()) {
        out += "~";
        print(f.lhs(), 4, rightmost, out);
        return;
    }
    int prec = f.op() == Op::Implies ? 1 : f.op() == Op::Or ? 2 : 3;
    bool paren = prec < ctx;
    bool rm = paren || rightmost;
    if (paren) out += "(";
    const char* sym = f.op() == Op::Implies ? " -> " : f.op() == Op::Or ? " | " : " & ";
    print(f.lhs(), prec + 1, false, out);
    out += sym;
    print(f.rhs(), f.op() == Op::Implies ? prec : prec + 1, rm, out);
    if (paren) out += ")";
}

}  // namespace

Formula parse_formula(const std::string& text, const Signature& sig) { return Parser(text, sig).run(); }

std::string print_formula(const Formula& f) {
    std::string out;
    print(f, 0, true, out);
    return out;
}

// ---------------------------------------------------------------- structure

namespace {

void walk_vars(const Formula& f, std::set<std::string>& bound_now, std::set<std::string>* fv, std::set<std::string>* bv) {
    switch (f.op()) {
    case Op::Bottom:
        return;
    case Op::Atom:
    case Op::Eq:
        if (fv)
            for (const auto& t : f.terms())
                if (!t.is_const && !bound_now.count(t.name)) fv->insert(t.name);
        return;
    case Op::Forall:
    case Op::Exists: {
        if (bv) bv->insert(f.name());
        bool added = bound_now.insert(f.name()).second;
        walk_vars(f.body(), bound_now, fv, bv);
        if (added) bound_now.erase(f.name());
        return;
    }
    default:
        walk_vars(f.lhs(), bound_now, fv, bv);
        walk_vars(f.rhs(), bound_now, fv, bv);
    }
}

// Names of all variable occurrences, free or bound.
std::set<std::string> all_vars(const Formula& f) {
    std::set<std::string> fv, bv, scratch;
    walk_vars(f, scratch, &fv, &bv);
    fv.insert(bv.begin(), bv.end());
    return fv;
}

}  // namespace

std::set<std::string> free_vars(const Formula& f) {
    std::set<std::string> fv, scratch;
    walk_vars(f, scratch, &fv, nullptr);
    return fv;
}

std::set<std::string> bound_vars(const Formula& f) {
    std::set<std::string> bv, scratch;
    walk_vars(f, scratch, nullptr, &bv);
    return bv;
}

bool is_sentence(const Formula& f) { return free_vars(f).empty(); }

int rank(const Formula& f) {
    switch (f.op()) {
    case Op::Atom:
    case Op::Eq:
    case Op::Bottom:
        return 0;
    case Op::And:
    case Op::Or:
        return std::max(rank(f.lhs()), rank(f.rhs()));
    case Op::Implies:
        return 1 + std::max(rank(f.lhs()), rank(f.rhs()));
    default:
        return 1 + rank(f.body());
    }
}

Signature minimal_signature(const Formula& f) {
    Signature s;
    std::function<void(const Formula&)> go = [&](const Formula& g) {
        switch (g.op()) {
        case Op::Bottom:
            return;
        case Op::Atom:
            s.preds[g.name()] = static_cast<int>(g.terms().size());
            [[fallthrough]];
        case Op::Eq:
            if (g.op() == Op::Eq) s.equality = true;
            for (const auto& t : g.terms())
                if (t.is_const) s.consts.insert(t.name);
            return;
        case Op::Forall:
        case Op::Exists:
            go(g.body());
            return;
        default:
            go(g.lhs());
            go(g.rhs());
        }
    };
    go(f);
    return s;
}

void check_formula(const Formula& f, const Signature& sig) {
    Signature m = minimal_signature(f);
    if (m.equality && !sig.equality) throw Error("equality not in language");
    for (const auto& [p, n] : m.preds) {
        auto it = sig.preds.find(p);
        if (it == sig.preds.end()) throw Error("unknown predicate " + p);
        if (it->second != n) throw Error("arity mismatch for " + p);
    }
    for (const auto& c : m.consts)
        if (!sig.has_const(c)) throw Error("unknown constant " + c);
}

namespace {

Formula map_terms(const Formula& f, const std::function<Term(const Term&, const std::set<std::string>&)>& fn,
                  std::set<std::string>& bound) {
    switch (f.op()) {
    case Op::Bottom:
        return f;
    case Op::Atom:
    case Op::Eq: {
        std::vector<Term> ts;
        for (const auto& t : f.terms()) ts.push_back(fn(t, bound));
        if (f.op() == Op::Eq) return Formula::eq(ts[0], ts[1]);
        return Formula::atom(f.name(), std::move(ts));
    }
    case Op::Forall:
    case Op::Exists: {
        bool added = bound.insert(f.name()).second;
        Formula b = map_terms(f.body(), fn, bound);
        if (added) bound.erase(f.name());
        return Formula::quant(f.op(), f.name(), std::move(b));
    }
    default:
        return Formula::binary(f.op(), map_terms(f.lhs(), fn, bound), map_terms(f.rhs(), fn, bound));
    }
}

}  // namespace

Formula substitute_constants(const Formula& f, const VarConst& binding) {
    std::map<std::string, std::string> sub;
    Signature used = minimal_signature(f);
    auto vars = all_vars(f);
    for (const auto& [x, c] : binding) {
        if (!sub.emplace(x, c).second) throw Error("duplicate variable " + x + " in binding");
        if (used.has_const(c) || vars.count(c)) throw Error("constant " + c + " is not fresh for the formula");
    }
    std::set<std::string> bound;
    return map_terms(
        f,
        [&](const Term& t, const std::set<std::string>& b) {
            if (t.is_const || b.count(t.name)) return t;
            auto it = sub.find(t.name);
            return it == sub.end() ? t : Term::cnst(it->second);
        },
        bound);
}

Formula abstract_constants(const Formula& f, const VarConst& binding) {
    std::map<std::string, std::string> sub;
    auto fv = free_vars(f);
    auto bv = bound_vars(f);
    std::set<std::string> targets;
    for (const auto& [c, y] : binding) {
        if (bv.count(y)) throw Error("variable capture: " + y + " is bound in the formula");
        if (fv.count(y)) throw Error("variable " + y + " already free in the formula");
        if (!targets.insert(y).second) throw Error("duplicate target variable " + y);
        if (!sub.emplace(c, y).second) throw Error("duplicate constant " + c + " in binding");
    }
    std::set<std::string> bound;
    return map_terms(
        f,
        [&](const Term& t, const std::set<std::string>&) {
            if (!t.is_const) return t;
            auto it = sub.find(t.name);
            return it == sub.end() ? t : Term::var(it->second);
        },
        bound);
}

Formula quantify_constant(const Formula& f, const std::string& c, Op kind) {
    if (kind != Op::Forall && kind != Op::Exists) throw Error("quantify_constant needs forall or exists");
    std::set<std::string> used = all_vars(f);
    Signature s = minimal_signature(f);
    used.insert(s.consts.begin(), s.consts.end());
    for (const auto& [p, n] : s.preds) used.insert(p);
    std::string x = fresh_name("x", used);
    return Formula::quant(kind, x, abstract_constants(f, {{c, x}}));
}

RenamingMap RenamingMap::inverse() const {
    RenamingMap r;
    for (const auto& [a, b] : preds)
        if (!r.preds.emplace(b, a).second) throw Error("renaming is not injective on predicates at " + b);
    for (const auto& [a, b] : consts)
        if (!r.consts.emplace(b, a).second) throw Error("renaming is not injective on constants at " + b);
    return r;
}

RenamingMap RenamingMap::identity(const Signature& sig) {
    RenamingMap r;
    for (const auto& [p, n] : sig.preds) r.preds[p] = p;
    for (const auto& c : sig.consts) r.consts[c] = c;
    return r;
}

Signature rename_signature(const RenamingMap& r, const Signature& sig) {
    Signature out;
    out.equality = sig.equality;
    for (const auto& [p, n] : sig.preds) {
        auto it = r.preds.find(p);
        if (it == r.preds.end()) throw Error("renaming does not cover predicate " + p);
        if (!out.preds.emplace(it->second, n).second) throw Error("renaming not injective at predicate " + it->second);
    }
    for (const auto& c : sig.consts) {
        auto it = r.consts.find(c);
        if (it == r.consts.end()) throw Error("renaming does not cover constant " + c);
        if (!out.consts.insert(it->second).second) throw Error("renaming not injective at constant " + it->second);
    }
    out.check();
    return out;
}

Formula rename_formula(const RenamingMap& r, const Formula& f) {
    std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
        switch (g.op()) {
        case Op::Bottom:
            return g;
        case Op::Atom:
        case Op::Eq: {
            std::vector<Term> ts;
            for (const auto& t : g.terms()) {
                if (!t.is_const) {
                    ts.push_back(t);
                    continue;
                }
                auto it = r.consts.find(t.name);
                if (it == r.consts.end()) throw Error("renaming does not cover constant " + t.name);
                ts.push_back(Term::cnst(it->second));
            }
            if (g.op() == Op::Eq) return Formula::eq(ts[0], ts[1]);
            auto it = r.preds.find(g.name());
            if (it == r.preds.end()) throw Error("renaming does not cover predicate " + g.name());
            return Formula::atom(it->second, std::move(ts));
        }
        case Op::Forall:
        case Op::Exists:
            return Formula::quant(g.op(), g.name(), go(g.body()));
        default:
            return Formula::binary(g.op(), go(g.lhs()), go(g.rhs()));
        }
    };
    return go(f);
}

std::string fresh_name(const std::string& prefix, const std::set<std::string>& used) {
    for (std::size_t i = 1;; ++i) {
        std::string n = prefix + std::to_string(i);
        if (!used.count(n)) return n;
    }
}

std::vector<std::string> fresh_names(const std::string& prefix, std::size_t n, std::set<std::string> used) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(fresh_name(prefix, used));
        used.insert(out.back());
    }
    return out;
}

Formula normalize(const Formula& f) {
    switch (f.op()) {
    case Op::Atom:
    case Op::Eq:
    case Op::Bottom:
        return f;
    case Op::Forall:
    case Op::Exists:
        return Formula::quant(f.op(), f.name(), normalize(f.body()));
    case Op::Implies:
        return Formula::implies(normalize(f.lhs()), normalize(f.rhs()));
    default:
        break;
    }
    std::vector<Formula> parts;
    std::function<void(const Formula&)> flatten = [&](const Formula& g) {
        if (g.op() == f.op()) {
            flatten(g.lhs());
            flatten(g.rhs());
        } else {
            parts.push_back(normalize(g));
        }
    };
    flatten(f);
    std::sort(parts.begin(), parts.end());
    parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
    Formula out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out = Formula::binary(f.op(), out, parts[i]);
    return out;
}

}  // namespace kwb
