#include "kwb/semantics.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <unordered_set>

namespace kwb {

// ---------------------------------------------------------------- logics

ModelClass Logic::model_class() const {
    switch (id) {
    case LogicId::IL:
    case LogicId::ILeq: return ModelClass::Any;
    case LogicId::In:
    case LogicId::Ineq: return ModelClass::In;
    case LogicId::CD:
    case LogicId::CDeq: return ModelClass::Su;
    case LogicId::Bi:
    case LogicId::Bieq: return ModelClass::Bi;
    }
    return ModelClass::Any;
}

bool Logic::equality() const {
    return id == LogicId::ILeq || id == LogicId::Ineq || id == LogicId::CDeq || id == LogicId::Bieq;
}

std::string Logic::name() const {
    switch (id) {
    case LogicId::IL: return "IL";
    case LogicId::ILeq: return "ILeq";
    case LogicId::In: return "In";
    case LogicId::Ineq: return "Ineq";
    case LogicId::CD: return "CD";
    case LogicId::CDeq: return "CDeq";
    case LogicId::Bi: return "Bi";
    case LogicId::Bieq: return "Bieq";
    }
    return "?";
}

Logic Logic::parse(const std::string& s) {
    for (Logic l : all())
        if (l.name() == s) return l;
    throw Error("unknown logic " + s + " (expected IL, ILeq, In, Ineq, CD, CDeq, Bi or Bieq)");
}

std::vector<Logic> Logic::all() {
    return {LogicId::IL, LogicId::ILeq, LogicId::In, LogicId::Ineq,
            LogicId::CD, LogicId::CDeq, LogicId::Bi, LogicId::Bieq};
}

void check_admissible(Logic logic, const KripkeModel& m) {
    ModelClass c = logic.model_class();
    if (!in_class(classify_model(m), c))
        throw Error("model is not admissible for " + logic.name() + ": homomorphisms are not all " +
                    (c == ModelClass::In   ? "injective"
                     : c == ModelClass::Su ? "surjective"
                                           : "bijective"));
}

Assignment default_assignment(const Tuple& elems) {
    Assignment a;
    for (std::size_t i = 0; i < elems.size(); ++i) a.push_back({"x" + std::to_string(i + 1), elems[i]});
    return a;
}

// ---------------------------------------------------------------- evaluation

struct Evaluator::Compiled {
    Op op;
    int pred = -1;
    std::vector<std::pair<bool, int>> args;  // (is_const, slot or const id)
    int slot = -1;                           // binder slot for quantifiers
    std::vector<Compiled> kids;
};

Evaluator::Evaluator(Logic logic, const KripkeModel& m) : logic_(logic), m_(m) {
    check_admissible(logic, m);
    for (const auto& [p, k] : m.sig.preds) preds_.push_back(p);
    consts_.assign(m.sig.consts.begin(), m.sig.consts.end());
    static const std::set<Tuple> kEmpty;
    for (int w = 0; w < m.size(); ++w) {
        std::vector<const std::set<Tuple>*> row;
        for (const auto& p : preds_) {
            auto it = m.interp[w].preds.find(p);
            row.push_back(it == m.interp[w].preds.end() ? &kEmpty : &it->second);
        }
        ext_.push_back(row);
        std::vector<int> cv;
        for (const auto& c : consts_) cv.push_back(m.constant(w, c));
        cval_.push_back(cv);
        up_.push_back(m.up(w));
    }
}

bool Evaluator::eval(int w, const Formula& f, const Assignment& asg) const {
    if (w < 0 || w >= m_.size()) throw Error("world index out of range");
    Signature lang = m_.sig;
    lang.equality = logic_.equality();
    if (minimal_signature(f).equality && !logic_.equality())
        throw Error("equality formula under equality-free logic " + logic_.name());
    check_formula(f, lang);

    std::map<std::string, int> scope;
    std::vector<int> env;
    for (const auto& [x, a] : asg) {
        if (a < 0 || a >= m_.domain_size(w)) throw Error("tuple element outside A_" + m_.worlds[w]);
        if (scope.count(x)) throw Error("variable " + x + " assigned twice");
        scope[x] = static_cast<int>(env.size());
        env.push_back(a);
    }
    for (const auto& x : free_vars(f))
        if (!scope.count(x)) throw Error("free variable " + x + " has no value");

    int slots = static_cast<int>(env.size());
    std::function<Compiled(const Formula&)> compile = [&](const Formula& g) -> Compiled {
        Compiled c;
        c.op = g.op();
        switch (g.op()) {
        case Op::Bottom:
            break;
        case Op::Atom:
        case Op::Eq:
            if (g.op() == Op::Atom)
                c.pred = static_cast<int>(std::find(preds_.begin(), preds_.end(), g.name()) - preds_.begin());
            for (const auto& t : g.terms()) {
                if (t.is_const)
                    c.args.push_back(
                        {true, static_cast<int>(std::find(consts_.begin(), consts_.end(), t.name) - consts_.begin())});
                else
                    c.args.push_back({false, scope.at(t.name)});
            }
            break;
        case Op::Forall:
        case Op::Exists: {
            c.slot = slots++;
            auto prev = scope.find(g.name());
            std::optional<int> saved;
            if (prev != scope.end()) saved = prev->second;
            scope[g.name()] = c.slot;
            c.kids.push_back(compile(g.body()));
            if (saved)
                scope[g.name()] = *saved;
            else
                scope.erase(g.name());
            break;
        }
        default:
            c.kids.push_back(compile(g.lhs()));
            c.kids.push_back(compile(g.rhs()));
        }
        return c;
    };
    Compiled root = compile(f);
    env.resize(slots, -1);

    auto push = [&](int from, int to, const std::vector<int>& e) {
        std::vector<int> out(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) out[i] = e[i] < 0 ? -1 : m_.hom[from][to][e[i]];
        return out;
    };
    std::function<bool(const Compiled&, int, std::vector<int>&)> ev = [&](const Compiled& c, int u,
                                                                           std::vector<int>& e) -> bool {
        switch (c.op) {
        case Op::Bottom:
            return false;
        case Op::Atom: {
            Tuple t;
            t.reserve(c.args.size());
            for (auto [k, i] : c.args) t.push_back(k ? cval_[u][i] : e[i]);
            return ext_[u][c.pred]->count(t) != 0;
        }
        case Op::Eq: {
            auto val = [&](std::pair<bool, int> a) { return a.first ? cval_[u][a.second] : e[a.second]; };
            return val(c.args[0]) == val(c.args[1]);
        }
        case Op::And:
            return ev(c.kids[0], u, e) && ev(c.kids[1], u, e);
        case Op::Or:
            return ev(c.kids[0], u, e) || ev(c.kids[1], u, e);
        case Op::Implies:
            for (int v : up_[u]) {
                std::vector<int> ev2 = v == u ? e : push(u, v, e);
                if (ev(c.kids[0], v, ev2) && !ev(c.kids[1], v, ev2)) return false;
            }
            return true;
        case Op::Exists: {
            int saved = e[c.slot];
            bool found = false;
            for (int a = 0; a < m_.domain_size(u) && !found; ++a) {
                e[c.slot] = a;
                found = ev(c.kids[0], u, e);
            }
            e[c.slot] = saved;
            return found;
        }
        case Op::Forall:
            for (int v : up_[u]) {
                std::vector<int> ev2 = v == u ? e : push(u, v, e);
                for (int b = 0; b < m_.domain_size(v); ++b) {
                    ev2[c.slot] = b;
                    if (!ev(c.kids[0], v, ev2)) return false;
                }
            }
            return true;
        }
        return false;
    };
    return ev(root, w, env);
}

bool eval(Logic logic, const KripkeModel& m, int w, const Formula& f, const Assignment& asg) {
    return Evaluator(logic, m).eval(w, f, asg);
}

bool eval(Logic logic, const KripkeModel& m, int w, const Formula& f, const Tuple& elems) {
    return eval(logic, m, w, f, default_assignment(elems));
}

// ---------------------------------------------------------------- sentence enumeration

namespace {

struct Enumerated {
    Formula f;
    int rank;
};

// Renames bound variables by binding depth (depth k gets names[k-1]).
Formula alpha_by_depth(const Formula& f, const std::vector<std::string>& names, std::map<std::string, std::string>& env,
                       std::size_t depth) {
    switch (f.op()) {
    case Op::Bottom:
        return f;
    case Op::Atom:
    case Op::Eq: {
        std::vector<Term> ts;
        for (const auto& t : f.terms()) {
            auto it = t.is_const ? env.end() : env.find(t.name);
            ts.push_back(it == env.end() ? t : Term::var(it->second));
        }
        return f.op() == Op::Eq ? Formula::eq(ts[0], ts[1]) : Formula::atom(f.name(), std::move(ts));
    }
    case Op::Forall:
    case Op::Exists: {
        auto saved = env.find(f.name()) == env.end() ? std::optional<std::string>{} : env[f.name()];
        env[f.name()] = names.at(depth);
        Formula b = alpha_by_depth(f.body(), names, env, depth + 1);
        if (saved)
            env[f.name()] = *saved;
        else
            env.erase(f.name());
        return Formula::quant(f.op(), names.at(depth), std::move(b));
    }
    default:
        return Formula::binary(f.op(), alpha_by_depth(f.lhs(), names, env, depth),
                               alpha_by_depth(f.rhs(), names, env, depth));
    }
}

Formula canonical_form(const Formula& f, const std::vector<std::string>& names) {
    std::map<std::string, std::string> env;
    return normalize(alpha_by_depth(f, names, env, 0));
}

// Connectives with a falsum operand (other than as a consequent) and binary
// nodes with identical sides are equivalent to smaller family members.
bool trivially_redundant(const Formula& f) {
    if (!f.is_binary()) return false;
    if (f.lhs() == f.rhs()) return true;
    if (f.lhs().op() == Op::Bottom) return true;
    return f.op() != Op::Implies && f.rhs().op() == Op::Bottom;
}

std::vector<Formula> enumerate_sentences(const Signature& sig, int d, const SliceCaps& caps) {
    std::set<std::string> used(sig.consts.begin(), sig.consts.end());
    for (const auto& [p, k] : sig.preds) used.insert(p);
    int nv = std::max(caps.max_vars, 0);
    std::vector<std::string> vars = fresh_names("x", static_cast<std::size_t>(nv), used);
    std::vector<std::string> marks;
    for (int i = 0; i < nv; ++i) marks.push_back("#" + std::to_string(i + 1));
    int masks = 1 << nv;

    // table[size][free-variable mask]
    std::vector<std::vector<std::vector<Enumerated>>> table(1, std::vector<std::vector<Enumerated>>(masks));
    std::unordered_set<std::string> seen;
    std::vector<Formula> out;
    const std::size_t kWorkLimit = 3'000'000;
    std::size_t work = 0;

    auto mask_of = [&](const Formula& f) {
        int m = 0;
        for (const auto& x : free_vars(f))
            for (int i = 0; i < nv; ++i)
                if (vars[i] == x) m |= 1 << i;
        return m;
    };
    auto offer = [&](std::size_t size, const Formula& f) {
        if (trivially_redundant(f)) return;
        int r = rank(f);
        int m = mask_of(f);
        if (r + std::popcount(static_cast<unsigned>(m)) > d) return;  // can never be closed within rank d
        Formula key = canonical_form(f, marks);
        if (key.size() != size) return;  // an equivalent smaller formula exists
        if (!seen.insert(print_formula(key)).second) return;
        table[size][m].push_back({f, r});
    };

    std::vector<Term> terms;
    for (int i = 0; i < nv; ++i) terms.push_back(Term::var(vars[i]));
    for (const auto& c : sig.consts) terms.push_back(Term::cnst(c));

    for (std::size_t size = 1; out.size() < caps.max_sentences && work <= kWorkLimit; ++size) {
        table.emplace_back(masks);
        if (size == 1) {
            offer(1, Formula::bottom());
            for (const auto& [p, k] : sig.preds) {
                std::vector<Term> args(k);
                std::function<void(int)> gen = [&](int i) {
                    if (i == k) {
                        offer(1, Formula::atom(p, args));
                        return;
                    }
                    for (const auto& t : terms) {
                        args[i] = t;
                        gen(i + 1);
                    }
                };
                gen(0);
            }
            if (sig.equality)
                for (std::size_t i = 0; i < terms.size(); ++i)
                    for (std::size_t j = i + 1; j < terms.size(); ++j) offer(1, Formula::eq(terms[i], terms[j]));
        } else {
            for (std::size_t s1 = 1; s1 + 1 < size && work <= kWorkLimit; ++s1) {
                std::size_t s2 = size - 1 - s1;
                for (int m1 = 0; m1 < masks; ++m1)
                    for (int m2 = 0; m2 < masks; ++m2)
                        for (const auto& a : table[s1][m1]) {
                            if (work > kWorkLimit) break;
                            for (const auto& b : table[s2][m2]) {
                                ++work;
                                offer(size, Formula::conj(a.f, b.f));
                                offer(size, Formula::disj(a.f, b.f));
                                offer(size, Formula::implies(a.f, b.f));
                            }
                        }
            }
            for (int m = 0; m < masks; ++m)
                for (const auto& a : table[size - 1][m]) {
                    auto bound = bound_vars(a.f);
                    for (int i = 0; i < nv; ++i)
                        if ((m & (1 << i)) && !bound.count(vars[i])) {
                            offer(size, Formula::exists(vars[i], a.f));
                            offer(size, Formula::forall(vars[i], a.f));
                        }
                }
        }
        std::vector<std::pair<std::string, Formula>> level;
        for (const auto& e : table[size][0]) {
            Formula pretty = canonical_form(e.f, vars);
            level.push_back({print_formula(pretty), pretty});
        }
        std::sort(level.begin(), level.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (auto& entry : level) {
            if (out.size() >= caps.max_sentences) break;
            out.push_back(entry.second);
        }
        // Every formula of size s+1 has a part of size >= s/2; once all sizes
        // in [s/2, s] are empty the family is exhausted.
        bool dry = size >= 2;
        for (std::size_t t = (size + 1) / 2; t <= size && dry; ++t)
            for (int m = 0; m < masks; ++m) dry = dry && table[t][m].empty();
        if (dry) break;
    }
    return out;
}

std::string sig_key(const Signature& sig, int d, const SliceCaps& caps) {
    std::string k = std::to_string(d) + "|" + std::to_string(caps.max_sentences) + "|" + std::to_string(caps.max_vars) +
                    "|" + (sig.equality ? "eq" : "") + "|";
    for (const auto& [p, n] : sig.preds) k += p + "/" + std::to_string(n) + ",";
    k += "|";
    for (const auto& c : sig.consts) k += c + ",";
    return k;
}

}  // namespace

const std::vector<Formula>& canonical_sentences(const Signature& sig, int d, const SliceCaps& caps) {
    static std::mutex mu;
    static std::map<std::string, std::vector<Formula>> cache;
    std::string key = sig_key(sig, d, caps);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto sentences = enumerate_sentences(sig, d, caps);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(key, std::move(sentences)).first->second;
}

// ---------------------------------------------------------------- slices

std::set<std::string> TheorySlice::positive_keys() const {
    std::set<std::string> out;
    for (const auto& f : positive) out.insert(print_formula(f));
    return out;
}

std::set<std::string> TheorySlice::negative_keys() const {
    std::set<std::string> out;
    for (const auto& f : negative) out.insert(print_formula(f));
    return out;
}

bool slice_equal(const TheorySlice& a, const TheorySlice& b) {
    if (a.family && a.family == b.family) return a.truth == b.truth;
    return a.positive_keys() == b.positive_keys() && a.negative_keys() == b.negative_keys();
}

bool positive_included(const TheorySlice& a, const TheorySlice& b) {
    if (a.family && a.family == b.family) {
        for (std::size_t i = 0; i < a.truth.size(); ++i)
            if (a.truth[i] && !b.truth[i]) return false;
        return true;
    }
    auto x = a.positive_keys(), y = b.positive_keys();
    return std::includes(y.begin(), y.end(), x.begin(), x.end());
}

std::vector<std::string> type_constants(const Signature& sig, std::size_t n) {
    std::set<std::string> used(sig.consts.begin(), sig.consts.end());
    for (const auto& [p, k] : sig.preds) used.insert(p);
    return fresh_names("c", n, used);
}

TheorySlice theory_slice(Logic logic, const KripkeModel& m, int w, int d, const SliceCaps& caps) {
    Signature lang = m.sig;
    lang.equality = logic.equality();
    Evaluator ev(logic, m);
    TheorySlice s;
    s.rank_bound = d;
    s.caps = caps;
    const auto& family = canonical_sentences(lang, d, caps);
    s.family = &family;
    for (const auto& f : family) {
        bool t = ev.eval(w, f);
        s.truth.push_back(t);
        (t ? s.positive : s.negative).push_back(f);
    }
    return s;
}

TheorySlice type_slice(Logic logic, const KripkeModel& m, int w, const std::vector<std::string>& consts,
                       const Tuple& elems, int d, const SliceCaps& caps) {
    KripkeModel ext = constant_extension(m, w, consts, elems);
    return theory_slice(logic, ext, ext.world_index(m.worlds[w]), d, caps);
}

TheorySlice type_slice(Logic logic, const KripkeModel& m, int w, const Tuple& elems, int d, const SliceCaps& caps) {
    return type_slice(logic, m, w, type_constants(m.sig, elems.size()), elems, d, caps);
}

bool satisfies_pair(Logic logic, const KripkeModel& m, int w, const FormulaPair& pair, const Tuple& elems) {
    Evaluator ev(logic, m);
    auto asg = default_assignment(elems);
    for (const auto& f : pair.gamma)
        if (!ev.eval(w, f, asg)) return false;
    for (const auto& f : pair.delta)
        if (ev.eval(w, f, asg)) return false;
    return true;
}

std::vector<Tuple> tuples_upto(int domain_size, int max_len) {
    std::vector<Tuple> out{{}};
    std::vector<Tuple> layer{{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Tuple> next;
        for (const auto& t : layer)
            for (int a = 0; a < domain_size; ++a) {
                Tuple u = t;
                u.push_back(a);
                next.push_back(u);
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

namespace {
constexpr int kTupleCap = 2;
}

bool is_elementary_submodel_upto(Logic logic, const KripkeModel& m, const KripkeModel& n, int d) {
    auto v = submodel_violation(m, n);
    if (!v.empty()) throw Error("not a submodel: " + v);
    for (int w = 0; w < m.size(); ++w) {
        int nw = n.world_index(m.worlds[w]);
        for (const auto& t : tuples_upto(m.domain_size(w), kTupleCap)) {
            Tuple nt;
            for (int a : t) nt.push_back(n.element_index(nw, m.domains[w][a]));
            if (!slice_equal(type_slice(logic, m, w, t, d), type_slice(logic, n, nw, nt, d))) return false;
        }
    }
    return true;
}

bool check_elementary_embedding_upto(Logic logic, const KripkeModel& m, const KripkeModel& n, const ElementMap& g,
                                     const WorldMap& h, int d) {
    if (!(m.sig == n.sig) || static_cast<int>(h.size()) != m.size() || static_cast<int>(g.size()) != m.size())
        return false;
    std::set<int> hs(h.begin(), h.end());
    if (static_cast<int>(hs.size()) != m.size()) return false;
    for (int x : h)
        if (x < 0 || x >= n.size()) return false;
    std::set<Element> img;
    for (int w = 0; w < m.size(); ++w) {
        if (static_cast<int>(g[w].size()) != m.domain_size(w)) return false;
        for (int b : g[w]) {
            if (b < 0 || b >= n.domain_size(h[w])) return false;  // dom
            if (!img.insert({h[w], b}).second) return false;      // g injective
        }
    }
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v) {
            if (m.le(w, v) != n.le(h[w], h[v])) return false;  // rel
            if (!m.le(w, v)) continue;
            for (int a = 0; a < m.domain_size(w); ++a)
                if (g[v][m.apply(w, v, a)] != n.apply(h[w], h[v], g[w][a])) return false;  // map
        }
    for (int w = 0; w < m.size(); ++w)
        for (const auto& t : tuples_upto(m.domain_size(w), kTupleCap)) {
            Tuple nt;
            for (int a : t) nt.push_back(g[w][a]);
            if (!slice_equal(type_slice(logic, m, w, t, d), type_slice(logic, n, h[w], nt, d))) return false;
        }
    return true;
}

// ---------------------------------------------------------------- finite types

namespace {

bool all_in_type(Logic logic, const KripkeModel& m, int w, const std::vector<std::string>& consts, const Tuple& elems,
                 const std::vector<Formula>& sat, const std::vector<Formula>& unsat) {
    KripkeModel ext = constant_extension(m, w, consts, elems);
    Evaluator ev(logic, ext);
    int ew = ext.world_index(m.worlds[w]);
    for (const auto& f : sat)
        if (!ev.eval(ew, f)) return false;
    for (const auto& f : unsat)
        if (ev.eval(ew, f)) return false;
    return true;
}

void check_type_inputs(const KripkeModel& m, int w, const Tuple& elems, const std::vector<std::string>& consts,
                       TypeKind kind) {
    if (w < 0 || w >= m.size()) throw Error("unknown world");
    std::size_t need = elems.size() + (kind == TypeKind::Successor ? 0 : 1);
    if (consts.size() != need)
        throw Error("wrong constant count: expected " + std::to_string(need) + ", got " + std::to_string(consts.size()));
}

bool witness(Logic logic, const KripkeModel& m, int w, const Tuple& elems, const std::vector<std::string>& consts,
             const FormulaPair& cand, TypeKind kind) {
    switch (kind) {
    case TypeKind::Successor: {
        std::vector<std::string> cn(consts.begin(), consts.begin() + elems.size());
        for (int v : m.up(w))
            if (all_in_type(logic, m, v, cn, m.apply(w, v, elems), cand.gamma, cand.delta)) return true;
        return false;
    }
    case TypeKind::Existential:
        for (int a = 0; a < m.domain_size(w); ++a) {
            Tuple t = elems;
            t.push_back(a);
            if (all_in_type(logic, m, w, consts, t, cand.gamma, {})) return true;
        }
        return false;
    case TypeKind::Universal:
        for (int v : m.up(w))
            for (int b = 0; b < m.domain_size(v); ++b) {
                Tuple t = m.apply(w, v, elems);
                t.push_back(b);
                if (all_in_type(logic, m, v, consts, t, {}, cand.gamma)) return true;
            }
        return false;
    }
    return false;
}

}  // namespace

bool classify_finite_type(Logic logic, const KripkeModel& m, int w, const Tuple& elems,
                          const std::vector<std::string>& consts, const FormulaPair& candidate, TypeKind kind) {
    check_type_inputs(m, w, elems, consts, kind);
    return witness(logic, m, w, elems, consts, candidate, kind);
}

bool is_type_realized(Logic logic, const KripkeModel& m, const KripkeModel& n, int w, const Tuple& elems,
                      const std::vector<std::string>& consts, const FormulaPair& candidate, TypeKind kind) {
    check_type_inputs(m, w, elems, consts, kind);
    auto v = submodel_violation(m, n);
    if (!v.empty()) throw Error("not a submodel: " + v);
    if (!witness(logic, m, w, elems, consts, candidate, kind)) throw Error("candidate is not a type of the model");
    int nw = n.world_index(m.worlds[w]);
    Tuple nt;
    for (int a : elems) nt.push_back(n.element_index(nw, m.domains[w][a]));
    return witness(logic, n, nw, nt, consts, candidate, kind);
}

}  // namespace kwb
