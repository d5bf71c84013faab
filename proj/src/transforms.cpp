#include "kwb/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace kwb {

// ---------------------------------------------------------------- unravelling

Unravelling unravel_full(const KripkeModel& m, int w, UnravelMode mode) {
    if (w < 0 || w >= m.size()) throw Error("unravel: unknown world");
    if (!mode.strict && mode.depth < 1) throw Error("unravel: bounded depth must be at least 1");
    Unravelling u;
    u.seq.push_back({w});
    for (std::size_t i = 0; i < u.seq.size(); ++i) {
        if (!mode.strict && static_cast<int>(u.seq[i].size()) >= mode.depth) continue;
        int last = u.seq[i].back();
        for (int v = 0; v < m.size(); ++v) {
            if (!m.le(last, v) || (mode.strict && v == last)) continue;
            auto next = u.seq[i];
            next.push_back(v);
            u.seq.push_back(next);
        }
    }
    KripkeModel& r = u.model;
    r.sig = m.sig;
    for (const auto& s : u.seq) {
        std::string name;
        for (std::size_t i = 0; i < s.size(); ++i) name += (i ? ">" : "") + m.worlds[s[i]];
        if (r.find_world(name)) throw Error("unravel: sequence name " + name + " is ambiguous");
        int x = r.add_world(name);
        for (const auto& a : m.domains[s.back()]) r.add_element(x, a + "@" + name);
        r.interp[x] = m.interp[s.back()];
    }
    auto prefix = [&](int s, int t) {
        const auto& a = u.seq[s];
        const auto& b = u.seq[t];
        return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
    };
    for (int s = 0; s < r.size(); ++s)
        for (int t = 0; t < r.size(); ++t)
            if (prefix(s, t)) {
                r.add_edge(s, t);
            }
    r.close_order();
    for (int s = 0; s < r.size(); ++s)
        for (int t = 0; t < r.size(); ++t)
            if (r.le(s, t)) r.hom[s][t] = m.hom[u.last(s)][u.last(t)];
    return u;
}

KripkeModel unravel(const KripkeModel& m, int w, UnravelMode mode) { return unravel_full(m, w, mode).model; }

RawAsimulation unravel_relation(const KripkeModel& m, const Unravelling& u, int max_len) {
    RawAsimulation out;
    for (int s = 0; s < u.model.size(); ++s)
        for (const auto& t : tuples_upto(m.domain_size(u.last(s)), max_len)) {
            out.insert({0, u.last(s), t, s, t});
            out.insert({1, s, t, u.last(s), t});
        }
    return out;
}

// ---------------------------------------------------------------- congruences

namespace {

int find(std::vector<int>& p, int x) { return p[x] == x ? x : p[x] = find(p, p[x]); }

// Class ids normalized to the least member.
std::vector<int> least_members(std::vector<int> parent) {
    std::vector<int> out(parent.size());
    std::vector<int> least(parent.size(), -1);
    for (int a = 0; a < static_cast<int>(parent.size()); ++a) {
        int r = find(parent, a);
        if (least[r] < 0) least[r] = a;
        out[a] = least[r];
    }
    return out;
}

}  // namespace

Congruence Congruence::diagonal(const KripkeModel& m) {
    Congruence c;
    for (int w = 0; w < m.size(); ++w) {
        c.cls.emplace_back(m.domain_size(w));
        std::iota(c.cls.back().begin(), c.cls.back().end(), 0);
    }
    return c;
}

Congruence Congruence::generated(const KripkeModel& m, const std::vector<std::pair<Element, int>>& pairs) {
    std::vector<std::vector<int>> parent;
    for (int w = 0; w < m.size(); ++w) {
        parent.emplace_back(m.domain_size(w));
        std::iota(parent.back().begin(), parent.back().end(), 0);
    }
    for (const auto& [e, b] : pairs) {
        if (e.world < 0 || e.world >= m.size() || e.index < 0 || e.index >= m.domain_size(e.world) || b < 0 ||
            b >= m.domain_size(e.world))
            throw Error("congruence: element out of range");
        auto& p = parent[e.world];
        p[find(p, e.index)] = find(p, b);
    }
    Congruence c;
    for (auto& p : parent) c.cls.push_back(least_members(p));
    return c;
}

Congruence unary_profile_congruence(const KripkeModel& m) {
    std::vector<std::string> unary;
    for (const auto& [p, k] : m.sig.preds)
        if (k == 1) unary.push_back(p);
    Congruence c;
    for (int w = 0; w < m.size(); ++w) {
        auto profile = [&](int a) {
            std::vector<char> out;
            for (int v : m.up(w))
                for (const auto& p : unary) out.push_back(m.holds(v, p, {m.apply(w, v, a)}));
            return out;
        };
        std::vector<int> ids(m.domain_size(w));
        for (int a = 0; a < m.domain_size(w); ++a) {
            ids[a] = a;
            for (int b = 0; b < a; ++b)
                if (profile(a) == profile(b)) {
                    ids[a] = ids[b];
                    break;
                }
        }
        c.cls.push_back(ids);
    }
    return c;
}

std::vector<Diagnostic> congruence_diagnostics(Logic logic, const KripkeModel& m, const Congruence& cong) {
    std::vector<Diagnostic> out;
    if (static_cast<int>(cong.cls.size()) != m.size()) return {{"shape", "one class vector per world expected"}};
    for (int w = 0; w < m.size(); ++w) {
        if (static_cast<int>(cong.cls[w].size()) != m.domain_size(w))
            return {{"shape", "class vector at " + m.worlds[w] + " does not cover A_w"}};
        for (int id : cong.cls[w])
            if (id < 0 || id >= m.domain_size(w)) return {{"shape", "class id out of range at " + m.worlds[w]}};
    }
    std::set<std::string> used(m.sig.consts.begin(), m.sig.consts.end());
    for (const auto& [p, k] : m.sig.preds) used.insert(p);
    std::string E = fresh_name("approx", used);

    KripkeModel x = m;
    x.sig.preds[E] = 2;
    for (int w = 0; w < m.size(); ++w) {
        auto& ext = x.interp[w].preds[E];
        for (int a = 0; a < m.domain_size(w); ++a)
            for (int b = 0; b < m.domain_size(w); ++b)
                if (cong.related(w, a, b)) ext.insert({a, b});
    }
    for (const auto& d : validate_model(x)) out.push_back({"monotonicity", d.detail});
    if (!out.empty()) return out;

    auto v = [](const std::string& n) { return Term::var(n); };
    auto rel = [&](const std::string& a, const std::string& b) { return Formula::atom(E, {v(a), v(b)}); };
    auto close = [](Formula f, const std::vector<std::string>& vars) {
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = Formula::forall(*it, f);
        return f;
    };
    std::vector<Formula> axioms = {
        close(rel("x", "x"), {"x"}),
        close(Formula::implies(rel("x", "y"), rel("y", "x")), {"x", "y"}),
        close(Formula::implies(Formula::conj(rel("x", "y"), rel("y", "z")), rel("x", "z")), {"x", "y", "z"}),
    };
    for (const auto& [p, k] : m.sig.preds) {
        std::vector<std::string> vars;
        std::vector<Term> xs, ys;
        Formula pre;
        for (int i = 1; i <= k; ++i) {
            std::string a = "x" + std::to_string(i), b = "y" + std::to_string(i);
            xs.push_back(v(a));
            ys.push_back(v(b));
            pre = i == 1 ? rel(a, b) : Formula::conj(pre, rel(a, b));
        }
        for (int i = 1; i <= k; ++i) vars.push_back("x" + std::to_string(i));
        for (int i = 1; i <= k; ++i) vars.push_back("y" + std::to_string(i));
        axioms.push_back(close(Formula::implies(pre, Formula::iff(Formula::atom(p, xs), Formula::atom(p, ys))), vars));
    }
    Evaluator ev(LogicId::IL, x);
    for (const auto& f : axioms)
        for (int w = 0; w < x.size(); ++w)
            if (!ev.eval(w, f)) {
                out.push_back({print_formula(f), "fails at " + m.worlds[w]});
                break;
            }
    if (logic.equality())
        for (int w = 0; w < m.size(); ++w) {
            std::set<int> ids(cong.cls[w].begin(), cong.cls[w].end());
            if (static_cast<int>(ids.size()) != m.domain_size(w))
                out.push_back({"diagonal", "elements of " + m.worlds[w] + " are merged under an equality logic"});
        }
    return out;
}

bool check_congruence(Logic logic, const KripkeModel& m, const Congruence& cong) {
    return congruence_diagnostics(logic, m, cong).empty();
}

Quotient quotient_full(Logic logic, const KripkeModel& m, const Congruence& cong) {
    auto diags = congruence_diagnostics(logic, m, cong);
    if (!diags.empty()) throw Error("quotient: not a congruence (" + diags[0].law + ": " + diags[0].detail + ")");
    Quotient q;
    KripkeModel& r = q.model;
    r.sig = m.sig;
    for (const auto& w : m.worlds) r.add_world(w);
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v)
            if (m.le(w, v)) r.add_edge(w, v);
    r.close_order();
    q.class_index.resize(m.size());
    for (int w = 0; w < m.size(); ++w) {
        std::map<int, std::vector<int>> members;
        for (int a = 0; a < m.domain_size(w); ++a) members[cong.cls[w][a]].push_back(a);
        std::map<int, int> idx;
        for (const auto& [id, as] : members) {
            std::string name = "[";
            for (std::size_t i = 0; i < as.size(); ++i) name += (i ? "," : "") + m.domains[w][as[i]];
            idx[id] = r.add_element(w, name + "]");
        }
        for (int a = 0; a < m.domain_size(w); ++a) q.class_index[w].push_back(idx[cong.cls[w][a]]);
    }
    for (int w = 0; w < m.size(); ++w) {
        const auto& ci = q.class_index[w];
        for (const auto& [p, ext] : m.interp[w].preds) {
            auto& dst = r.interp[w].preds[p];
            for (const auto& t : ext) {
                Tuple nt;
                for (int a : t) nt.push_back(ci[a]);
                dst.insert(nt);
            }
        }
        for (const auto& [c, a] : m.interp[w].consts) r.interp[w].consts[c] = ci[a];
        for (int v = 0; v < m.size(); ++v) {
            if (!m.le(w, v)) continue;
            auto& h = r.hom[w][v];
            h.assign(r.domain_size(w), -1);
            for (int a = 0; a < m.domain_size(w); ++a) h[ci[a]] = q.class_index[v][m.apply(w, v, a)];
        }
    }
    return q;
}

KripkeModel quotient(Logic logic, const KripkeModel& m, const Congruence& cong) {
    return quotient_full(logic, m, cong).model;
}

RawAsimulation quotient_relation(const KripkeModel& m, const Quotient& q, int max_len) {
    RawAsimulation out;
    for (int w = 0; w < m.size(); ++w)
        for (const auto& t : tuples_upto(m.domain_size(w), max_len)) {
            Tuple ct;
            for (int a : t) ct.push_back(q.class_index[w][a]);
            out.insert({0, w, t, w, ct});
            out.insert({1, w, ct, w, t});
        }
    return out;
}

// ---------------------------------------------------------------- star expansion

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ? ch : '_';
    return out;
}

std::string unique(const std::string& base, std::set<std::string>& used) {
    std::string name = base;
    for (int i = 2; used.count(name); ++i) name = base + "_" + std::to_string(i);
    used.insert(name);
    return name;
}

}  // namespace

StarModel star_expand(const KripkeModel& m, int w) {
    if (w < 0 || w >= m.size()) throw Error("star_expand: unknown world");
    StarModel s;
    s.model = m;
    s.base = m.sig;
    s.root = w;
    std::set<std::string> used(m.sig.consts.begin(), m.sig.consts.end());
    for (const auto& [p, k] : m.sig.preds) used.insert(p);
    for (int u = 0; u < m.size(); ++u)
        for (int a = 0; a < m.domain_size(u); ++a) {
            std::string tag = sanitize(m.worlds[u]) + "_" + sanitize(m.domains[u][a]);
            s.plus[{u, a}] = unique("Pp_" + tag, used);
            s.minus[{u, a}] = unique("Pm_" + tag, used);
        }
    KripkeModel& r = s.model;
    for (int u = 0; u < m.size(); ++u)
        for (int a = 0; a < m.domain_size(u); ++a) {
            const std::string& pp = s.plus[{u, a}];
            const std::string& pm = s.minus[{u, a}];
            r.sig.preds[pp] = 1;
            r.sig.preds[pm] = 1;
            for (int v = 0; v < m.size(); ++v) {
                auto& plus = r.interp[v].preds[pp];
                auto& minus = r.interp[v].preds[pm];
                for (int b = 0; b < m.domain_size(v); ++b) {
                    if (m.le(u, v) && b == m.apply(u, v, a)) plus.insert({b});
                    if (!m.le(v, u) || a != m.apply(v, u, b)) minus.insert({b});
                }
            }
        }
    return s;
}

std::pair<Formula, Formula> q_formulas(const StarModel& s, int w) {
    const KripkeModel& m = s.model;
    if (w < 0 || w >= m.size()) throw Error("q_formulas: unknown world");
    if (m.domain_size(w) == 0) throw Error("q_formulas: empty domain at " + m.worlds[w]);
    int aw = 0;
    for (int a = 1; a < m.domain_size(w); ++a)
        if (m.domains[w][a] < m.domains[w][aw]) aw = a;
    Term x = Term::var("x");
    return {Formula::exists("x", Formula::atom(s.plus.at({w, aw}), {x})),
            Formula::forall("x", Formula::atom(s.minus.at({w, aw}), {x}))};
}

StarCongruence derive_star_congruence(const KripkeModel& n, int v, const std::vector<std::string>& plus_preds) {
    if (plus_preds.empty()) throw Error("derive_star_congruence: signature lacks star predicates");
    for (const auto& p : plus_preds) {
        auto it = n.sig.preds.find(p);
        if (it == n.sig.preds.end() || it->second != 1)
            throw Error("derive_star_congruence: signature lacks star predicate " + p);
    }
    StarCongruence out;
    out.model = generated_submodel(n, v);
    const KripkeModel& g = out.model;
    for (int u = 0; u < g.size(); ++u) {
        std::vector<std::vector<char>> prof(g.domain_size(u));
        std::vector<char> tagged(g.domain_size(u), 0);
        for (int c = 0; c < g.domain_size(u); ++c)
            for (const auto& p : plus_preds) {
                bool in = g.holds(u, p, {c});
                prof[c].push_back(in);
                tagged[c] |= in;
            }
        std::vector<int> ids(g.domain_size(u));
        for (int c = 0; c < g.domain_size(u); ++c) {
            ids[c] = c;
            if (!tagged[c]) continue;
            for (int d = 0; d < c; ++d)
                if (tagged[d] && prof[d] == prof[c]) {
                    ids[c] = ids[d];
                    break;
                }
        }
        out.cong.cls.push_back(ids);
    }
    return out;
}

StarCongruence derive_star_congruence(const StarModel& s, const KripkeModel& n, int v) {
    std::vector<std::string> plus;
    for (const auto& [e, p] : s.plus) plus.push_back(p);
    return derive_star_congruence(n, v, plus);
}

// ---------------------------------------------------------------- isomorphic correction

Correction isomorphic_correction(Logic logic, const KripkeModel& m, const KripkeModel& n, const ElementMap& g,
                                 const WorldMap& h, int d) {
    if (!check_elementary_embedding_upto(logic, m, n, g, h, d))
        throw Error("isomorphic_correction: (g, h) is not an elementary embedding at rank " + std::to_string(d));
    Correction out;
    KripkeModel& r = out.model;
    r.sig = m.sig;
    std::set<std::string> wnames(m.worlds.begin(), m.worlds.end());
    std::vector<char> hit(n.size(), 0);
    for (int w = 0; w < m.size(); ++w) {
        r.add_world(m.worlds[w]);
        out.h.push_back(h[w]);
        hit[h[w]] = 1;
    }
    for (int u = 0; u < n.size(); ++u)
        if (!hit[u]) {
            std::string name = n.worlds[u] + "#";
            while (wnames.count(name)) name += "#";
            wnames.insert(name);
            r.add_world(name);
            out.h.push_back(u);
        }
    // inv[i][b]: index in r of n's element b at world h'(i)
    std::vector<std::vector<int>> inv(r.size());
    out.g.resize(r.size());
    for (int i = 0; i < r.size(); ++i) {
        int u = out.h[i];
        inv[i].assign(n.domain_size(u), -1);
        std::set<std::string> names;
        if (i < m.size())
            for (int a = 0; a < m.domain_size(i); ++a) {
                r.add_element(i, m.domains[i][a]);
                names.insert(m.domains[i][a]);
                out.g[i].push_back(g[i][a]);
                inv[i][g[i][a]] = a;
            }
        for (int b = 0; b < n.domain_size(u); ++b) {
            if (inv[i][b] >= 0) continue;
            std::string name = n.domains[u][b] + "#";
            while (names.count(name)) name += "#";
            names.insert(name);
            inv[i][b] = r.add_element(i, name);
            out.g[i].push_back(b);
        }
    }
    for (int i = 0; i < r.size(); ++i)
        for (int j = 0; j < r.size(); ++j)
            if (n.le(out.h[i], out.h[j])) r.add_edge(i, j);
    r.close_order();
    for (int i = 0; i < r.size(); ++i) {
        int u = out.h[i];
        for (const auto& [p, ext] : n.interp[u].preds) {
            auto& dst = r.interp[i].preds[p];
            for (const auto& t : ext) {
                Tuple nt;
                for (int b : t) nt.push_back(inv[i][b]);
                dst.insert(nt);
            }
        }
        for (const auto& [c, b] : n.interp[u].consts) r.interp[i].consts[c] = inv[i][b];
        for (int j = 0; j < r.size(); ++j) {
            if (!r.le(i, j)) continue;
            auto& hm = r.hom[i][j];
            hm.assign(r.domain_size(i), -1);
            for (int k = 0; k < r.domain_size(i); ++k) hm[k] = inv[j][n.apply(u, out.h[j], out.g[i][k])];
        }
    }
    return out;
}

}  // namespace kwb
