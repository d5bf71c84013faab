#include "kwb/kripke.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

namespace kwb {

// ---------------------------------------------------------------- basics

std::optional<int> KripkeModel::find_world(const std::string& name) const {
    auto it = std::find(worlds.begin(), worlds.end(), name);
    if (it == worlds.end()) return std::nullopt;
    return static_cast<int>(it - worlds.begin());
}

std::optional<int> KripkeModel::find_element(int w, const std::string& name) const {
    const auto& d = domains[w];
    auto it = std::find(d.begin(), d.end(), name);
    if (it == d.end()) return std::nullopt;
    return static_cast<int>(it - d.begin());
}

int KripkeModel::world_index(const std::string& name) const {
    auto w = find_world(name);
    if (!w) throw Error("unknown world " + name);
    return *w;
}

int KripkeModel::element_index(int w, const std::string& name) const {
    auto a = find_element(w, name);
    if (!a) throw Error("unknown element " + name + " at world " + worlds[w]);
    return *a;
}

std::vector<int> KripkeModel::up(int w) const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (le(w, v)) out.push_back(v);
    return out;
}

std::vector<int> KripkeModel::down(int w) const {
    std::vector<int> out;
    for (int v = 0; v < size(); ++v)
        if (le(v, w)) out.push_back(v);
    return out;
}

Tuple KripkeModel::apply(int w, int v, const Tuple& t) const {
    Tuple out;
    out.reserve(t.size());
    for (int a : t) out.push_back(hom[w][v][a]);
    return out;
}

bool KripkeModel::holds(int w, const std::string& pred, const Tuple& t) const {
    const auto& ps = interp[w].preds;
    auto it = ps.find(pred);
    return it != ps.end() && it->second.count(t) != 0;
}

int KripkeModel::constant(int w, const std::string& c) const {
    auto it = interp[w].consts.find(c);
    if (it == interp[w].consts.end()) throw Error("constant " + c + " undefined at world " + worlds[w]);
    return it->second;
}

int KripkeModel::add_world(const std::string& name) {
    if (find_world(name)) throw Error("duplicate world " + name);
    worlds.push_back(name);
    int n = size();
    for (auto& row : leq) row.push_back(0);
    leq.emplace_back(n, 0);
    leq[n - 1][n - 1] = 1;
    domains.emplace_back();
    interp.emplace_back();
    for (auto& row : hom) row.emplace_back();
    hom.emplace_back(n);
    return n - 1;
}

int KripkeModel::add_element(int w, const std::string& name) {
    if (find_element(w, name)) throw Error("duplicate element " + name + " at world " + worlds[w]);
    domains[w].push_back(name);
    return domain_size(w) - 1;
}

void KripkeModel::close_order() {
    int n = size();
    for (int w = 0; w < n; ++w) leq[w][w] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (leq[i][k])
                for (int j = 0; j < n; ++j)
                    if (leq[k][j]) leq[i][j] = 1;
}

namespace {
bool total_map(const KripkeModel& m, int w, int v) {
    const auto& h = m.hom[w][v];
    if (static_cast<int>(h.size()) != m.domain_size(w)) return false;
    return std::all_of(h.begin(), h.end(), [&](int b) { return b >= 0 && b < m.domain_size(v); });
}
}  // namespace

void KripkeModel::complete_homs() {
    int n = size();
    for (int w = 0; w < n; ++w)
        if (hom[w][w].empty() && domain_size(w) > 0) {
            hom[w][w].resize(domain_size(w));
            std::iota(hom[w][w].begin(), hom[w][w].end(), 0);
        }
    for (bool changed = true; changed;) {
        changed = false;
        for (int w = 0; w < n; ++w)
            for (int v = 0; v < n; ++v) {
                if (w == v || !le(w, v) || static_cast<int>(hom[w][v].size()) == domain_size(w)) continue;
                for (int u = 0; u < n; ++u) {
                    if (u == w || u == v || !le(w, u) || !le(u, v)) continue;
                    if (!total_map(*this, w, u) || !total_map(*this, u, v)) continue;
                    hom[w][v] = apply(u, v, hom[w][u]);
                    changed = true;
                    break;
                }
            }
    }
}

// ---------------------------------------------------------------- validation

std::vector<Diagnostic> validate_model(const KripkeModel& m) {
    std::vector<Diagnostic> out;
    auto add = [&](const std::string& law, const std::string& detail) { out.push_back({law, detail}); };
    int n = m.size();
    try {
        m.sig.check();
    } catch (const Error& e) {
        add("signature", e.what());
    }
    if (n == 0) add("nonempty-worlds", "model has no worlds");
    if (static_cast<int>(m.leq.size()) != n || static_cast<int>(m.domains.size()) != n ||
        static_cast<int>(m.interp.size()) != n || static_cast<int>(m.hom.size()) != n) {
        add("shape", "per-world tables disagree with the world count");
        return out;
    }
    for (int w = 0; w < n; ++w) {
        if (!m.le(w, w)) add("reflexivity", m.worlds[w] + " not <= itself");
        for (int v = 0; v < n; ++v) {
            if (w != v && m.le(w, v) && m.le(v, w)) {
                if (w < v) add("antisymmetry", m.worlds[w] + " <= " + m.worlds[v] + " and back");
            }
            for (int u = 0; u < n; ++u)
                if (m.le(w, v) && m.le(v, u) && !m.le(w, u))
                    add("transitivity", m.worlds[w] + " <= " + m.worlds[v] + " <= " + m.worlds[u]);
        }
        std::set<std::string> names(m.domains[w].begin(), m.domains[w].end());
        if (names.size() != m.domains[w].size()) add("element-names", "duplicate element name at " + m.worlds[w]);
    }
    bool interp_ok = true;
    for (int w = 0; w < n; ++w) {
        const auto& I = m.interp[w];
        for (const auto& [p, ext] : I.preds) {
            auto it = m.sig.preds.find(p);
            if (it == m.sig.preds.end()) {
                add("interpretation", "predicate " + p + " at " + m.worlds[w] + " is not in the signature");
                interp_ok = false;
                continue;
            }
            for (const auto& t : ext) {
                if (static_cast<int>(t.size()) != it->second) {
                    add("interpretation", "tuple of wrong arity for " + p + " at " + m.worlds[w]);
                    interp_ok = false;
                }
                for (int a : t)
                    if (a < 0 || a >= m.domain_size(w)) {
                        add("interpretation", "tuple for " + p + " at " + m.worlds[w] + " leaves the domain");
                        interp_ok = false;
                    }
            }
        }
        for (const auto& c : m.sig.consts) {
            auto it = I.consts.find(c);
            if (it == I.consts.end() || it->second < 0 || it->second >= m.domain_size(w)) {
                add("constant-denotation", "constant " + c + " has no denotation in A_" + m.worlds[w]);
                interp_ok = false;
            }
        }
        for (const auto& [c, a] : I.consts)
            if (!m.sig.has_const(c)) add("interpretation", "constant " + c + " is not in the signature");
    }
    bool homs_ok = true;
    for (int w = 0; w < n; ++w)
        for (int v = 0; v < n; ++v) {
            if (!m.le(w, v)) continue;
            if (!total_map(m, w, v)) {
                add("hom-totality", "H_" + m.worlds[w] + m.worlds[v] + " is not a total map A_" + m.worlds[w] +
                                        " -> A_" + m.worlds[v]);
                homs_ok = false;
                continue;
            }
            if (w == v) {
                for (int a = 0; a < m.domain_size(w); ++a)
                    if (m.hom[w][w][a] != a) {
                        add("hom-identity", "H_" + m.worlds[w] + m.worlds[w] + " moves " + m.domains[w][a]);
                        break;
                    }
            }
        }
    if (!homs_ok) return out;
    for (int w = 0; w < n; ++w)
        for (int v = 0; v < n; ++v) {
            if (w == v || !m.le(w, v)) continue;
            if (interp_ok) {
                for (const auto& [p, ext] : m.interp[w].preds)
                    for (const auto& t : ext)
                        if (!m.holds(v, p, m.apply(w, v, t))) {
                            std::string tup;
                            for (int a : t) tup += (tup.empty() ? "" : ",") + m.domains[w][a];
                            add("predicate-preservation", p + "(" + tup + ") at " + m.worlds[w] + " not preserved at " +
                                                              m.worlds[v]);
                        }
                for (const auto& c : m.sig.consts)
                    if (m.apply(w, v, m.constant(w, c)) != m.constant(v, c))
                        add("constant-coherence", "H_" + m.worlds[w] + m.worlds[v] + " sends I(" + c + ")=" +
                                                      m.domains[w][m.constant(w, c)] + " to " +
                                                      m.domains[v][m.apply(w, v, m.constant(w, c))] + ", not " +
                                                      m.domains[v][m.constant(v, c)]);
            }
            for (int u = 0; u < n; ++u) {
                if (u == v || !m.le(v, u)) continue;
                for (int a = 0; a < m.domain_size(w); ++a)
                    if (m.apply(v, u, m.apply(w, v, a)) != m.apply(w, u, a)) {
                        add("hom-composition", "H_" + m.worlds[v] + m.worlds[u] + " o H_" + m.worlds[w] + m.worlds[v] +
                                                   " != H_" + m.worlds[w] + m.worlds[u] + " at " + m.domains[w][a]);
                        break;
                    }
            }
        }
    return out;
}

void require_valid(const KripkeModel& m) {
    auto d = validate_model(m);
    if (!d.empty()) throw Error("invalid model: " + d[0].law + ": " + d[0].detail);
}

ClassFlags classify_model(const KripkeModel& m) {
    require_valid(m);
    ClassFlags f;
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v) {
            if (!m.lt(w, v)) continue;
            std::set<int> img(m.hom[w][v].begin(), m.hom[w][v].end());
            if (static_cast<int>(img.size()) != m.domain_size(w)) f.in_class = false;
            if (static_cast<int>(img.size()) != m.domain_size(v)) f.su_class = false;
        }
    f.bi_class = f.in_class && f.su_class;
    return f;
}

bool in_class(const ClassFlags& f, ModelClass c) {
    switch (c) {
    case ModelClass::Any: return true;
    case ModelClass::In: return f.in_class;
    case ModelClass::Su: return f.su_class;
    case ModelClass::Bi: return f.bi_class;
    }
    return false;
}

const char* class_name(ModelClass c) {
    switch (c) {
    case ModelClass::Any: return "any";
    case ModelClass::In: return "In";
    case ModelClass::Su: return "Su";
    case ModelClass::Bi: return "Bi";
    }
    return "?";
}

// ---------------------------------------------------------------- structural equality

namespace {

struct Canon {
    Signature sig;
    std::set<std::string> worlds;
    std::set<std::pair<std::string, std::string>> order;
    std::map<std::string, std::set<std::string>> domains;
    std::map<std::string, std::map<std::string, std::set<std::vector<std::string>>>> preds;
    std::map<std::string, std::map<std::string, std::string>> consts;
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> homs;
};

Canon canon(const KripkeModel& m) {
    Canon c;
    c.sig = m.sig;
    for (int w = 0; w < m.size(); ++w) {
        const auto& wn = m.worlds[w];
        c.worlds.insert(wn);
        c.domains[wn] = {m.domains[w].begin(), m.domains[w].end()};
        for (const auto& [p, ext] : m.interp[w].preds) {
            auto& dst = c.preds[wn][p];
            for (const auto& t : ext) {
                std::vector<std::string> named;
                for (int a : t) named.push_back(m.domains[w][a]);
                dst.insert(named);
            }
            if (dst.empty()) c.preds[wn].erase(p);
        }
        for (const auto& [k, a] : m.interp[w].consts) c.consts[wn][k] = m.domains[w][a];
        for (int v = 0; v < m.size(); ++v) {
            if (!m.le(w, v)) continue;
            c.order.insert({wn, m.worlds[v]});
            auto& h = c.homs[{wn, m.worlds[v]}];
            for (int a = 0; a < m.domain_size(w) && a < static_cast<int>(m.hom[w][v].size()); ++a)
                h[m.domains[w][a]] = m.domains[v][m.hom[w][v][a]];
        }
    }
    return c;
}

}  // namespace

std::string structural_diff(const KripkeModel& a, const KripkeModel& b) {
    Canon x = canon(a), y = canon(b);
    if (!(x.sig == y.sig)) return "signature";
    if (x.worlds != y.worlds) return "worlds";
    if (x.order != y.order) return "order";
    if (x.domains != y.domains) return "domains";
    if (x.preds != y.preds) return "predicate interpretation";
    if (x.consts != y.consts) return "constant interpretation";
    if (x.homs != y.homs) return "homomorphisms";
    return "";
}

bool structurally_equal(const KripkeModel& a, const KripkeModel& b) { return structural_diff(a, b).empty(); }

// ---------------------------------------------------------------- submodels

KripkeModel induced_submodel(const KripkeModel& n, const std::set<int>& ws, const std::set<Element>& xs) {
    for (int w : ws)
        if (w < 0 || w >= n.size()) throw Error("world index out of range");
    for (const auto& e : xs) {
        if (!ws.count(e.world)) throw Error("element " + n.element_name(e) + " lies outside the chosen worlds");
        if (e.index < 0 || e.index >= n.domain_size(e.world)) throw Error("element index out of range");
    }
    for (int w : ws) {
        for (const auto& c : n.sig.consts)
            if (!xs.count({w, n.constant(w, c)}))
                throw Error("missing constant denotation: " + c + " at " + n.worlds[w]);
        for (int v : ws) {
            if (w == v || !n.le(w, v)) continue;
            for (int a = 0; a < n.domain_size(w); ++a)
                if (xs.count({w, a}) && !xs.count({v, n.apply(w, v, a)}))
                    throw Error("closure violation: " + n.element_name({w, a}) + " escapes to " +
                                n.element_name({v, n.apply(w, v, a)}));
        }
    }
    KripkeModel m;
    m.sig = n.sig;
    std::map<int, int> wmap;
    std::map<Element, int> emap;
    for (int w : ws) wmap[w] = m.add_world(n.worlds[w]);
    for (const auto& e : xs) emap[e] = m.add_element(wmap[e.world], n.domains[e.world][e.index]);
    for (int w : ws)
        for (int v : ws)
            if (n.le(w, v)) m.add_edge(wmap[w], wmap[v]);
    for (int w : ws) {
        int nw = wmap[w];
        for (const auto& [p, ext] : n.interp[w].preds) {
            auto& dst = m.interp[nw].preds[p];
            for (const auto& t : ext) {
                Tuple nt;
                bool inside = true;
                for (int a : t) {
                    auto it = emap.find({w, a});
                    if (it == emap.end()) {
                        inside = false;
                        break;
                    }
                    nt.push_back(it->second);
                }
                if (inside) dst.insert(nt);
            }
        }
        for (const auto& [c, a] : n.interp[w].consts) m.interp[nw].consts[c] = emap.at({w, a});
        for (int v : ws) {
            if (!n.le(w, v)) continue;
            auto& h = m.hom[nw][wmap[v]];
            h.assign(m.domain_size(nw), -1);
            for (int a = 0; a < n.domain_size(w); ++a) {
                auto it = emap.find({w, a});
                if (it != emap.end()) h[it->second] = emap.at({v, n.apply(w, v, a)});
            }
        }
    }
    return m;
}

KripkeModel generated_submodel(const KripkeModel& m, int w) {
    if (w < 0 || w >= m.size()) throw Error("unknown world");
    std::set<int> ws;
    std::set<Element> xs;
    for (int v : m.up(w)) {
        ws.insert(v);
        for (int a = 0; a < m.domain_size(v); ++a) xs.insert({v, a});
    }
    return induced_submodel(m, ws, xs);
}

KripkeModel constant_extension(const KripkeModel& m, int w, const std::vector<std::string>& consts, const Tuple& elems) {
    if (consts.size() != elems.size()) throw Error("constant and element tuples differ in length");
    if (w < 0 || w >= m.size()) throw Error("unknown world");
    std::set<std::string> seen;
    for (const auto& c : consts) {
        if (m.sig.has_const(c) || m.sig.has_pred(c)) throw Error("constant " + c + " is not fresh");
        if (!seen.insert(c).second) throw Error("constant " + c + " repeated");
    }
    for (int a : elems)
        if (a < 0 || a >= m.domain_size(w)) throw Error("element not in A_" + m.worlds[w]);
    KripkeModel g = generated_submodel(m, w);
    int gw = g.world_index(m.worlds[w]);
    for (const auto& c : consts) g.sig.consts.insert(c);
    for (int v = 0; v < g.size(); ++v)
        for (std::size_t i = 0; i < consts.size(); ++i) g.interp[v].consts[consts[i]] = g.apply(gw, v, elems[i]);
    return g;
}

KripkeModel reduct(const KripkeModel& m, const Signature& sub) {
    if (!m.sig.includes(sub)) throw Error("not a subsignature");
    KripkeModel r = m;
    r.sig = sub;
    for (auto& I : r.interp) {
        for (auto it = I.preds.begin(); it != I.preds.end();)
            it = sub.has_pred(it->first) ? std::next(it) : I.preds.erase(it);
        for (auto it = I.consts.begin(); it != I.consts.end();)
            it = sub.has_const(it->first) ? std::next(it) : I.consts.erase(it);
    }
    return r;
}

KripkeModel rename_model(const KripkeModel& m, const RenamingMap& r) {
    KripkeModel out = m;
    out.sig = rename_signature(r, m.sig);
    for (auto& I : out.interp) {
        WorldInterp J;
        for (auto& [p, ext] : I.preds) J.preds[r.preds.at(p)] = std::move(ext);
        for (auto& [c, a] : I.consts) J.consts[r.consts.at(c)] = a;
        I = std::move(J);
    }
    return out;
}

std::string submodel_violation(const KripkeModel& m, const KripkeModel& n) {
    if (!(m.sig == n.sig)) return "signature: models over different signatures";
    std::vector<int> wmap(m.size());
    for (int w = 0; w < m.size(); ++w) {
        auto nw = n.find_world(m.worlds[w]);
        if (!nw) return "node containment: world " + m.worlds[w] + " missing";
        wmap[w] = *nw;
    }
    std::vector<std::vector<int>> emap(m.size());
    for (int w = 0; w < m.size(); ++w) {
        for (int a = 0; a < m.domain_size(w); ++a) {
            auto b = n.find_element(wmap[w], m.domains[w][a]);
            if (!b) return "classical submodel: element " + m.element_name({w, a}) + " missing";
            emap[w].push_back(*b);
        }
        for (int v = 0; v < m.size(); ++v)
            if (m.le(w, v) != n.le(wmap[w], wmap[v]))
                return "order restriction: " + m.worlds[w] + ", " + m.worlds[v];
    }
    for (int w = 0; w < m.size(); ++w) {
        int nw = wmap[w];
        for (const auto& [p, k] : m.sig.preds) {
            std::set<Tuple> mine;
            auto it = m.interp[w].preds.find(p);
            if (it != m.interp[w].preds.end())
                for (const auto& t : it->second) {
                    Tuple nt;
                    for (int a : t) nt.push_back(emap[w][a]);
                    mine.insert(nt);
                }
            std::set<int> carrier(emap[w].begin(), emap[w].end());
            std::set<Tuple> theirs;
            auto jt = n.interp[nw].preds.find(p);
            if (jt != n.interp[nw].preds.end())
                for (const auto& t : jt->second)
                    if (std::all_of(t.begin(), t.end(), [&](int b) { return carrier.count(b); })) theirs.insert(t);
            if (mine != theirs) return "classical submodel: " + p + " differs at " + m.worlds[w];
        }
        for (const auto& c : m.sig.consts)
            if (emap[w][m.constant(w, c)] != n.constant(nw, c))
                return "classical submodel: constant " + c + " differs at " + m.worlds[w];
        for (int v = 0; v < m.size(); ++v) {
            if (!m.le(w, v)) continue;
            for (int a = 0; a < m.domain_size(w); ++a)
                if (emap[v][m.apply(w, v, a)] != n.apply(nw, wmap[v], emap[w][a]))
                    return "hom restriction: H_" + m.worlds[w] + m.worlds[v] + " at " + m.domains[w][a];
        }
    }
    return "";
}

bool is_submodel(const KripkeModel& m, const KripkeModel& n) { return submodel_violation(m, n).empty(); }

KripkeModel union_chain(const std::vector<KripkeModel>& chain) {
    if (chain.empty()) throw Error("empty chain");
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        auto v = submodel_violation(chain[i], chain[i + 1]);
        if (!v.empty())
            throw Error("chain condition violated between members " + std::to_string(i) + " and " +
                        std::to_string(i + 1) + ": " + v);
    }
    KripkeModel u;
    u.sig = chain.front().sig;
    for (const auto& m : chain)
        for (int w = 0; w < m.size(); ++w) {
            int uw = u.find_world(m.worlds[w]).value_or(-1);
            if (uw < 0) uw = u.add_world(m.worlds[w]);
            for (const auto& a : m.domains[w])
                if (!u.find_element(uw, a)) u.add_element(uw, a);
        }
    for (const auto& m : chain)
        for (int w = 0; w < m.size(); ++w) {
            int uw = u.world_index(m.worlds[w]);
            for (const auto& [p, ext] : m.interp[w].preds)
                for (const auto& t : ext) {
                    Tuple ut;
                    for (int a : t) ut.push_back(u.element_index(uw, m.domains[w][a]));
                    u.interp[uw].preds[p].insert(ut);
                }
            for (const auto& [c, a] : m.interp[w].consts) u.interp[uw].consts[c] = u.element_index(uw, m.domains[w][a]);
            for (int v = 0; v < m.size(); ++v) {
                if (!m.le(w, v)) continue;
                int uv = u.world_index(m.worlds[v]);
                u.add_edge(uw, uv);
                auto& h = u.hom[uw][uv];
                h.resize(u.domain_size(uw), -1);
                for (int a = 0; a < m.domain_size(w); ++a)
                    h[u.element_index(uw, m.domains[w][a])] = u.element_index(uv, m.domains[v][m.apply(w, v, a)]);
            }
        }
    return u;
}

// ---------------------------------------------------------------- isomorphism

bool check_isomorphism(const KripkeModel& m, const KripkeModel& n, const ElementMap& g, const WorldMap& h) {
    if (!(m.sig == n.sig) || m.size() != n.size() || static_cast<int>(h.size()) != m.size() ||
        static_cast<int>(g.size()) != m.size())
        return false;
    std::set<int> hs(h.begin(), h.end());
    if (static_cast<int>(hs.size()) != n.size() || *hs.begin() < 0 || *hs.rbegin() >= n.size()) return false;
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v)
            if (m.le(w, v) != n.le(h[w], h[v])) return false;
    for (int w = 0; w < m.size(); ++w) {
        int hw = h[w];
        if (static_cast<int>(g[w].size()) != m.domain_size(w) || n.domain_size(hw) != m.domain_size(w)) return false;
        std::set<int> img(g[w].begin(), g[w].end());
        if (static_cast<int>(img.size()) != n.domain_size(hw)) return false;
        if (!img.empty() && (*img.begin() < 0 || *img.rbegin() >= n.domain_size(hw))) return false;
        for (const auto& [p, k] : m.sig.preds) {
            std::set<Tuple> mine;
            auto it = m.interp[w].preds.find(p);
            if (it != m.interp[w].preds.end())
                for (const auto& t : it->second) {
                    Tuple nt;
                    for (int a : t) nt.push_back(g[w][a]);
                    mine.insert(nt);
                }
            auto jt = n.interp[hw].preds.find(p);
            std::set<Tuple> theirs = jt == n.interp[hw].preds.end() ? std::set<Tuple>{} : jt->second;
            if (mine != theirs) return false;
        }
        for (const auto& c : m.sig.consts)
            if (g[w][m.constant(w, c)] != n.constant(hw, c)) return false;
    }
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v) {
            if (!m.le(w, v)) continue;
            for (int a = 0; a < m.domain_size(w); ++a)
                if (g[v][m.apply(w, v, a)] != n.apply(h[w], h[v], g[w][a])) return false;
        }
    return true;
}

std::optional<std::pair<ElementMap, WorldMap>> find_isomorphism(const KripkeModel& m, const KripkeModel& n) {
    if (!(m.sig == n.sig) || m.size() != n.size()) return std::nullopt;
    int sz = m.size();
    WorldMap h(sz);
    std::iota(h.begin(), h.end(), 0);
    do {
        bool ok = true;
        for (int w = 0; w < sz && ok; ++w) {
            if (m.domain_size(w) != n.domain_size(h[w])) ok = false;
            for (int v = 0; v < sz && ok; ++v)
                if (m.le(w, v) != n.le(h[w], h[v])) ok = false;
        }
        if (!ok) continue;
        ElementMap g(sz);
        std::function<bool(int)> assign = [&](int w) -> bool {
            if (w == sz) return check_isomorphism(m, n, g, h);
            std::vector<int> perm(m.domain_size(w));
            std::iota(perm.begin(), perm.end(), 0);
            do {
                g[w] = perm;
                bool consistent = true;
                for (int u = 0; u < w && consistent; ++u) {
                    for (auto [x, y] : {std::pair{u, w}, std::pair{w, u}}) {
                        if (!m.le(x, y)) continue;
                        for (int a = 0; a < m.domain_size(x); ++a)
                            if (g[y][m.apply(x, y, a)] != n.apply(h[x], h[y], g[x][a])) consistent = false;
                    }
                }
                if (consistent && assign(w + 1)) return true;
            } while (std::next_permutation(perm.begin(), perm.end()));
            return false;
        };
        if (assign(0)) return std::make_pair(g, h);
    } while (std::next_permutation(h.begin(), h.end()));
    return std::nullopt;
}

// ---------------------------------------------------------------- injectivization

namespace {

using Choice = std::map<int, int>;  // world -> element

// Worlds of (w↓) other than w, ordered so that every world comes after all
// worlds above it inside (w↓).
std::vector<int> below_top_down(const KripkeModel& m, int w) {
    std::vector<int> ws;
    for (int x : m.down(w))
        if (x != w) ws.push_back(x);
    auto height = [&](int x) {
        int h = 0;
        for (int y : ws)
            if (m.lt(x, y)) ++h;
        return h;
    };
    std::stable_sort(ws.begin(), ws.end(), [&](int a, int b) { return height(a) < height(b); });
    return ws;
}

std::vector<int> candidates(const KripkeModel& m, int x, const Choice& f) {
    std::vector<int> out;
    for (int c = 0; c < m.domain_size(x); ++c) {
        bool ok = true;
        for (const auto& [y, b] : f)
            if (m.le(x, y) && m.apply(x, y, c) != b) {
                ok = false;
                break;
            }
        if (ok) out.push_back(c);
    }
    return out;
}

}  // namespace

Injectivized injectivize_full(const KripkeModel& m) {
    require_valid(m);
    if (m.sig.equality) throw Error("injectivize: equality in signature (construction unsound for equality atoms)");
    int n = m.size();
    Injectivized out;
    out.choice.resize(n);
    std::vector<std::vector<int>> order(n);
    for (int w = 0; w < n; ++w) order[w] = below_top_down(m, w);

    // Elements of A'_w: maximal compatible choices of preimages below w.
    for (int w = 0; w < n; ++w)
        for (int a = 0; a < m.domain_size(w); ++a) {
            std::function<void(std::size_t, Choice&)> grow = [&](std::size_t i, Choice& f) {
                if (i == order[w].size()) {
                    out.choice[w].push_back(f);
                    return;
                }
                int x = order[w][i];
                auto cs = candidates(m, x, f);
                if (cs.empty()) {
                    grow(i + 1, f);
                    return;
                }
                for (int c : cs) {
                    f[x] = c;
                    grow(i + 1, f);
                    f.erase(x);
                }
            };
            Choice f{{w, a}};
            grow(0, f);
        }

    KripkeModel& r = out.model;
    r.sig = m.sig;
    for (int w = 0; w < n; ++w) r.add_world(m.worlds[w]);
    r.leq = m.leq;
    auto label = [&](const Choice& f) {
        std::string s = "{";
        bool first = true;
        for (const auto& [x, c] : f) {
            s += (first ? "" : ",") + m.worlds[x] + ":" + m.domains[x][c];
            first = false;
        }
        return s + "}";
    };
    for (int w = 0; w < n; ++w)
        for (const auto& f : out.choice[w]) r.add_element(w, label(f));

    auto index_of = [&](int w, const Choice& f) {
        auto& cs = out.choice[w];
        auto it = std::find(cs.begin(), cs.end(), f);
        if (it == cs.end()) throw Error("injectivize: no element of A'_" + m.worlds[w] + " extends " + label(f));
        return static_cast<int>(it - cs.begin());
    };

    // Constants: the choice f(v) = I_v(c) on all of (w↓).
    for (const auto& c : m.sig.consts)
        for (int w = 0; w < n; ++w) {
            Choice f;
            for (int x : m.down(w)) f[x] = m.constant(x, c);
            r.interp[w].consts[c] = index_of(w, f);
        }

    for (int w = 0; w < n; ++w)
        for (const auto& [p, k] : m.sig.preds) {
            auto& ext = r.interp[w].preds[p];
            int sz = static_cast<int>(out.choice[w].size());
            Tuple t(k, 0);
            std::function<void(int)> fill = [&](int i) {
                if (i == k) {
                    Tuple base;
                    for (int e : t) base.push_back(out.choice[w][e].at(w));
                    if (m.holds(w, p, base)) ext.insert(t);
                    return;
                }
                for (int e = 0; e < sz; ++e) {
                    t[i] = e;
                    fill(i + 1);
                }
            };
            fill(0);
        }

    // H'_vw(f) extends f by w -> H_vw(f(v)); worlds of (w↓) outside (v↓) take
    // the push-forward of f where one exists, a constant's value when f agrees
    // with that constant, and the least compatible preimage otherwise.
    for (int v = 0; v < n; ++v)
        for (int w = 0; w < n; ++w) {
            if (!m.le(v, w)) continue;
            auto& h = r.hom[v][w];
            for (const auto& f : out.choice[v]) {
                if (v == w) {
                    h.push_back(static_cast<int>(h.size()));
                    continue;
                }
                Choice g = f;
                g[w] = m.apply(v, w, f.at(v));
                for (int x : order[w]) {
                    if (g.count(x)) continue;
                    auto cs = candidates(m, x, g);
                    if (cs.empty()) continue;
                    std::optional<int> pick;
                    for (const auto& [y, b] : f)
                        if (m.le(y, x)) {
                            int pushed = m.apply(y, x, b);
                            if (pick && *pick != pushed)
                                throw Error("injectivize: conflicting push-forwards at " + m.worlds[x]);
                            pick = pushed;
                        }
                    if (!pick)
                        for (const auto& c : m.sig.consts) {
                            bool agrees = std::all_of(g.begin(), g.end(), [&](const auto& yb) {
                                return m.constant(yb.first, c) == yb.second;
                            });
                            if (agrees) {
                                pick = m.constant(x, c);
                                break;
                            }
                        }
                    if (!pick) pick = cs.front();
                    if (std::find(cs.begin(), cs.end(), *pick) == cs.end())
                        throw Error("injectivize: incompatible choice forced at " + m.worlds[x]);
                    g[x] = *pick;
                }
                h.push_back(index_of(w, g));
            }
        }
    auto diags = validate_model(r);
    if (!diags.empty())
        throw Error("injectivize: construction not coherent on this frame: " + diags[0].law + ": " + diags[0].detail);
    return out;
}

KripkeModel injectivize(const KripkeModel& m) { return injectivize_full(m).model; }

// ---------------------------------------------------------------- random models

namespace {

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

std::optional<KripkeModel> attempt(std::mt19937_64& rng, const RandomModelParams& P) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto coin = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
    int min_dom = std::max(P.min_domain, P.sig.consts.empty() ? 0 : 1);
    KripkeModel m;
    m.sig = P.sig;
    int n = uni(1, P.max_worlds);
    for (int i = 0; i < n; ++i) m.add_world("w" + std::to_string(i));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(P.edge_prob)) m.add_edge(i, j);
    m.close_order();
    int bi_size = uni(std::max(1, min_dom), P.max_domain);

    for (int j = 0; j < n; ++j) {
        std::vector<int> preds;
        for (int i = 0; i < j; ++i)
            if (m.le(i, j)) preds.push_back(i);
        auto fresh = [&](int count) {
            for (int k = 0; k < count; ++k) m.add_element(j, "e" + std::to_string(m.domain_size(j)));
        };
        if (preds.empty()) {
            fresh(P.cls == ModelClass::Bi ? bi_size : uni(min_dom, P.max_domain));
            for (const auto& c : P.sig.consts) m.interp[j].consts[c] = uni(0, m.domain_size(j) - 1);
            continue;
        }
        std::vector<std::pair<int, int>> items;
        std::map<std::pair<int, int>, int> idx;
        for (int i : preds)
            for (int a = 0; a < m.domain_size(i); ++a) {
                idx[{i, a}] = static_cast<int>(items.size());
                items.push_back({i, a});
            }
        UnionFind uf(static_cast<int>(items.size()));
        for (int i : preds)
            for (int k : preds)
                if (i != k && m.le(i, k))
                    for (int a = 0; a < m.domain_size(i); ++a) uf.unite(idx[{i, a}], idx[{k, m.apply(i, k, a)}]);
        for (const auto& c : P.sig.consts)
            for (int i : preds) uf.unite(idx[{i, m.constant(i, c)}], idx[{preds[0], m.constant(preds[0], c)}]);
        std::map<int, int> cls;
        for (int x = 0; x < static_cast<int>(items.size()); ++x)
            if (!cls.count(uf.find(x))) cls.emplace(uf.find(x), static_cast<int>(cls.size()));
        int nc = static_cast<int>(cls.size());
        std::vector<int> f(nc);
        int targets = 0;
        auto hits_all = [&](int t) {
            for (int i : preds) {
                std::set<int> img;
                for (int a = 0; a < m.domain_size(i); ++a) img.insert(f[cls[uf.find(idx[{i, a}])]]);
                if (static_cast<int>(img.size()) != t) return false;
            }
            return true;
        };
        auto same_world_merge = [&]() {
            std::set<std::pair<int, int>> seen;
            for (int x = 0; x < static_cast<int>(items.size()); ++x)
                if (!seen.insert({cls[uf.find(x)], items[x].first}).second) return true;
            return false;
        };
        switch (P.cls) {
        case ModelClass::Any:
            targets = nc == 0 ? 0 : uni(1, std::min(nc, P.max_domain));
            for (auto& t : f) t = uni(0, targets - 1);
            break;
        case ModelClass::In:
        case ModelClass::Bi:
            if (nc > P.max_domain || same_world_merge()) return std::nullopt;
            targets = nc;
            std::iota(f.begin(), f.end(), 0);
            std::shuffle(f.begin(), f.end(), rng);
            if (P.cls == ModelClass::Bi && !hits_all(targets)) return std::nullopt;
            break;
        case ModelClass::Su: {
            int least = P.max_domain;
            for (int i : preds) least = std::min(least, m.domain_size(i));
            targets = least == 0 ? 0 : uni(1, least);
            bool ok = false;
            for (int tries = 0; tries < 30 && !ok; ++tries) {
                for (auto& t : f) t = uni(0, std::max(targets, 1) - 1);
                ok = hits_all(targets);
            }
            if (!ok) {
                targets = least == 0 ? 0 : 1;
                std::fill(f.begin(), f.end(), 0);
            }
            break;
        }
        }
        fresh(targets);
        if (P.cls == ModelClass::Any || P.cls == ModelClass::In) {
            int room = P.max_domain - targets;
            int extra = room > 0 ? uni(0, room) : 0;
            extra = std::max(extra, min_dom - targets);
            fresh(extra);
        }
        for (int i : preds) {
            auto& h = m.hom[i][j];
            h.resize(m.domain_size(i));
            for (int a = 0; a < m.domain_size(i); ++a) h[a] = f[cls[uf.find(idx[{i, a}])]];
        }
        for (const auto& c : P.sig.consts) m.interp[j].consts[c] = m.apply(preds[0], j, m.constant(preds[0], c));
    }
    m.complete_homs();

    for (int j = 0; j < n; ++j) {
        for (const auto& [p, k] : P.sig.preds) {
            auto& ext = m.interp[j].preds[p];
            for (int i = 0; i < j; ++i)
                if (m.le(i, j))
                    for (const auto& t : m.interp[i].preds[p]) ext.insert(m.apply(i, j, t));
            int d = m.domain_size(j);
            Tuple t(k, 0);
            std::function<void(int)> gen = [&](int pos) {
                if (pos == k) {
                    if (coin(P.fact_prob)) ext.insert(t);
                    return;
                }
                for (int a = 0; a < d; ++a) {
                    t[pos] = a;
                    gen(pos + 1);
                }
            };
            gen(0);
        }
    }
    if (!validate_model(m).empty()) return std::nullopt;
    if (!in_class(classify_model(m), P.cls)) return std::nullopt;
    return m;
}

}  // namespace

KripkeModel generate_random_model(std::uint64_t seed, const RandomModelParams& params) {
    if (params.max_worlds < 1 || params.max_domain < 1 || params.min_domain > params.max_domain)
        throw Error("random model parameters must be positive");
    params.sig.check();
    std::mt19937_64 rng(seed);
    for (int tries = 0; tries < 500; ++tries)
        if (auto m = attempt(rng, params)) return *m;
    throw Error(std::string("random model: infeasible constraints for class ") + class_name(params.cls));
}

// ---------------------------------------------------------------- fixtures

KripkeModel fixture_chain(bool equality) {
    KripkeModel m;
    m.sig.preds = {{"P", 1}};
    m.sig.equality = equality;
    int w = m.add_world("w"), v = m.add_world("v");
    m.add_edge(w, v);
    m.close_order();
    m.add_element(w, "a");
    m.add_element(v, "b");
    m.interp[v].preds["P"] = {{0}};
    m.hom[w][v] = {0};
    m.complete_homs();
    return m;
}

KripkeModel fixture_cd() {
    KripkeModel m;
    m.sig.preds = {{"P", 1}, {"Q", 1}};
    m.sig.consts = {"c"};
    int w = m.add_world("w"), v = m.add_world("v");
    m.add_edge(w, v);
    m.close_order();
    m.add_element(w, "a");
    m.add_element(v, "b");
    m.add_element(v, "b2");
    m.interp[w].preds["P"] = {{0}};
    m.interp[w].consts["c"] = 0;
    m.interp[v].preds["P"] = {{0}};
    m.interp[v].preds["Q"] = {{0}};
    m.interp[v].consts["c"] = 0;
    m.hom[w][v] = {0};
    m.complete_homs();
    return m;
}

KripkeModel fixture_eq() {
    KripkeModel m;
    m.sig.equality = true;
    int w = m.add_world("w"), v = m.add_world("v");
    m.add_edge(w, v);
    m.close_order();
    m.add_element(w, "a1");
    m.add_element(w, "a2");
    m.add_element(v, "b");
    m.hom[w][v] = {0, 0};
    m.complete_homs();
    return m;
}

}  // namespace kwb
