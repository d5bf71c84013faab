#include "kwb/asimulation.hpp"

#include <algorithm>
#include <map>
#include <functional>
#include <tuple>

namespace kwb {

namespace {

using TermPairs = std::vector<std::pair<int, int>>;

struct Game {
    Logic logic;
    const KripkeModel* m[2];
    std::vector<std::pair<std::string, int>> preds;
    std::vector<std::string> consts;

    Game(Logic l, const KripkeModel& m1, const KripkeModel& m2) : logic(l), m{&m1, &m2} {
        if (m1.sig.preds != m2.sig.preds || m1.sig.consts != m2.sig.consts)
            throw Error("asimulation: models have different signatures");
        check_admissible(logic, m1);
        check_admissible(logic, m2);
        for (const auto& pk : m1.sig.preds) preds.push_back(pk);
        consts.assign(m1.sig.consts.begin(), m1.sig.consts.end());
    }

    const KripkeModel& src(int dir) const { return *m[dir]; }
    const KripkeModel& tgt(int dir) const { return *m[1 - dir]; }

    void add_constants(int dir, int w, int v, TermPairs& terms) const {
        for (const auto& c : consts) terms.push_back({src(dir).constant(w, c), tgt(dir).constant(v, c)});
    }

    // (atom) over the terms: every atomic sentence true at the source is true
    // at the target. Returns a description of the failure or "".
    std::string atom_failure(int dir, int w, int v, const TermPairs& terms) const {
        const KripkeModel& s = src(dir);
        const KripkeModel& t = tgt(dir);
        if (logic.equality()) {
            for (const auto& p : terms)
                for (const auto& q : terms)
                    if (p.first == q.first && p.second != q.second) return "equality not preserved";
        }
        std::size_t n = terms.size();
        for (const auto& [pred, k] : preds) {
            if (n == 0 && k > 0) continue;
            std::vector<std::size_t> sel(k, 0);
            Tuple a(k), b(k);
            while (true) {
                for (int i = 0; i < k; ++i) a[i] = terms[sel[i]].first, b[i] = terms[sel[i]].second;
                if (s.holds(w, pred, a) && !t.holds(v, pred, b)) return pred + " not preserved";
                int i = k - 1;
                while (i >= 0 && ++sel[i] == n) sel[i--] = 0;
                if (i < 0) break;
            }
        }
        return "";
    }
};

Tuple append(Tuple t, int x) {
    t.push_back(x);
    return t;
}

template <class In>
std::string raw_violation(const Game& g, const RawPair& p, const In& in, int bound) {
    const KripkeModel& s = g.src(p.dir);
    const KripkeModel& t = g.tgt(p.dir);
    TermPairs terms;
    for (std::size_t i = 0; i < p.alpha.size(); ++i) terms.push_back({p.alpha[i], p.beta[i]});
    g.add_constants(p.dir, p.w, p.v, terms);
    if (!g.atom_failure(p.dir, p.w, p.v, terms).empty()) return "atom";
    for (int tt : t.up(p.v)) {
        Tuple hb = t.apply(p.v, tt, p.beta);
        bool found = false;
        for (int u : s.up(p.w)) {
            Tuple ha = s.apply(p.w, u, p.alpha);
            if (in(RawPair{p.dir, u, ha, tt, hb}) && in(RawPair{1 - p.dir, tt, hb, u, ha})) {
                found = true;
                break;
            }
        }
        if (!found) return "s-back";
    }
    if (static_cast<int>(p.alpha.size()) >= bound) return "";
    for (int a = 0; a < s.domain_size(p.w); ++a) {
        bool found = false;
        for (int b = 0; b < t.domain_size(p.v) && !found; ++b)
            found = in(RawPair{p.dir, p.w, append(p.alpha, a), p.v, append(p.beta, b)});
        if (!found) return "obj-forth";
    }
    for (int tt : t.up(p.v)) {
        Tuple hb = t.apply(p.v, tt, p.beta);
        for (int b = 0; b < t.domain_size(tt); ++b) {
            bool found = false;
            for (int u : s.up(p.w)) {
                Tuple ha = s.apply(p.w, u, p.alpha);
                for (int a = 0; a < s.domain_size(u) && !found; ++a)
                    found = in(RawPair{p.dir, u, append(ha, a), tt, append(hb, b)});
                if (found) break;
            }
            if (!found) return "obj-back";
        }
    }
    return "";
}

void check_shape(const Game& g, const RawPair& p) {
    if (p.dir != 0 && p.dir != 1) throw Error("malformed pair: direction must be 0 or 1");
    const KripkeModel& s = g.src(p.dir);
    const KripkeModel& t = g.tgt(p.dir);
    if (p.w < 0 || p.w >= s.size() || p.v < 0 || p.v >= t.size()) throw Error("malformed pair: world out of range");
    for (int a : p.alpha)
        if (a < 0 || a >= s.domain_size(p.w)) throw Error("malformed pair: element out of range");
    for (int b : p.beta)
        if (b < 0 || b >= t.domain_size(p.v)) throw Error("malformed pair: element out of range");
}

void for_each_tuple(int dom, int len, const std::function<void(const Tuple&)>& f) {
    for (const auto& t : tuples_upto(dom, len))
        if (static_cast<int>(t.size()) == len) f(t);
}

std::string tuple_text(const KripkeModel& m, int w, const Tuple& t) {
    std::string s = m.worlds[w] + ";";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + m.domains[w][t[i]];
    return "(" + s + ")";
}

}  // namespace

std::string describe_pair(const KripkeModel& m1, const KripkeModel& m2, const RawPair& p) {
    const KripkeModel& s = p.dir == 0 ? m1 : m2;
    const KripkeModel& t = p.dir == 0 ? m2 : m1;
    return std::string(p.dir == 0 ? "1>2 " : "2>1 ") + tuple_text(s, p.w, p.alpha) + " A " + tuple_text(t, p.v, p.beta);
}

RawCheck check_asimulation_raw(Logic logic, const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a,
                               const RawPair& start, std::optional<int> bound) {
    Game g(logic, m1, m2);
    int limit = 0;
    for (const auto& p : a) {
        check_shape(g, p);
        limit = std::max(limit, static_cast<int>(p.alpha.size()));
    }
    if (bound) limit = *bound;
    auto fail = [&](const char* cond, const RawPair& p) {
        return RawCheck{false, cond, describe_pair(m1, m2, p)};
    };
    for (const auto& p : a)
        if (p.alpha.size() != p.beta.size()) return fail("type", p);
    if (start.dir != 0 || !a.count(start)) return fail("elem", start);
    auto in = [&](const RawPair& q) { return a.count(q) > 0; };
    for (const auto& p : a) {
        std::string v = raw_violation(g, p, in, limit);
        if (!v.empty()) {
            RawCheck r = fail("", p);
            r.condition = v;
            return r;
        }
    }
    return {};
}

RawAsimulation bounded_raw_asimulation(Logic logic, const KripkeModel& m1, const KripkeModel& m2, int max_len) {
    Game g(logic, m1, m2);
    RawAsimulation alive;
    for (int dir = 0; dir < 2; ++dir) {
        const KripkeModel& s = g.src(dir);
        const KripkeModel& t = g.tgt(dir);
        for (int w = 0; w < s.size(); ++w)
            for (int v = 0; v < t.size(); ++v)
                for (int l = 0; l <= max_len; ++l)
                    for_each_tuple(s.domain_size(w), l, [&](const Tuple& al) {
                        for_each_tuple(t.domain_size(v), l, [&](const Tuple& be) {
                            TermPairs terms;
                            for (int i = 0; i < l; ++i) terms.push_back({al[i], be[i]});
                            g.add_constants(dir, w, v, terms);
                            if (g.atom_failure(dir, w, v, terms).empty()) alive.insert({dir, w, al, v, be});
                        });
                    });
    }
    auto in = [&](const RawPair& q) { return alive.count(q) > 0; };
    for (bool changed = true; changed;) {
        changed = false;
        for (auto it = alive.begin(); it != alive.end();) {
            if (!raw_violation(g, *it, in, max_len).empty()) {
                it = alive.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
    return alive;
}

// ---------------------------------------------------------------- quotient

const AsimRelation::Block& AsimRelation::block(int dir, int w, int v) const {
    return blocks_[dir * n_[0] * n_[1] + w * n_[1 - dir] + v];
}

AsimRelation::Block& AsimRelation::block(int dir, int w, int v) {
    return blocks_[dir * n_[0] * n_[1] + w * n_[1 - dir] + v];
}

bool AsimRelation::contains(int dir, int w, int v, std::uint64_t rel) const {
    const Block& b = block(dir, w, v);
    return rel < b.alive.size() && b.alive[rel];
}

std::uint64_t AsimRelation::mask(int dir, int w, int v, const Tuple& alpha, const Tuple& beta) const {
    const Block& b = block(dir, w, v);
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) r |= std::uint64_t{1} << (alpha[i] * b.tgt_size + beta[i]);
    return r;
}

bool AsimRelation::contains(const RawPair& p) const {
    if (p.alpha.size() != p.beta.size()) return false;
    return contains(p.dir, p.w, p.v, mask(p.dir, p.w, p.v, p.alpha, p.beta));
}

std::size_t AsimRelation::surviving() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += std::count(b.alive.begin(), b.alive.end(), 1);
    return n;
}

std::size_t AsimRelation::space() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.alive.size();
    return n;
}

RawAsimulation AsimRelation::expand(int max_len) const {
    RawAsimulation out;
    for (int dir = 0; dir < 2; ++dir)
        for (int w = 0; w < n_[dir]; ++w)
            for (int v = 0; v < n_[1 - dir]; ++v) {
                const Block& b = block(dir, w, v);
                int cells = b.src_size * b.tgt_size;
                for (int l = 0; l <= max_len; ++l)
                    for_each_tuple(cells, l, [&](const Tuple& cs) {
                        std::uint64_t r = 0;
                        Tuple al, be;
                        for (int c : cs) {
                            r |= std::uint64_t{1} << c;
                            al.push_back(c / b.tgt_size);
                            be.push_back(c % b.tgt_size);
                        }
                        if (b.alive[r]) out.insert({dir, w, al, v, be});
                    });
            }
    return out;
}

AsimRelation asimulation_fixpoint(Logic logic, const KripkeModel& m1, const KripkeModel& m2) {
    Game g(logic, m1, m2);
    AsimRelation rel;
    rel.n_[0] = m1.size();
    rel.n_[1] = m2.size();
    std::uint64_t total = 0;
    for (int dir = 0; dir < 2; ++dir)
        for (int w = 0; w < g.src(dir).size(); ++w)
            for (int v = 0; v < g.tgt(dir).size(); ++v) {
                int bits = g.src(dir).domain_size(w) * g.tgt(dir).domain_size(v);
                if (bits >= 40) throw Error("asimulation: position space exceeds the budget of 2^20");
                total += std::uint64_t{1} << bits;
            }
    if (total > kPositionBudget)
        throw Error("asimulation: position space " + std::to_string(total) + " exceeds the budget of 2^20");

    rel.blocks_.resize(2 * m1.size() * m2.size());
    for (int dir = 0; dir < 2; ++dir)
        for (int w = 0; w < g.src(dir).size(); ++w)
            for (int v = 0; v < g.tgt(dir).size(); ++v) {
                auto& b = rel.block(dir, w, v);
                b.src_size = g.src(dir).domain_size(w);
                b.tgt_size = g.tgt(dir).domain_size(v);
                b.alive.assign(std::size_t{1} << (b.src_size * b.tgt_size), 0);
                for (std::uint64_t r = 0; r < b.alive.size(); ++r) {
                    TermPairs terms;
                    for (int c = 0; c < b.src_size * b.tgt_size; ++c)
                        if (r >> c & 1) terms.push_back({c / b.tgt_size, c % b.tgt_size});
                    g.add_constants(dir, w, v, terms);
                    b.alive[r] = g.atom_failure(dir, w, v, terms).empty();
                }
            }

    // H-image of a pair set, as a mask in block (dir,u,t) or, swapped, in (1-dir,t,u).
    auto image = [&](int dir, int w, int v, std::uint64_t r, int u, int t, bool swapped) {
        const KripkeModel& s = g.src(dir);
        const KripkeModel& tm = g.tgt(dir);
        int nb = tm.domain_size(v), nu = s.domain_size(u), nt = tm.domain_size(t);
        std::uint64_t out = 0;
        for (int c = 0; r >> c; ++c) {
            if (!(r >> c & 1)) continue;
            int a = s.apply(w, u, c / nb), b = tm.apply(v, t, c % nb);
            out |= std::uint64_t{1} << (swapped ? b * nu + a : a * nt + b);
        }
        return out;
    };

    auto survives = [&](int dir, int w, int v, std::uint64_t r) {
        const KripkeModel& s = g.src(dir);
        const KripkeModel& tm = g.tgt(dir);
        int nb = tm.domain_size(v);
        for (int t : tm.up(v)) {
            bool found = false;
            for (int u : s.up(w)) {
                if (rel.contains(dir, u, t, image(dir, w, v, r, u, t, false)) &&
                    rel.contains(1 - dir, t, u, image(dir, w, v, r, u, t, true))) {
                    found = true;
                    break;
                }
            }
            if (!found) return false;
        }
        for (int a = 0; a < s.domain_size(w); ++a) {
            bool found = false;
            for (int b = 0; b < nb && !found; ++b) found = rel.contains(dir, w, v, r | std::uint64_t{1} << (a * nb + b));
            if (!found) return false;
        }
        for (int t : tm.up(v)) {
            int nt = tm.domain_size(t);
            for (int b = 0; b < nt; ++b) {
                bool found = false;
                for (int u : s.up(w)) {
                    std::uint64_t hr = image(dir, w, v, r, u, t, false);
                    for (int a = 0; a < s.domain_size(u) && !found; ++a)
                        found = rel.contains(dir, u, t, hr | std::uint64_t{1} << (a * nt + b));
                    if (found) break;
                }
                if (!found) return false;
            }
        }
        return true;
    };

    for (bool changed = true; changed;) {
        changed = false;
        for (int dir = 0; dir < 2; ++dir)
            for (int w = 0; w < g.src(dir).size(); ++w)
                for (int v = 0; v < g.tgt(dir).size(); ++v) {
                    auto& alive = rel.block(dir, w, v).alive;
                    for (std::uint64_t r = 0; r < alive.size(); ++r)
                        if (alive[r] && !survives(dir, w, v, r)) {
                            alive[r] = 0;
                            changed = true;
                        }
                }
    }
    return rel;
}

std::optional<AsimRelation> greatest_asimulation(Logic logic, const KripkeModel& m1, int w1, const Tuple& a,
                                                 const KripkeModel& m2, int w2, const Tuple& b) {
    if (a.size() != b.size()) throw Error("asimulation: tuples differ in length");
    AsimRelation rel = asimulation_fixpoint(logic, m1, m2);
    Game g(logic, m1, m2);
    check_shape(g, RawPair{0, w1, a, w2, b});
    if (!rel.contains(RawPair{0, w1, a, w2, b})) return std::nullopt;
    return rel;
}

bool asim_exists(Logic logic, const KripkeModel& m1, int w1, const Tuple& a, const KripkeModel& m2, int w2,
                 const Tuple& b) {
    return greatest_asimulation(logic, m1, w1, a, m2, w2, b).has_value();
}

// ---------------------------------------------------------------- derived relations

Projection project_subtuple(const RawAsimulation& a, const RawPair& start, const std::vector<int>& indices) {
    for (int i : indices)
        if (i < 0 || i >= static_cast<int>(start.alpha.size()))
            throw Error("project_subtuple: index " + std::to_string(i) + " out of range");
    int limit = 0;
    for (const auto& p : a) limit = std::max(limit, static_cast<int>(p.alpha.size()));
    Projection out;
    for (const auto& p : a) {
        int m = static_cast<int>(p.alpha.size());
        for (int l = 0; l <= limit; ++l)
            for_each_tuple(m, l, [&](const Tuple& sel) {
                RawPair q{p.dir, p.w, {}, p.v, {}};
                for (int i : sel) {
                    q.alpha.push_back(p.alpha[i]);
                    q.beta.push_back(p.beta[i]);
                }
                out.rel.insert(q);
            });
    }
    out.start = {start.dir, start.w, {}, start.v, {}};
    for (int i : indices) {
        out.start.alpha.push_back(start.alpha[i]);
        out.start.beta.push_back(start.beta[i]);
    }
    return out;
}

Restriction restrict_generated(const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a,
                               const RawPair& start) {
    if (start.dir != 0 || !a.count(start)) throw Error("restrict_generated: start pair absent");
    Restriction out;
    auto consts1 = type_constants(m1.sig, start.alpha.size());
    out.ext1 = constant_extension(m1, start.w, consts1, start.alpha);
    out.ext2 = constant_extension(m2, start.v, consts1, start.beta);
    const KripkeModel* base[2] = {&m1, &m2};
    const KripkeModel* ext[2] = {&out.ext1, &out.ext2};
    int root[2] = {start.w, start.v};
    auto inside = [&](int side, int w) { return base[side]->le(root[side], w); };
    auto move = [&](int side, int w) { return ext[side]->world_index(base[side]->worlds[w]); };
    for (const auto& p : a) {
        int s = p.dir, t = 1 - p.dir;
        if (!inside(s, p.w) || !inside(t, p.v)) continue;
        out.rel.insert({p.dir, move(s, p.w), p.alpha, move(t, p.v), p.beta});
    }
    out.start = {0, move(0, start.w), start.alpha, move(1, start.v), start.beta};
    return out;
}

RawAsimulation relation_from_type_inclusion(Logic logic, const KripkeModel& m1, const KripkeModel& m2, int d,
                                            int max_len, const SliceCaps& caps) {
    Game g(logic, m1, m2);
    // Slices per (side, world, tuple).
    std::map<std::tuple<int, int, Tuple>, TheorySlice> slices;
    for (int side = 0; side < 2; ++side) {
        const KripkeModel& m = *g.m[side];
        for (int w = 0; w < m.size(); ++w)
            for (const auto& t : tuples_upto(m.domain_size(w), max_len))
                slices[{side, w, t}] = type_slice(logic, m, w, t, d, caps);
    }
    RawAsimulation out;
    for (const auto& [k1, s1] : slices)
        for (const auto& [k2, s2] : slices) {
            const auto& [side1, w, al] = k1;
            const auto& [side2, v, be] = k2;
            if (side1 == side2 || al.size() != be.size()) continue;
            if (positive_included(s1, s2)) out.insert({side1, w, al, v, be});
        }
    return out;
}

RawAsimulation identity_relation(const KripkeModel& m, int max_len) {
    RawAsimulation out;
    for (int dir = 0; dir < 2; ++dir)
        for (int w = 0; w < m.size(); ++w)
            for (const auto& t : tuples_upto(m.domain_size(w), max_len)) out.insert({dir, w, t, w, t});
    return out;
}

// ---------------------------------------------------------------- json

namespace {

Json side_json(const KripkeModel& m, int w, const Tuple& t) {
    Json tup = Json::array();
    for (int a : t) tup.push_back(m.domains[w][a]);
    return {{"world", m.worlds[w]}, {"tuple", tup}};
}

std::pair<int, Tuple> side_from(const KripkeModel& m, const Json& j) {
    if (!j.is_object() || !j.contains("world")) throw ParseError("asimulation file: pair side needs a world", 0);
    auto w = m.find_world(j["world"].get<std::string>());
    if (!w) throw ParseError("asimulation file: unknown world " + j["world"].get<std::string>(), 0);
    Tuple t;
    if (j.contains("tuple"))
        for (const auto& e : j["tuple"]) {
            auto a = m.find_element(*w, e.get<std::string>());
            if (!a) throw ParseError("asimulation file: unknown element " + e.get<std::string>(), 0);
            t.push_back(*a);
        }
    return {*w, t};
}

}  // namespace

Json raw_to_json(const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a) {
    Json out = Json::array();
    for (const auto& p : a) {
        const KripkeModel& s = p.dir == 0 ? m1 : m2;
        const KripkeModel& t = p.dir == 0 ? m2 : m1;
        out.push_back({{"dir", p.dir == 0 ? "1>2" : "2>1"}, {"from", side_json(s, p.w, p.alpha)},
                       {"to", side_json(t, p.v, p.beta)}});
    }
    return out;
}

RawAsimulation raw_from_json(const KripkeModel& m1, const KripkeModel& m2, const Json& j) {
    if (!j.is_array()) throw ParseError("asimulation file: expected a list of pairs", 0);
    RawAsimulation out;
    try {
        for (const auto& rec : j) {
            std::string dir = rec.at("dir").get<std::string>();
            if (dir != "1>2" && dir != "2>1") throw ParseError("asimulation file: dir must be 1>2 or 2>1", 0);
            int d = dir == "1>2" ? 0 : 1;
            auto [w, al] = side_from(d == 0 ? m1 : m2, rec.at("from"));
            auto [v, be] = side_from(d == 0 ? m2 : m1, rec.at("to"));
            out.insert({d, w, al, v, be});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("asimulation file: ") + e.what(), 0);
    }
    return out;
}

}  // namespace kwb
