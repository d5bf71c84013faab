#include <doctest.h>

#include <random>

#include "kwb/suites.hpp"
#include "kwb/transforms.hpp"

using namespace kwb;

namespace {

RawPair root(int w, int v) { return {0, w, {}, v, {}}; }

// Both directions of B, the reverse one by swapping the models.
bool relation_ok(Logic logic, const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& b, int w1, int w2,
                 int len) {
    if (!check_asimulation_raw(logic, m1, m2, b, root(w1, w2), len).ok) return false;
    RawAsimulation flipped;
    for (auto p : b) {
        p.dir = 1 - p.dir;
        flipped.insert(p);
    }
    return check_asimulation_raw(logic, m2, m1, flipped, root(w2, w1), len).ok;
}

KripkeModel diamond() {
    KripkeModel m;
    m.sig.preds = {{"P", 1}};
    for (const char* w : {"r", "a", "b", "t"}) m.add_element(m.add_world(w), "e");
    m.add_edge(0, 1);
    m.add_edge(0, 2);
    m.add_edge(1, 3);
    m.add_edge(2, 3);
    m.close_order();
    m.complete_homs();
    for (int w = 0; w < 4; ++w)
        for (int v = 0; v < 4; ++v)
            if (m.le(w, v)) m.hom[w][v] = {0};
    m.interp[1].preds["P"] = {{0}};
    m.interp[3].preds["P"] = {{0}};
    return m;
}

// Direct congruence conditions: equivalence at each world, carried along
// every hom, respected by every predicate.
bool congruence_by_definition(const KripkeModel& m, const Congruence& c) {
    for (int w = 0; w < m.size(); ++w) {
        int n = m.domain_size(w);
        for (int v : m.up(w))
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    if (c.related(w, a, b) && !c.related(v, m.apply(w, v, a), m.apply(w, v, b))) return false;
        for (const auto& [p, k] : m.sig.preds)
            for (const auto& t : tuples_upto(n, k)) {
                if (static_cast<int>(t.size()) != k) continue;
                for (const auto& u : tuples_upto(n, k)) {
                    if (static_cast<int>(u.size()) != k) continue;
                    bool rel = true;
                    for (int i = 0; i < k; ++i) rel = rel && c.related(w, t[i], u[i]);
                    if (rel && m.holds(w, p, t) != m.holds(w, p, u)) return false;
                }
            }
    }
    return true;
}

Congruence random_partition(std::mt19937_64& rng, const KripkeModel& m) {
    std::vector<std::pair<Element, int>> pairs;
    for (int w = 0; w < m.size(); ++w)
        for (int a = 0; a < m.domain_size(w); ++a)
            if (rng() % 2) pairs.push_back({{w, a}, static_cast<int>(rng() % m.domain_size(w))});
    return Congruence::generated(m, pairs);
}

}  // namespace

TEST_CASE("unravel: trees are their own unravelling") {
    auto c = fixture_chain();
    auto u = unravel_full(c, 0);
    CHECK(u.model.size() == 2);
    CHECK(u.model.worlds[1] == "w>v");
    CHECK(find_isomorphism(u.model, c));
    auto cd = fixture_cd();
    CHECK(find_isomorphism(unravel(cd, 0), cd));
    auto top = unravel(cd, 1);
    CHECK(top.size() == 1);
}

TEST_CASE("unravel: the diamond splits into a tree") {
    auto d = diamond();
    auto u = unravel_full(d, 0);
    // r, r>a, r>b, r>t, r>a>t, r>b>t
    CHECK(u.model.size() == 6);
    CHECK(validate_model(u.model).empty());
    for (int s = 0; s < u.model.size(); ++s) {
        auto below = u.model.down(s);
        for (int x : below)
            for (int y : below) CHECK((u.model.le(x, y) || u.model.le(y, x)));
    }
    CHECK(relation_ok(LogicId::IL, d, u.model, unravel_relation(d, u, 2), 0, u.root, 2));

    auto b = unravel_full(d, 0, UnravelMode::bounded(2));
    // r plus one step to each of r, a, b, t
    CHECK(b.model.size() == 5);
    CHECK_THROWS_AS(unravel(d, 0, UnravelMode::bounded(0)), Error);
    CHECK_THROWS_AS(unravel(d, 9), Error);
}

TEST_CASE("unravel: B relates every random model to its unravelling") {
    Signature s;
    s.preds = {{"P", 1}, {"R", 2}};
    s.consts = {"c"};
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto m = generate_random_model(seed, {3, 2, 1, s, ModelClass::Any, 0.6, 0.3});
        for (int w = 0; w < m.size(); ++w) {
            auto u = unravel_full(m, w);
            REQUIRE(validate_model(u.model).empty());
            CHECK(relation_ok(LogicId::IL, m, u.model, unravel_relation(m, u, 2), w, u.root, 2));
            CHECK(slice_equal(theory_slice(LogicId::IL, m, w, 2), theory_slice(LogicId::IL, u.model, u.root, 2)));
            ++n;
        }
    }
    CHECK(n >= 40);
}

TEST_CASE("unravel: bounded depth k agrees with the model up to rank 1") {
    auto corpus = small_corpus();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& m = corpus[i];
        for (int w = 0; w < m.size(); ++w)
            for (int k = 1; k <= 4; ++k) {
                auto b = unravel_full(m, w, UnravelMode::bounded(k));
                int d = std::min(k - 1, 1);
                INFO("model ", i, " world ", m.worlds[w], " k ", k);
                CHECK(slice_equal(theory_slice(LogicId::IL, m, w, d), theory_slice(LogicId::IL, b.model, b.root, d)));
            }
    }
}

TEST_CASE("unravel: bounded leaves are final, so rank 2 can already differ") {
    // w0 {a: P} below w1 {a, e}; the leaf w0>w0>w0 has no successor and forces forall x. P(x)
    KripkeModel m;
    m.sig.preds = {{"P", 1}};
    int w0 = m.add_world("w0"), w1 = m.add_world("w1");
    m.add_element(w0, "a");
    m.add_element(w1, "a");
    m.add_element(w1, "e");
    m.add_edge(w0, w1);
    m.close_order();
    m.hom[w0][w1] = {0};
    m.complete_homs();
    m.interp[w0].preds["P"] = {{0}};
    m.interp[w1].preds["P"] = {{0}};
    Formula f = parse_formula("~forall x. P(x)", m.sig);
    CHECK(eval(LogicId::IL, m, w0, f));
    for (int k = 2; k <= 5; ++k) {
        auto b = unravel_full(m, w0, UnravelMode::bounded(k));
        CHECK_FALSE(eval(LogicId::IL, b.model, b.root, f));
    }
    CHECK(eval(LogicId::IL, unravel(m, w0), 0, f));
}

TEST_CASE("congruences: diagonal and generated") {
    auto cd = fixture_cd();
    auto diag = Congruence::diagonal(cd);
    for (auto logic : Logic::all()) {
        if (logic.model_class() != ModelClass::Any && logic.model_class() != ModelClass::In) continue;
        CHECK(congruence_diagnostics(logic, cd, diag).empty());
    }
    auto g = Congruence::generated(cd, {{{1, 1}, 0}});
    CHECK(g.related(1, 0, 1));
    CHECK(g.cls[1] == std::vector<int>{0, 0});
    // b and b2 differ on P at v
    CHECK_FALSE(check_congruence(LogicId::IL, cd, g));
    CHECK_THROWS_AS(Congruence::generated(cd, {{{0, 0}, 1}}), Error);

    Congruence bad;
    bad.cls = {{0}};
    CHECK(congruence_diagnostics(LogicId::IL, cd, bad).front().law == "shape");
}

TEST_CASE("congruences: merging under equality is refused") {
    auto eq = fixture_eq();
    auto m = Congruence::generated(eq, {{{0, 1}, 0}});
    bool diagonal_law = false;
    for (const auto& d : congruence_diagnostics(LogicId::ILeq, eq, m)) diagonal_law |= d.law == "diagonal";
    CHECK(diagonal_law);
    auto plain = eq;
    plain.sig.equality = false;
    CHECK(check_congruence(LogicId::IL, plain, m));
    auto q = quotient(LogicId::IL, plain, m);
    CHECK(q.domain_size(0) == 1);
    CHECK(q.domains[0][0] == "[a1,a2]");
}

TEST_CASE("congruence check agrees with the definition on random partitions") {
    Signature s;
    s.preds = {{"P", 1}, {"R", 2}};
    std::mt19937_64 rng(31);
    int yes = 0, no = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto m = generate_random_model(seed, {3, 3, 1, s, ModelClass::Any, 0.5, 0.2});
        for (int i = 0; i < 4; ++i) {
            auto c = random_partition(rng, m);
            bool expect = congruence_by_definition(m, c);
            CHECK(check_congruence(LogicId::IL, m, c) == expect);
            (expect ? yes : no)++;
        }
    }
    CHECK(yes > 50);
    CHECK(no > 50);
}

TEST_CASE("unary profile congruence and quotient") {
    Signature s;
    s.preds = {{"P", 1}, {"Q", 1}};
    s.consts = {"c"};
    int merged = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto m = generate_random_model(seed, {3, 3, 1, s, ModelClass::Any, 0.5, 0.3});
        auto c = unary_profile_congruence(m);
        REQUIRE(congruence_by_definition(m, c));
        auto q = quotient_full(LogicId::IL, m, c);
        REQUIRE(validate_model(q.model).empty());
        for (int w = 0; w < m.size(); ++w) {
            merged += q.model.domain_size(w) < m.domain_size(w);
            CHECK(relation_ok(LogicId::IL, m, q.model, quotient_relation(m, q, 2), w, w, 2));
            CHECK(slice_equal(theory_slice(LogicId::IL, m, w, 2), theory_slice(LogicId::IL, q.model, w, 2)));
        }
    }
    CHECK(merged > 0);
    CHECK_THROWS_AS(quotient(LogicId::IL, fixture_cd(), Congruence::generated(fixture_cd(), {{{1, 1}, 0}})), Error);
}

TEST_CASE("star expansion and its formulas") {
    auto c = fixture_chain();
    auto s = star_expand(c, 0);
    CHECK(validate_model(s.model).empty());
    CHECK(s.base == c.sig);
    CHECK(s.plus.at({0, 0}) == "Pp_w_a");
    CHECK(s.minus.at({1, 0}) == "Pm_v_b");
    CHECK(s.model.holds(1, "Pp_w_a", {0}));
    CHECK_FALSE(s.model.holds(0, "Pm_w_a", {0}));
    CHECK(s.model.holds(1, "Pm_w_a", {0}));
    CHECK_FALSE(s.model.holds(1, "Pm_v_b", {0}));

    auto [qp, qm] = q_formulas(s, 0);
    CHECK(print_formula(qp) == "exists x. Pp_w_a(x)");
    CHECK(print_formula(qm) == "forall x. Pm_w_a(x)");
    CHECK(eval(LogicId::IL, s.model, 0, qp));
    CHECK_FALSE(eval(LogicId::IL, s.model, 0, qm));
    CHECK(eval(LogicId::IL, s.model, 1, qp));
    CHECK(eval(LogicId::IL, s.model, 1, qm));
    // below w nothing forces Q+_v
    auto [vp, vm] = q_formulas(s, 1);
    CHECK_FALSE(eval(LogicId::IL, s.model, 0, vp));
    CHECK_FALSE(eval(LogicId::IL, s.model, 1, vm));
    CHECK_THROWS_AS(star_expand(c, 4), Error);
}

TEST_CASE("star congruence collapses duplicated elements") {
    auto c = fixture_cd();
    auto s = star_expand(c, 0);
    auto self = derive_star_congruence(s, s.model, 0);
    CHECK(self.cong.cls == Congruence::diagonal(s.model).cls);

    // add a copy of b at v carrying every unary fact of b
    KripkeModel n = s.model;
    int v = n.world_index("v");
    int copy = n.add_element(v, "b'");
    n.hom[v][v].push_back(copy);
    for (auto& [p, ext] : n.interp[v].preds)
        if (n.sig.preds.at(p) == 1 && ext.count({0})) ext.insert({copy});
    REQUIRE(validate_model(n).empty());
    auto d = derive_star_congruence(s, n, 0);
    CHECK(d.cong.related(v, 0, copy));
    CHECK_FALSE(d.cong.related(v, 0, 1));
    CHECK(check_congruence(LogicId::IL, d.model, d.cong));
    CHECK(find_isomorphism(quotient(LogicId::IL, d.model, d.cong), s.model));
    CHECK_THROWS_AS(derive_star_congruence(c, 0, {"P", "Nope"}), Error);
    CHECK_THROWS_AS(derive_star_congruence(c, 0, {}), Error);
}

TEST_CASE("isomorphic correction") {
    auto cd = fixture_cd();
    int v = cd.world_index("v");
    auto top = generated_submodel(cd, v);
    ElementMap g{{0, 1}};
    auto r = isomorphic_correction(LogicId::IL, top, cd, g, {v}, 1);
    CHECK(validate_model(r.model).empty());
    CHECK(r.model.size() == 2);
    CHECK(r.model.worlds[0] == "v");
    CHECK(r.model.domains[0] == cd.domains[v]);
    CHECK(check_isomorphism(r.model, cd, r.g, r.h));
    CHECK(is_submodel(top, r.model));
    CHECK_THROWS_AS(isomorphic_correction(LogicId::IL, top, cd, ElementMap{{1, 0}}, {v}, 1), Error);

    auto same = isomorphic_correction(LogicId::IL, cd, cd, ElementMap{{0}, {0, 1}}, {0, 1}, 1);
    CHECK(structurally_equal(same.model, cd));
}
