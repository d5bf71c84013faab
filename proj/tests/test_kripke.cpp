#include <doctest.h>

#include <fstream>
#include <sstream>

#include "kwb/kripke.hpp"
#include "kwb/model_io.hpp"

using namespace kwb;

namespace {

bool has_law(const KripkeModel& m, const std::string& law) {
    for (const auto& d : validate_model(m))
        if (d.law == law) return true;
    return false;
}

Signature sig_p() {
    Signature s;
    s.preds = {{"P", 1}};
    return s;
}

// w0 <= w1, w0 <= w2 with one element at the root and two above each.
KripkeModel vee() {
    KripkeModel m;
    m.sig = sig_p();
    int r = m.add_world("r"), l = m.add_world("l"), u = m.add_world("u");
    m.add_element(r, "a");
    for (int w : {l, u}) {
        m.add_element(w, "b");
        m.add_element(w, "b2");
        m.add_edge(r, w);
    }
    m.close_order();
    m.hom[r][l] = {0};
    m.hom[r][u] = {1};
    m.complete_homs();
    return m;
}

}  // namespace

TEST_CASE("fixtures are valid and classified") {
    auto chain = fixture_chain();
    auto cd = fixture_cd();
    auto eq = fixture_eq();
    for (const auto* m : {&chain, &cd, &eq}) CHECK(validate_model(*m).empty());
    auto fc = classify_model(chain);
    CHECK(fc.in_class);
    CHECK(fc.su_class);
    CHECK(fc.bi_class);
    auto fcd = classify_model(cd);
    CHECK(fcd.in_class);
    CHECK_FALSE(fcd.su_class);
    auto fe = classify_model(eq);
    CHECK_FALSE(fe.in_class);
    CHECK(fe.su_class);
    CHECK_FALSE(fe.bi_class);
    CHECK(in_class(fe, ModelClass::Any));
    CHECK(fixture_chain(true).sig.equality);
}

TEST_CASE("fixture files match the built-in fixtures") {
    const std::string dir = KWB_FIXTURE_DIR;
    CHECK(structural_diff(load_model(dir + "/chain.json"), fixture_chain()) == "");
    CHECK(structural_diff(load_model(dir + "/chain_eq.json"), fixture_chain(true)) == "");
    CHECK(structural_diff(load_model(dir + "/cd.json"), fixture_cd()) == "");
    CHECK(structural_diff(load_model(dir + "/eq.json"), fixture_eq()) == "");
}

TEST_CASE("validation names the violated law") {
    auto m = fixture_chain();
    m.interp[0].preds["P"].insert({0});
    CHECK(validate_model(m).empty());  // P(a) at w maps to P(b) at v

    m = fixture_chain();
    m.interp[1].preds.clear();
    m.interp[0].preds["P"].insert({0});
    CHECK(has_law(m, "predicate-preservation"));

    m = fixture_chain();
    m.leq[0][0] = 0;
    CHECK(has_law(m, "reflexivity"));

    m = fixture_chain();
    m.leq[1][0] = 1;
    CHECK(has_law(m, "antisymmetry"));

    m = fixture_chain();
    m.hom[0][1] = {-1};
    CHECK(has_law(m, "hom-totality"));

    m = fixture_cd();
    m.interp[1].consts["c"] = 1;
    CHECK(has_law(m, "constant-coherence"));
    m.interp[1].consts.erase("c");
    CHECK(has_law(m, "constant-denotation"));

    m = fixture_chain();
    m.interp[0].preds["S"] = {};
    CHECK(has_law(m, "interpretation"));

    // three-world chain with a non-composing hom
    KripkeModel c;
    c.sig = sig_p();
    for (const char* w : {"x", "y", "z"}) c.add_element(c.add_world(w), "a"), c.add_element(c.world_index(w), "b");
    c.add_edge(0, 1);
    c.add_edge(1, 2);
    c.close_order();
    c.hom[0][1] = {0, 1};
    c.hom[1][2] = {0, 1};
    c.complete_homs();
    CHECK(validate_model(c).empty());
    c.hom[0][2] = {1, 0};
    CHECK(has_law(c, "hom-composition"));
    CHECK_THROWS_AS(require_valid(c), Error);

    c.leq[0][2] = 0;
    CHECK(has_law(c, "transitivity"));
}

TEST_CASE("induced and generated submodels") {
    auto m = vee();
    auto g = generated_submodel(m, m.world_index("l"));
    CHECK(g.size() == 1);
    CHECK(g.worlds[0] == "l");
    CHECK(g.domain_size(0) == 2);
    CHECK(is_submodel(g, m));
    auto whole = generated_submodel(m, m.world_index("r"));
    CHECK(structurally_equal(whole, m));

    std::set<Element> xs{{0, 0}, {1, 0}, {2, 1}};
    auto sub = induced_submodel(m, {0, 1, 2}, xs);
    CHECK(validate_model(sub).empty());
    CHECK(is_submodel(sub, m));
    // dropping the image of a kept element breaks closure under H
    CHECK_THROWS_AS(induced_submodel(m, {0, 1, 2}, {{0, 0}, {1, 1}, {2, 1}}), Error);
    CHECK_THROWS_AS(induced_submodel(m, {0, 1}, {{0, 0}, {1, 0}, {2, 1}}), Error);

    auto noedge = m;
    noedge.interp[1].preds["P"] = {{1}};
    CHECK_FALSE(submodel_violation(m, noedge).empty());
}

TEST_CASE("generated submodel of a random model at each world is its up-set") {
    Signature s = sig_p();
    s.preds["R"] = 2;
    s.consts = {"c"};
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto m = generate_random_model(seed, {3, 3, 1, s, ModelClass::Any, 0.5, 0.3});
        for (int w = 0; w < m.size(); ++w) {
            auto g = generated_submodel(m, w);
            CHECK(g.size() == static_cast<int>(m.up(w).size()));
            CHECK(validate_model(g).empty());
            CHECK(is_submodel(g, m));
            for (int v : m.up(w)) {
                int gv = g.world_index(m.worlds[v]);
                CHECK(g.domains[gv] == m.domains[v]);
                CHECK(g.interp[gv].preds == m.interp[v].preds);
            }
        }
    }
}

TEST_CASE("constant_extension") {
    auto m = vee();
    auto e = constant_extension(m, 0, {"k"}, {0});
    CHECK(e.sig.has_const("k"));
    CHECK(validate_model(e).empty());
    CHECK(e.domains[e.world_index("l")][e.constant(e.world_index("l"), "k")] == "b");
    CHECK(e.domains[e.world_index("u")][e.constant(e.world_index("u"), "k")] == "b2");
    auto e2 = constant_extension(m, m.world_index("l"), {"k1", "k2"}, {1, 1});
    CHECK(e2.size() == 1);
    CHECK(e2.constant(0, "k1") == 1);
    CHECK_THROWS_AS(constant_extension(m, 0, {"P"}, {0}), Error);
    CHECK_THROWS_AS(constant_extension(m, 0, {"k", "k"}, {0, 0}), Error);
    CHECK_THROWS_AS(constant_extension(m, 0, {"k"}, {3}), Error);
    CHECK_THROWS_AS(constant_extension(fixture_cd(), 0, {"c"}, {0}), Error);
}

TEST_CASE("reduct and renaming") {
    auto cd = fixture_cd();
    auto r = reduct(cd, sig_p());
    CHECK(r.sig == sig_p());
    CHECK(validate_model(r).empty());
    CHECK(r.interp[1].preds.count("Q") == 0);
    CHECK(r.interp[1].preds.at("P") == cd.interp[1].preds.at("P"));
    Signature other;
    other.preds = {{"S", 1}};
    CHECK_THROWS_AS(reduct(cd, other), Error);

    RenamingMap ren = RenamingMap::identity(cd.sig);
    ren.preds["P"] = "Q";
    ren.preds["Q"] = "P";
    ren.consts["c"] = "e";
    auto rn = rename_model(cd, ren);
    CHECK(validate_model(rn).empty());
    CHECK(rn.holds(1, "Q", {1}) == false);
    CHECK(rn.interp[0].preds.at("Q") == cd.interp[0].preds.at("P"));
    CHECK(rn.constant(0, "e") == cd.constant(0, "c"));
    CHECK(structurally_equal(rename_model(rn, ren.inverse()), cd));
}

TEST_CASE("union of a chain of submodels") {
    auto m = vee();
    auto a = induced_submodel(m, {0, 1}, {{0, 0}, {1, 0}});
    auto b = induced_submodel(m, {0, 1, 2}, {{0, 0}, {1, 0}, {2, 1}});
    REQUIRE(is_submodel(a, b));
    REQUIRE(is_submodel(b, m));
    auto u = union_chain({a, b, m});
    CHECK(validate_model(u).empty());
    CHECK(structural_diff(u, m) == "");
    CHECK(structural_diff(union_chain({a}), a) == "");
    CHECK_THROWS_AS(union_chain({m, a}), Error);
    CHECK_THROWS_AS(union_chain({}), Error);
}

TEST_CASE("isomorphism") {
    auto m = vee();
    auto iso = find_isomorphism(m, m);
    REQUIRE(iso);
    CHECK(check_isomorphism(m, m, iso->first, iso->second));
    // swapping the two upper worlds together with their elements
    KripkeModel n;
    n.sig = m.sig;
    for (const char* w : {"r", "u", "l"}) n.add_world(w);
    n.add_element(0, "a");
    for (int w : {1, 2}) {
        n.add_element(w, "b");
        n.add_element(w, "b2");
        n.add_edge(0, w);
    }
    n.close_order();
    n.hom[0][1] = {1};
    n.hom[0][2] = {0};
    n.complete_homs();
    ElementMap g{{0}, {0, 1}, {0, 1}};
    CHECK(check_isomorphism(m, n, g, {0, 2, 1}));
    CHECK_FALSE(check_isomorphism(m, n, g, {0, 1, 2}));
    n.interp[1].preds["P"] = {{0}};
    CHECK_FALSE(find_isomorphism(m, n));
    CHECK_FALSE(find_isomorphism(fixture_chain(), fixture_eq()));
}

TEST_CASE("injectivize on the equality fixture") {
    auto eq = fixture_eq();
    eq.sig.equality = false;
    auto full = injectivize_full(eq);
    const auto& m = full.model;
    CHECK(validate_model(m).empty());
    auto f = classify_model(m);
    CHECK(f.in_class);
    CHECK(f.su_class);
    CHECK(m.domain_size(m.world_index("w")) == 2);
    CHECK(m.domain_size(m.world_index("v")) == 2);
    CHECK(full.choice.size() == 2);
    // the element chosen at w by each new element is one of the originals, and distinct
    int w = m.world_index("w");
    std::set<int> at_w;
    for (const auto& ch : full.choice[w]) at_w.insert(ch.at(w));
    CHECK(at_w == std::set<int>{0, 1});
}

TEST_CASE("injectivize on random rooted models lands in In") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 80; ++seed) {
        auto m = generate_random_model(seed, {3, 2, 1, sig_p(), ModelClass::Any, 0.5, 0.3});
        Injectivized r;
        try {
            r = injectivize_full(m);
        } catch (const Error&) {
            continue;
        }
        ++checked;
        CHECK(validate_model(r.model).empty());
        CHECK(classify_model(r.model).in_class);
        CHECK(r.model.worlds == m.worlds);
    }
    CHECK(checked > 40);
}

TEST_CASE("random models: deterministic, valid and in the requested class") {
    Signature s = sig_p();
    s.preds["R"] = 2;
    s.consts = {"c"};
    RandomModelParams p{3, 3, 1, s, ModelClass::Any, 0.5, 0.3};
    CHECK(structurally_equal(generate_random_model(42, p), generate_random_model(42, p)));
    bool differ = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
        differ |= !structurally_equal(generate_random_model(seed, p), generate_random_model(seed + 100, p));
    CHECK(differ);
    for (auto cls : {ModelClass::Any, ModelClass::In, ModelClass::Su, ModelClass::Bi}) {
        p.cls = cls;
        for (std::uint64_t seed = 1; seed <= 250; ++seed) {
            auto m = generate_random_model(seed, p);
            INFO(class_name(cls), " seed ", seed);
            REQUIRE(validate_model(m).empty());
            CHECK(in_class(classify_model(m), cls));
            CHECK(m.size() >= 1);
            CHECK(m.size() <= 3);
            for (int w = 0; w < m.size(); ++w) {
                CHECK(m.domain_size(w) >= 1);
                CHECK(m.domain_size(w) <= 3);
            }
        }
    }
}

TEST_CASE("model JSON round trip") {
    Signature s = sig_p();
    s.preds["R"] = 2;
    s.consts = {"c"};
    s.equality = true;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto m = generate_random_model(seed, {3, 3, 1, s, ModelClass::Any, 0.5, 0.3});
        auto back = parse_model(dump_model(m));
        CHECK(structural_diff(back, m) == "");
        CHECK(model_to_json(back) == model_to_json(m));
    }
}

TEST_CASE("model JSON: order generators are closed and homs composed") {
    const char* text = R"({
      "signature": {"preds": {"P": 1}, "consts": [], "equality": false},
      "worlds": ["x", "y", "z"],
      "order": [["x", "y"], ["y", "z"]],
      "domains": {"x": ["a"], "y": ["b"], "z": ["c"]},
      "interp": {"x": {}, "y": {"P": [["b"]]}, "z": {"P": [["c"]]}},
      "homs": {"x>y": {"a": "b"}, "y>z": {"b": "c"}}
    })";
    auto m = parse_model(text);
    CHECK(validate_model(m).empty());
    CHECK(m.le(0, 2));
    CHECK(m.apply(0, 2, 0) == 0);
    CHECK_THROWS_AS(parse_model("{\"worlds\": 3}"), Error);
    CHECK_THROWS(parse_model("not json"));
}
