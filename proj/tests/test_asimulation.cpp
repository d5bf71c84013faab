#include <doctest.h>

#include "kwb/asimulation.hpp"
#include "kwb/suites.hpp"

using namespace kwb;

namespace {

RawPair root(int w, int v) { return {0, w, {}, v, {}}; }

KripkeModel one_world(int n) {
    KripkeModel m;
    m.sig.preds = {{"P", 1}};
    int w = m.add_world("w");
    for (int i = 0; i < n; ++i) m.add_element(w, "e" + std::to_string(i));
    m.complete_homs();
    return m;
}

}  // namespace

TEST_CASE("identity relation is an asimulation") {
    for (const auto& m : {fixture_chain(), fixture_cd()}) {
        auto id = identity_relation(m, 2);
        for (int w = 0; w < m.size(); ++w) {
            auto r = check_asimulation_raw(LogicId::IL, m, m, id, root(w, w));
            CHECK(r.ok);
            CHECK(r.condition == "");
        }
    }
    auto eq = fixture_eq();
    CHECK(check_asimulation_raw(LogicId::ILeq, eq, eq, identity_relation(eq, 2), root(0, 0)).ok);
}

TEST_CASE("the checker names the failing condition") {
    auto m = fixture_chain();
    auto id = identity_relation(m, 2);
    int v = m.world_index("v");

    auto no_back = id;
    no_back.erase(RawPair{1, v, {}, v, {}});
    auto r = check_asimulation_raw(LogicId::IL, m, m, no_back, root(0, 0));
    CHECK_FALSE(r.ok);
    CHECK(r.condition == "s-back");

    // keep only the pairs at v, then drop the one-element extension
    RawAsimulation no_ext;
    for (const auto& p : id)
        if (p.w == v && p.v == v) no_ext.insert(p);
    no_ext.erase(RawPair{0, v, {0}, v, {0}});
    r = check_asimulation_raw(LogicId::IL, m, m, no_ext, root(v, v));
    CHECK_FALSE(r.ok);
    CHECK(r.condition == "obj-forth");

    // v forces P(b); w does not force P(a)
    RawAsimulation bad = id;
    bad.insert(RawPair{0, v, {0}, 0, {0}});
    r = check_asimulation_raw(LogicId::IL, m, m, bad, root(0, 0));
    CHECK_FALSE(r.ok);
    CHECK(r.condition == "atom");

    r = check_asimulation_raw(LogicId::IL, m, m, id, RawPair{1, 0, {}, 0, {}});
    CHECK(r.condition == "elem");
    r = check_asimulation_raw(LogicId::IL, m, m, {}, root(0, 0));
    CHECK(r.condition == "elem");
    CHECK_THROWS_AS(check_asimulation_raw(LogicId::IL, m, m, {RawPair{0, 0, {3}, 0, {0}}}, root(0, 0)), Error);
    CHECK_THROWS_AS(check_asimulation_raw(LogicId::IL, m, fixture_cd(), {}, root(0, 0)), Error);
}

TEST_CASE("asimulations are not symmetric") {
    auto m = fixture_chain();
    int w = m.world_index("w"), v = m.world_index("v");
    CHECK(asim_exists(LogicId::IL, m, w, {}, m, v, {}));
    CHECK_FALSE(asim_exists(LogicId::IL, m, v, {}, m, w, {}));
    CHECK(asim_exists(LogicId::IL, m, w, {0}, m, v, {0}));
    CHECK_FALSE(asim_exists(LogicId::IL, m, v, {0}, m, w, {0}));
    auto g = greatest_asimulation(LogicId::IL, m, w, {}, m, v, {});
    REQUIRE(g);
    CHECK(g->contains(root(w, v)));
    CHECK_FALSE(greatest_asimulation(LogicId::IL, m, v, {}, m, w, {}));
}

TEST_CASE("equality: merging two elements is not an asimulation") {
    auto eq = fixture_eq();
    int w = eq.world_index("w");
    CHECK_FALSE(asim_exists(LogicId::ILeq, eq, w, {0, 1}, eq, w, {0, 0}));
    CHECK_FALSE(asim_exists(LogicId::ILeq, eq, w, {0, 0}, eq, w, {0, 1}));
    CHECK(asim_exists(LogicId::ILeq, eq, w, {0, 1}, eq, w, {0, 1}));
    CHECK(asim_exists(LogicId::ILeq, eq, w, {0, 1}, eq, w, {1, 0}));
    // without equality the two elements cannot be told apart
    auto plain = eq;
    plain.sig.equality = false;
    CHECK(asim_exists(LogicId::IL, plain, w, {0, 1}, plain, w, {0, 0}));
}

TEST_CASE("fixpoint expansion is a bounded raw asimulation") {
    auto corpus = small_corpus();
    int checked = 0;
    for (std::size_t i = 0; i < corpus.size(); i += 5)
        for (std::size_t j = 0; j < corpus.size(); j += 7) {
            const auto& a = corpus[i];
            const auto& b = corpus[j];
            auto fp = asimulation_fixpoint(LogicId::IL, a, b);
            CHECK(fp.surviving() <= fp.space());
            auto rel = fp.expand(2);
            auto bounded = bounded_raw_asimulation(LogicId::IL, a, b, 2);
            for (const auto& p : rel) CHECK(bounded.count(p));
            for (int w = 0; w < a.size(); ++w)
                for (int v = 0; v < b.size(); ++v) {
                    if (!fp.contains(root(w, v))) continue;
                    auto r = check_asimulation_raw(LogicId::IL, a, b, rel, root(w, v), 2);
                    INFO(i, " ", j, " ", r.condition, " ", r.detail);
                    CHECK(r.ok);
                    ++checked;
                }
        }
    CHECK(checked > 20);
}

TEST_CASE("fixpoint expansion at length 3 on the fixtures") {
    auto cd = fixture_cd();
    auto fp = asimulation_fixpoint(LogicId::IL, cd, cd);
    auto rel = fp.expand(3);
    CHECK(check_asimulation_raw(LogicId::IL, cd, cd, rel, root(0, 0), 3).ok);
    for (const auto& p : identity_relation(cd, 3)) CHECK(fp.contains(p));
}

TEST_CASE("asimulation preserves truth of sentences") {
    auto corpus = small_corpus();
    for (std::size_t i = 0; i < corpus.size(); i += 3)
        for (std::size_t j = 1; j < corpus.size(); j += 4) {
            const auto& a = corpus[i];
            const auto& b = corpus[j];
            auto fp = asimulation_fixpoint(LogicId::IL, a, b);
            for (int w = 0; w < a.size(); ++w)
                for (int v = 0; v < b.size(); ++v) {
                    if (!fp.contains(root(w, v))) continue;
                    CHECK(positive_included(theory_slice(LogicId::IL, a, w, 2), theory_slice(LogicId::IL, b, v, 2)));
                }
        }
}

TEST_CASE("position budget") {
    auto big = one_world(5);  // 2^25 positions per block
    CHECK_THROWS_AS(asimulation_fixpoint(LogicId::IL, big, big), Error);
    auto ok = one_world(3);
    CHECK_NOTHROW(asimulation_fixpoint(LogicId::IL, ok, ok));
}

TEST_CASE("project_subtuple") {
    auto cd = fixture_cd();
    int v = cd.world_index("v");
    auto id = identity_relation(cd, 2);
    RawPair start{0, v, {0, 1}, v, {0, 1}};
    auto p = project_subtuple(id, start, {1});
    CHECK(p.start == RawPair{0, v, {1}, v, {1}});
    CHECK(check_asimulation_raw(LogicId::IL, cd, cd, p.rel, p.start).ok);
    auto q = project_subtuple(id, start, {1, 1});
    CHECK(q.start == RawPair{0, v, {1, 1}, v, {1, 1}});
    CHECK(check_asimulation_raw(LogicId::IL, cd, cd, q.rel, q.start).ok);
    CHECK_THROWS_AS(project_subtuple(id, start, {2}), Error);
}

TEST_CASE("restrict_generated") {
    auto cd = fixture_cd();
    int w = cd.world_index("w");
    auto fp = asimulation_fixpoint(LogicId::IL, cd, cd);
    auto rel = fp.expand(2);
    RawPair start{0, w, {0}, w, {0}};
    auto r = restrict_generated(cd, cd, rel, start);
    CHECK(r.ext1.sig.consts.size() == cd.sig.consts.size() + 1);
    CHECK(r.start.alpha == start.alpha);
    CHECK(r.ext1.constant(r.start.w, "c1") == 0);
    CHECK(validate_model(r.ext1).empty());
    auto c = check_asimulation_raw(LogicId::IL, r.ext1, r.ext2, r.rel, r.start);
    INFO(c.condition, " ", c.detail);
    CHECK(c.ok);
}

TEST_CASE("relation_from_type_inclusion contains the diagonal") {
    for (const auto& m : {fixture_chain(), fixture_cd()}) {
        auto rel = relation_from_type_inclusion(LogicId::IL, m, m, 2, 1);
        for (const auto& p : identity_relation(m, 1)) CHECK(rel.count(p));
    }
    auto m = fixture_chain();
    auto rel = relation_from_type_inclusion(LogicId::IL, m, m, 2, 0);
    CHECK(rel.count(root(0, 1)));
    CHECK_FALSE(rel.count(root(1, 0)));
}

TEST_CASE("raw relation JSON round trip") {
    auto cd = fixture_cd();
    auto rel = asimulation_fixpoint(LogicId::IL, cd, cd).expand(2);
    auto back = raw_from_json(cd, cd, raw_to_json(cd, cd, rel));
    CHECK(back == rel);
    CHECK(describe_pair(cd, cd, RawPair{1, 1, {1}, 0, {0}}) == "2>1 (v;b2) A (w;a)");
}
