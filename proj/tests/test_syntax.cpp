#include <doctest.h>

#include <functional>
#include <random>

#include "kwb/semantics.hpp"
#include "kwb/suites.hpp"
#include "kwb/syntax.hpp"

using namespace kwb;

namespace {

Signature sig_pq() {
    Signature s;
    s.preds = {{"P", 1}, {"Q", 1}, {"R", 2}};
    s.consts = {"c", "d"};
    return s;
}

Formula P(const char* t, bool c = false) { return Formula::atom("P", {c ? Term::cnst(t) : Term::var(t)}); }
Formula Q(const char* t, bool c = false) { return Formula::atom("Q", {c ? Term::cnst(t) : Term::var(t)}); }

// Every formula over {R/2} and terms {x, y} with at most `depth` connective
// levels (quantifiers over x and y included).
std::vector<Formula> all_formulas(int depth) {
    std::vector<Formula> level;
    for (const char* a : {"x", "y"})
        for (const char* b : {"x", "y"}) level.push_back(Formula::atom("R", {Term::var(a), Term::var(b)}));
    level.push_back(Formula::bottom());
    std::vector<Formula> all = level;
    for (int d = 0; d < depth; ++d) {
        std::vector<Formula> next;
        for (const auto& f : all) {
            for (const char* v : {"x", "y"}) {
                next.push_back(Formula::forall(v, f));
                next.push_back(Formula::exists(v, f));
            }
            for (const auto& g : level) {
                next.push_back(Formula::conj(f, g));
                next.push_back(Formula::implies(g, f));
            }
        }
        all.insert(all.end(), next.begin(), next.end());
        level = std::move(next);
    }
    return all;
}

// Reference substitution written directly from the recursive definition.
Formula ref_subst(const Formula& f, const std::map<std::string, std::string>& s) {
    switch (f.op()) {
        case Op::Bottom: return f;
        case Op::Atom:
        case Op::Eq: {
            std::vector<Term> ts;
            for (const auto& t : f.terms())
                ts.push_back(!t.is_const && s.count(t.name) ? Term::cnst(s.at(t.name)) : t);
            return f.op() == Op::Eq ? Formula::eq(ts[0], ts[1]) : Formula::atom(f.name(), ts);
        }
        case Op::Forall:
        case Op::Exists: {
            auto inner = s;
            inner.erase(f.name());
            return Formula::quant(f.op(), f.name(), ref_subst(f.body(), inner));
        }
        default: return Formula::binary(f.op(), ref_subst(f.lhs(), s), ref_subst(f.rhs(), s));
    }
}

}  // namespace

TEST_CASE("parse: grammar examples") {
    auto s = sig_pq();
    CHECK(parse_formula("P(x) & Q(c)", s) == Formula::conj(P("x"), Q("c", true)));
    CHECK(parse_formula("_|_", s) == Formula::bottom());
    // -> is right associative, & binds tighter than |, | tighter than ->
    CHECK(parse_formula("P(x) -> Q(x) -> P(c)", s) ==
          Formula::implies(P("x"), Formula::implies(Q("x"), P("c", true))));
    CHECK(parse_formula("P(x) | Q(x) & P(c)", s) == Formula::disj(P("x"), Formula::conj(Q("x"), P("c", true))));
    CHECK(parse_formula("~P(x) & Q(x)", s) == Formula::conj(Formula::neg(P("x")), Q("x")));
    // quantifier scope extends maximally right
    CHECK(parse_formula("forall x. P(x) -> Q(x)", s) == Formula::forall("x", Formula::implies(P("x"), Q("x"))));
    CHECK(parse_formula("(forall x. P(x)) -> Q(x)", s) == Formula::implies(Formula::forall("x", P("x")), Q("x")));
}

TEST_CASE("parse: the CD instance and how quantifier scope reads it") {
    auto s = sig_pq();
    Formula cd = Formula::implies(Formula::forall("x", Formula::disj(P("x"), Q("c", true))),
                                  Formula::disj(Q("c", true), Formula::forall("x", P("x"))));
    CHECK(parse_formula("(forall x. P(x) | Q(c)) -> Q(c) | forall x. P(x)", s) == cd);
    // Without the outer parentheses the scope of the first quantifier swallows the implication.
    Formula wide = parse_formula("forall x. (P(x) | Q(c)) -> (Q(c) | forall x. P(x))", s);
    CHECK(wide.op() == Op::Forall);
    CHECK(wide != cd);
}

TEST_CASE("parse: errors") {
    auto s = sig_pq();
    CHECK_THROWS_AS(parse_formula("x = y | ~(x = y)", s), ParseError);
    CHECK_THROWS_AS(parse_formula("P(x", s), ParseError);
    CHECK_THROWS_AS(parse_formula("S(x)", s), ParseError);
    CHECK_THROWS_AS(parse_formula("R(x)", s), ParseError);
    CHECK_THROWS_AS(parse_formula("P", s), ParseError);
    try {
        parse_formula("P(x) & & Q(x)", s);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 7);
    }
    s.equality = true;
    CHECK(parse_formula("x = y | ~(x = y)", s).op() == Op::Or);
}

TEST_CASE("print: sugar and minimal parentheses") {
    CHECK(print_formula(Formula::bottom()) == "_|_");
    CHECK(print_formula(Formula::neg(P("x"))) == "~P(x)");
    auto s = sig_pq();
    for (const char* t : {"P(x) & Q(c)", "P(x) -> Q(x) -> P(c)", "(P(x) -> Q(x)) -> P(c)", "forall x. P(x) | Q(x)",
                          "(exists x. P(x)) & Q(c)", "~~P(c)", "P(x) | Q(x) & P(c)"})
        CHECK(print_formula(parse_formula(t, s)) == t);
}

TEST_CASE("print/parse round trip on 1000 random formulas") {
    auto s = sig_pq();
    s.equality = true;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        FormulaGenParams p;
        p.max_rank = 4;
        p.max_size = 14;
        p.free_vars = i % 3;
        Formula f = random_formula(rng, s, p);
        INFO(print_formula(f));
        CHECK(parse_formula(print_formula(f), s) == f);
    }
}

TEST_CASE("free and bound variables, rank") {
    auto s = sig_pq();
    Formula f = parse_formula("P(x) & exists x. R(x, y)", s);
    CHECK(free_vars(f) == std::set<std::string>{"x", "y"});
    CHECK(bound_vars(f) == std::set<std::string>{"x"});
    CHECK(rank(parse_formula("P(x)", s)) == 0);
    CHECK(rank(parse_formula("P(x) -> Q(x)", s)) == 1);
    CHECK(rank(parse_formula("forall x. P(x) -> exists y. Q(y)", s)) == 3);
    CHECK(rank(parse_formula("P(c) & (Q(c) | ~P(d))", s)) == 1);
}

TEST_CASE("rank decreases strictly under ->, forall, exists") {
    auto s = sig_pq();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        Formula f = random_formula(rng, s, {4, 12, 2, true});
        std::function<void(const Formula&)> walk = [&](const Formula& g) {
            if (g.op() == Op::Implies) {
                CHECK(rank(g.lhs()) < rank(g));
                CHECK(rank(g.rhs()) < rank(g));
            }
            if (g.is_quant()) CHECK(rank(g.body()) < rank(g));
            if (g.is_binary()) {
                walk(g.lhs());
                walk(g.rhs());
            } else if (g.is_quant()) {
                walk(g.body());
            }
        };
        walk(f);
        CHECK(rank(f) <= 4);
    }
}

TEST_CASE("substitute_constants") {
    auto s = sig_pq();
    Signature t;
    t.preds = s.preds;
    t.consts = {"c", "c1", "c2"};
    CHECK(substitute_constants(parse_formula("P(x) & exists x. Q(x)", s), {{"x", "c"}}) ==
          parse_formula("P(c) & exists x. Q(x)", t));
    CHECK(substitute_constants(parse_formula("P(x) & Q(y)", s), {{"x", "c1"}, {"y", "c2"}}) ==
          parse_formula("P(c1) & Q(c2)", t));
    CHECK_THROWS_AS(substitute_constants(parse_formula("P(x) & Q(c)", s), {{"x", "c"}}), Error);
    CHECK_THROWS_AS(substitute_constants(parse_formula("P(x)", s), {{"x", "c1"}, {"x", "c2"}}), Error);
}

TEST_CASE("substitution against a reference implementation on all depth-2 formulas") {
    auto all = all_formulas(2);
    REQUIRE(all.size() > 1000);
    for (const auto& f : all) {
        Formula both = substitute_constants(f, {{"x", "c1"}, {"y", "c2"}});
        CHECK(both == ref_subst(f, {{"x", "c1"}, {"y", "c2"}}));
        // with constants as substituends, the sequential order cannot matter
        CHECK(both == substitute_constants(substitute_constants(f, {{"x", "c1"}}), {{"y", "c2"}}));
        CHECK(both == substitute_constants(substitute_constants(f, {{"y", "c2"}}), {{"x", "c1"}}));
        auto fv = free_vars(both);
        CHECK(fv.empty());
    }
    // The swap x<->y differs from the identity exactly when both variables occur free.
    std::size_t differs = 0;
    for (const auto& f : all) {
        Formula sw = substitute_constants(f, {{"x", "c2"}, {"y", "c1"}});
        Formula id = substitute_constants(f, {{"x", "c1"}, {"y", "c2"}});
        differs += sw != id;
        if (free_vars(f).empty()) CHECK(sw == id);
    }
    CHECK(differs > 0);
}

TEST_CASE("abstract_constants inverts substitution") {
    auto s = sig_pq();
    Signature xs = s;
    CHECK(abstract_constants(parse_formula("P(c)", s), {{"c", "y"}}) == parse_formula("P(y)", s));
    s.preds["R"] = 2;
    CHECK(abstract_constants(parse_formula("exists x. R(x, c)", s), {{"c", "y"}}) ==
          parse_formula("exists x. R(x, y)", s));
    CHECK_THROWS_AS(abstract_constants(parse_formula("exists y. R(y, c)", s), {{"c", "y"}}), Error);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        Formula f = random_formula(rng, s, {3, 10, 0, false});
        Formula g = abstract_constants(f, {{"c", "z1"}, {"d", "z2"}});
        CHECK(minimal_signature(g).consts.empty());
        CHECK(substitute_constants(g, {{"z1", "c"}, {"z2", "d"}}) == f);
    }
}

TEST_CASE("quantify_constant") {
    auto s = sig_pq();
    Formula e = quantify_constant(parse_formula("P(c)", s), "c", Op::Exists);
    CHECK(e.op() == Op::Exists);
    CHECK(e.body() == Formula::atom("P", {Term::var(e.name())}));
    Formula a = quantify_constant(parse_formula("P(c) & Q(d)", s), "c", Op::Forall);
    CHECK(a == Formula::forall(a.name(), Formula::conj(Formula::atom("P", {Term::var(a.name())}), Q("d", true))));
    // the fresh variable avoids what is already used
    Formula b = quantify_constant(parse_formula("exists x1. R(x1, c)", s), "c", Op::Exists);
    CHECK(b.name() != "x1");
    CHECK(is_sentence(b));
}

TEST_CASE("rename_formula and minimal_signature") {
    auto s = sig_pq();
    Formula f = parse_formula("P(c) -> _|_", s);
    CHECK(rename_formula(RenamingMap::identity(s), f) == f);
    RenamingMap r = RenamingMap::identity(s);
    r.preds["P"] = "Pr";
    r.consts["c"] = "cr";
    Signature t = rename_signature(r, s);
    CHECK(rename_formula(r, f) == parse_formula("Pr(cr) -> _|_", t));
    CHECK(rename_formula(r.inverse(), rename_formula(r, f)) == f);
    RenamingMap partial;
    partial.preds["Q"] = "Q";
    CHECK_THROWS_AS(rename_formula(partial, f), Error);
    RenamingMap clash = RenamingMap::identity(s);
    clash.preds["P"] = "Q";
    CHECK_THROWS_AS(rename_signature(clash, s), Error);
    // swapping names is a bijection; arities travel with the symbols
    RenamingMap swap = RenamingMap::identity(s);
    swap.preds["P"] = "R";
    swap.preds["R"] = "P";
    CHECK(rename_signature(swap, s).preds == std::map<std::string, int>{{"P", 2}, {"Q", 1}, {"R", 1}});

    CHECK(minimal_signature(Formula::bottom()) == Signature{});
    Signature m = minimal_signature(parse_formula("P(c) | Q(x)", s));
    CHECK(m.preds == std::map<std::string, int>{{"P", 1}, {"Q", 1}});
    CHECK(m.consts == std::set<std::string>{"c"});
    CHECK(minimal_signature(rename_formula(r, parse_formula("P(c) | Q(x)", s))) ==
          rename_signature(RenamingMap{{{"P", "Pr"}, {"Q", "Q"}}, {{"c", "cr"}}}, m));
}

TEST_CASE("minimal_signature is monotone under subformulas") {
    auto s = sig_pq();
    s.equality = true;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        Formula f = random_formula(rng, s, {3, 12, 2, true});
        Signature whole = minimal_signature(f);
        std::function<void(const Formula&)> walk = [&](const Formula& g) {
            CHECK(whole.includes(minimal_signature(g)));
            if (g.is_binary()) {
                walk(g.lhs());
                walk(g.rhs());
            } else if (g.is_quant()) {
                walk(g.body());
            }
        };
        walk(f);
        CHECK_NOTHROW(check_formula(f, whole));
    }
}

TEST_CASE("fresh names follow the numbered scheme") {
    CHECK(fresh_name("c", {}) == "c1");
    CHECK(fresh_name("c", {"c1", "c2"}) == "c3");
    CHECK(fresh_names("x", 2, {"x1"}) == std::vector<std::string>{"x2", "x3"});
}

TEST_CASE("normalize sorts and flattens conjunctions and disjunctions") {
    auto s = sig_pq();
    CHECK(normalize(parse_formula("Q(c) & P(c) & Q(c)", s)) == normalize(parse_formula("P(c) & Q(c)", s)));
    CHECK(normalize(parse_formula("(P(c) | Q(c)) | P(d)", s)) == normalize(parse_formula("P(d) | (Q(c) | P(c))", s)));
    CHECK(normalize(parse_formula("P(c) -> Q(c)", s)) != normalize(parse_formula("Q(c) -> P(c)", s)));
}
