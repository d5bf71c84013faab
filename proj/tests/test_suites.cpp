#include <doctest.h>

#include "kwb/suites.hpp"

using namespace kwb;

TEST_CASE("random_formula respects its bounds") {
    Signature s;
    s.preds = {{"P", 1}, {"R", 2}};
    s.consts = {"c"};
    s.equality = true;
    std::mt19937_64 rng(1);
    std::set<Op> seen;
    for (int i = 0; i < 2000; ++i) {
        FormulaGenParams p{i % 4, 4 + i % 9, i % 3, i % 2 == 0};
        Formula f = random_formula(rng, s, p);
        CHECK(rank(f) <= p.max_rank);
        CHECK(static_cast<int>(f.size()) <= p.max_size);
        for (const auto& x : free_vars(f)) {
            bool ok = false;
            for (int k = 1; k <= p.free_vars; ++k) ok |= x == "x" + std::to_string(k);
            CHECK(ok);
        }
        CHECK_NOTHROW(check_formula(f, s));
        std::function<void(const Formula&)> walk = [&](const Formula& g) {
            seen.insert(g.op());
            if (g.is_binary()) {
                walk(g.lhs());
                walk(g.rhs());
            } else if (g.is_quant()) {
                walk(g.body());
            }
        };
        walk(f);
    }
    CHECK(seen.size() == 8);
    std::mt19937_64 a(5), b(5);
    CHECK(random_formula(a, s, {}) == random_formula(b, s, {}));
}

TEST_CASE("small corpus") {
    auto c = small_corpus();
    CHECK(c.size() == 47);
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(validate_model(c[i]).empty());
        CHECK(c[i].size() <= 2);
        for (int w = 0; w < c[i].size(); ++w) {
            CHECK(c[i].domain_size(w) >= 1);
            CHECK(c[i].domain_size(w) <= 2);
        }
    }
    // pairwise non-isomorphic
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) CHECK_FALSE(find_isomorphism(c[i], c[j]));
}

TEST_CASE("suites run small and report") {
    SuiteOptions opt;
    opt.count = 5;
    opt.rank = 2;
    for (const auto& name : {"cd-separation", "eq-separation", "monotonicity", "substitution", "generated-submodel",
                             "cutoff", "quotient", "star", "renaming", "unravel-asim"}) {
        auto r = run_suite(name, opt);
        INFO(name, "\n", report_to_text(r));
        CHECK(r.ok());
        CHECK(r.cases > 0);
        CHECK(r.name == name);
        CHECK(r.header.find("rank") != std::string::npos);
        auto j = report_to_json(r);
        CHECK(j["suite"] == name);
        CHECK(j["failures"].size() == 0);
    }
    CHECK(suite_names().size() == 14);
}

TEST_CASE("suites are deterministic in the seed") {
    SuiteOptions opt;
    opt.count = 8;
    opt.rank = 2;
    auto a = run_suite("monotonicity", opt);
    auto b = run_suite("monotonicity", opt);
    CHECK(a.cases == b.cases);
    CHECK(report_to_json(a)["failures"] == report_to_json(b)["failures"]);
}

TEST_CASE("unknown suite") { CHECK_THROWS_AS(run_suite("nope"), Error); }
