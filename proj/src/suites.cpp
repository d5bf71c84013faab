#include "kwb/suites.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kwb/asimulation.hpp"
#include "kwb/transforms.hpp"

namespace kwb {

// ---------------------------------------------------------------- random formulas

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct FormulaGen {
    std::mt19937_64& rng;
    const Signature& sig;
    const FormulaGenParams& p;

    Term term(const std::vector<std::string>& scope) {
        int n = static_cast<int>(scope.size() + sig.consts.size());
        int i = uniform(rng, 0, n - 1);
        if (i < static_cast<int>(scope.size())) return Term::var(scope[i]);
        return Term::cnst(*std::next(sig.consts.begin(), i - static_cast<int>(scope.size())));
    }

    Formula atomic(const std::vector<std::string>& scope) {
        bool have_terms = !scope.empty() || !sig.consts.empty();
        if (!have_terms || sig.preds.empty() || coin(rng, 0.08)) {
            if (have_terms && sig.equality && coin(rng, 0.7)) return Formula::eq(term(scope), term(scope));
            return Formula::bottom();
        }
        if (sig.equality && coin(rng, 0.2)) return Formula::eq(term(scope), term(scope));
        auto it = std::next(sig.preds.begin(), uniform(rng, 0, static_cast<int>(sig.preds.size()) - 1));
        std::vector<Term> args;
        for (int i = 0; i < it->second; ++i) args.push_back(term(scope));
        return Formula::atom(it->first, std::move(args));
    }

    Formula gen(int rank, int size, std::vector<std::string>& scope) {
        if (size <= 1 || coin(rng, 0.15)) return atomic(scope);
        // a binary node needs three nodes, a quantifier two
        std::vector<Op> ops;
        if (size >= 3) ops = {Op::And, Op::Or};
        if (rank > 0) {
            if (size >= 3) ops.insert(ops.end(), {Op::Implies, Op::Implies});
            ops.insert(ops.end(), {Op::Forall, Op::Exists});
        }
        if (ops.empty()) return atomic(scope);
        Op op = ops[uniform(rng, 0, static_cast<int>(ops.size()) - 1)];
        if (op == Op::Forall || op == Op::Exists) {
            std::string var;
            if (p.shadowing && p.free_vars > 0 && coin(rng, 0.2)) {
                var = "x" + std::to_string(uniform(rng, 1, p.free_vars));
            } else {
                var = "y" + std::to_string(uniform(rng, 1, 2));
            }
            scope.push_back(var);
            Formula body = gen(rank - 1, size - 1, scope);
            scope.pop_back();
            return Formula::quant(op, var, body);
        }
        int child_rank = op == Op::Implies ? rank - 1 : rank;
        int left = uniform(rng, 1, size - 2);
        Formula a = gen(child_rank, left, scope);
        Formula b = gen(child_rank, size - 1 - left, scope);
        return Formula::binary(op, a, b);
    }
};

}  // namespace

Formula random_formula(std::mt19937_64& rng, const Signature& sig, const FormulaGenParams& p) {
    std::vector<std::string> scope;
    for (int i = 1; i <= p.free_vars; ++i) scope.push_back("x" + std::to_string(i));
    FormulaGen g{rng, sig, p};
    return g.gen(p.max_rank, p.max_size, scope);
}

// ---------------------------------------------------------------- small corpus

std::vector<KripkeModel> small_corpus() {
    Signature sig;
    sig.preds["P"] = 1;
    std::vector<KripkeModel> out;
    for (int nw = 1; nw <= 2; ++nw)
        for (int chain = 0; chain <= (nw == 2 ? 1 : 0); ++chain)
            for (int d0 = 1; d0 <= 2; ++d0)
                for (int d1 = 1; d1 <= (nw == 2 ? 2 : 1); ++d1) {
                    int ds[2] = {d0, d1};
                    int homs = chain ? (1 << d0) : 1;
                    int cells = d0 + (nw == 2 ? d1 : 0);
                    for (int h = 0; h < homs; ++h)
                        for (int pm = 0; pm < (1 << cells); ++pm) {
                            KripkeModel m;
                            m.sig = sig;
                            for (int w = 0; w < nw; ++w) m.add_world("w" + std::to_string(w));
                            for (int w = 0; w < nw; ++w)
                                for (int a = 0; a < ds[w]; ++a)
                                    m.add_element(w, "e" + std::to_string(a) + "_" + std::to_string(w));
                            if (chain) m.add_edge(0, 1);
                            m.close_order();
                            if (chain) {
                                m.hom[0][1].assign(d0, 0);
                                for (int a = 0; a < d0; ++a) m.hom[0][1][a] = ((h >> a) & 1) % d1;
                            }
                            int bit = 0;
                            for (int w = 0; w < nw; ++w)
                                for (int a = 0; a < ds[w]; ++a, ++bit)
                                    if ((pm >> bit) & 1) m.interp[w].preds["P"].insert({a});
                            m.complete_homs();
                            if (!validate_model(m).empty()) continue;
                            bool dup = std::any_of(out.begin(), out.end(),
                                                   [&](const KripkeModel& o) { return find_isomorphism(o, m).has_value(); });
                            if (!dup) out.push_back(std::move(m));
                        }
                }
    return out;
}

// ---------------------------------------------------------------- suites

namespace {

using Clock = std::chrono::steady_clock;

Signature make_sig(std::initializer_list<std::pair<const char*, int>> preds, std::initializer_list<const char*> consts,
                   bool equality = false) {
    Signature s;
    for (const auto& [p, k] : preds) s.preds[p] = k;
    for (const char* c : consts) s.consts.insert(c);
    s.equality = equality;
    return s;
}

KripkeModel random_model(std::uint64_t seed, const Signature& sig, ModelClass cls, int max_worlds = 3,
                         int max_domain = 3) {
    RandomModelParams p;
    p.sig = sig;
    p.cls = cls;
    p.max_worlds = max_worlds;
    p.max_domain = max_domain;
    return generate_random_model(seed, p);
}

Tuple random_tuple(std::mt19937_64& rng, int domain, int len) {
    Tuple t;
    for (int i = 0; i < len; ++i) t.push_back(uniform(rng, 0, domain - 1));
    return t;
}

std::string show_tuple(const KripkeModel& m, int w, const Tuple& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + m.domains[w][t[i]];
    return s + ")";
}

std::string at(const KripkeModel& m, int w, const Tuple& t = {}) { return m.worlds[w] + show_tuple(m, w, t); }

const char* tf(bool b) { return b ? "true" : "false"; }

int pick_up(std::mt19937_64& rng, const KripkeModel& m, int w) {
    auto ups = m.up(w);
    return ups[uniform(rng, 0, static_cast<int>(ups.size()) - 1)];
}

struct Ctx {
    SuiteReport& r;
    const SuiteOptions& opt;
    std::size_t count;

    void fail(std::uint64_t seed, std::string formula, std::string worlds, std::string expected, std::string got) {
        r.failures.push_back({seed, std::move(formula), std::move(worlds), std::move(expected), std::move(got)});
    }
    std::uint64_t seed(std::size_t i) const { return opt.seed * 1000003ULL + i; }
    SliceCaps caps(std::size_t dflt = SliceCaps{}.max_sentences) const {
        SliceCaps c;
        c.max_sentences = opt.max_sentences.value_or(dflt);
        return c;
    }
};

std::string caps_text(const SliceCaps& c) {
    return "K=" + std::to_string(c.max_sentences) + " sentences, " + std::to_string(c.max_vars) + " variables";
}

// Sentence sweep shared by the two separation suites.
void separation(Ctx& c, Logic fixture_logic, const KripkeModel& fixture, Logic corpus_logic, const Signature& sig,
                const std::string& text) {
    Formula f = parse_formula(text, fixture.sig);
    int w = fixture.world_index("w");
    bool got = eval(fixture_logic, fixture, w, f);
    ++c.r.cases;
    if (got) c.fail(0, text, "fixture " + at(fixture, w) + " under " + fixture_logic.name(), "false", "true");
    Formula g = parse_formula(text, sig);
    for (std::size_t i = 0; i < c.count; ++i) {
        auto m = random_model(c.seed(i), sig, corpus_logic.model_class(), 4, 3);
        Evaluator ev(corpus_logic, m);
        ++c.r.cases;
        for (int v = 0; v < m.size(); ++v)
            if (!ev.eval(v, g)) {
                c.fail(c.seed(i), text, at(m, v) + " under " + corpus_logic.name(), "true", "false");
                break;
            }
    }
    c.r.header += "  corpus=" + std::to_string(c.count) + " " + class_name(corpus_logic.model_class()) +
                  " models (<=4 worlds, <=3 elements)";
}

void suite_cd(Ctx& c) {
    separation(c, LogicId::IL, fixture_cd(), LogicId::CD, make_sig({{"P", 1}, {"Q", 1}}, {"c"}),
               "(forall x. P(x) | Q(c)) -> Q(c) | forall x. P(x)");
}

void suite_eq(Ctx& c) {
    separation(c, LogicId::ILeq, fixture_eq(), LogicId::Ineq, make_sig({{"P", 1}}, {"c"}, true),
               "forall x. forall y. x = y | ~(x = y)");
}

struct Case {
    std::mt19937_64 rng;
    Logic logic;
    KripkeModel m;
    int w;
    Tuple a;
    Formula f;
};

// Random logic, admissible model, world, tuple and formula with FV within the tuple.
Case random_case(std::uint64_t seed, int rank) {
    std::mt19937_64 rng(seed);
    Logic logic = Logic::all()[seed % 8];
    auto sig = make_sig({{"P", 1}, {"R", 2}}, {"c"}, logic.equality());
    auto m = random_model(seed, sig, logic.model_class(), 4, 3);
    int w = uniform(rng, 0, m.size() - 1);
    int n = uniform(rng, 0, 2);
    Tuple a = random_tuple(rng, m.domain_size(w), n);
    FormulaGenParams fp;
    fp.max_rank = rank;
    fp.free_vars = n;
    fp.max_size = uniform(rng, 3, 12);
    Formula f = random_formula(rng, m.sig, fp);
    return {std::move(rng), logic, std::move(m), w, std::move(a), std::move(f)};
}

void suite_monotonicity(Ctx& c) {
    std::size_t live = 0;
    for (std::size_t i = 0; i < c.count; ++i) {
        auto k = random_case(c.seed(i), c.opt.rank);
        int v = pick_up(k.rng, k.m, k.w);
        Evaluator ev(k.logic, k.m);
        bool here = ev.eval(k.w, k.f, default_assignment(k.a));
        Tuple b = k.m.apply(k.w, v, k.a);
        bool there = ev.eval(v, k.f, default_assignment(b));
        ++c.r.cases;
        live += here;
        if (here && !there)
            c.fail(c.seed(i), print_formula(k.f), k.logic.name() + " " + at(k.m, k.w, k.a) + " <= " + at(k.m, v, b),
                   "true at successor", "false");
    }
    c.r.notes.push_back(std::to_string(live) + " cases with a true antecedent");
}

void suite_substitution(Ctx& c) {
    for (std::size_t i = 0; i < c.count; ++i) {
        auto k = random_case(c.seed(i), c.opt.rank);
        auto consts = type_constants(k.m.sig, k.a.size());
        VarConst bind;
        for (std::size_t j = 0; j < consts.size(); ++j) bind.emplace_back("x" + std::to_string(j + 1), consts[j]);
        auto ext = constant_extension(k.m, k.w, consts, k.a);
        bool lhs = eval(k.logic, k.m, k.w, k.f, k.a);
        Formula g = substitute_constants(k.f, bind);
        bool rhs = eval(k.logic, ext, ext.world_index(k.m.worlds[k.w]), g);
        ++c.r.cases;
        if (lhs != rhs)
            c.fail(c.seed(i), print_formula(k.f) + "  vs  " + print_formula(g), k.logic.name() + " " + at(k.m, k.w, k.a),
                   tf(lhs), tf(rhs));
    }
}

void suite_generated(Ctx& c) {
    for (std::size_t i = 0; i < c.count; ++i) {
        auto k = random_case(c.seed(i), c.opt.rank);
        auto g = generated_submodel(k.m, k.w);
        bool lhs = eval(k.logic, k.m, k.w, k.f, k.a);
        bool rhs = eval(k.logic, g, g.world_index(k.m.worlds[k.w]), k.f, k.a);
        ++c.r.cases;
        if (lhs != rhs) c.fail(c.seed(i), print_formula(k.f), k.logic.name() + " " + at(k.m, k.w, k.a), tf(lhs), tf(rhs));
    }
}

void suite_cutoff(Ctx& c) {
    static const char* parts[] = {"[[M,w],v] = [M,v]", "[([M,w],c/a),v] = ([M,v],c/H(a))",
                                  "iterated = simultaneous extension", "extension reduct to Theta",
                                  "extension reduct to Theta+c"};
    auto check = [&](std::uint64_t seed, int part, const std::string& where, const KripkeModel& x,
                     const KripkeModel& y) {
        ++c.r.cases;
        auto d = structural_diff(x, y);
        if (!d.empty()) c.fail(seed, parts[part], where, "structurally equal", d);
    };
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        std::mt19937_64 rng(seed);
        auto sig = make_sig({{"P", 1}, {"Q", 1}, {"R", 2}}, {"c", "d"}, coin(rng, 0.3));
        auto m = random_model(seed, sig, ModelClass::Any, 4, 3);
        int w = uniform(rng, 0, m.size() - 1);
        int v = pick_up(rng, m, w);
        int n = uniform(rng, 0, 2);
        Tuple a = random_tuple(rng, m.domain_size(w), n + 1);
        Tuple an(a.begin(), a.begin() + n);
        auto cs = type_constants(sig, n + 1);
        std::vector<std::string> csn(cs.begin(), cs.begin() + n);
        Signature theta;
        for (const auto& [p, k] : sig.preds)
            if (coin(rng, 0.5)) theta.preds[p] = k;
        for (const auto& x : sig.consts)
            if (coin(rng, 0.5)) theta.consts.insert(x);
        theta.equality = sig.equality && coin(rng, 0.5);
        std::string where = at(m, w, a) + " v=" + m.worlds[v];

        auto gw = generated_submodel(m, w);
        check(seed, 0, where, generated_submodel(gw, gw.world_index(m.worlds[v])), generated_submodel(m, v));

        auto ext = constant_extension(m, w, csn, an);
        int ew = ext.world_index(m.worlds[w]);
        check(seed, 1, where, generated_submodel(ext, ext.world_index(m.worlds[v])),
              constant_extension(m, v, csn, m.apply(w, v, an)));

        auto iterated = constant_extension(ext, ew, {cs[n]}, {a[n]});
        auto simultaneous = constant_extension(m, w, cs, a);
        auto regen = generated_submodel(ext, ew);
        auto via_regen = constant_extension(regen, regen.world_index(m.worlds[w]), {cs[n]}, {a[n]});
        ++c.r.cases;
        auto d1 = structural_diff(iterated, simultaneous);
        auto d2 = structural_diff(simultaneous, via_regen);
        if (!d1.empty() || !d2.empty()) c.fail(seed, parts[2], where, "structurally equal", d1.empty() ? d2 : d1);

        check(seed, 3, where, reduct(ext, theta), generated_submodel(reduct(m, theta), w));
        Signature theta_c = theta;
        theta_c.consts.insert(csn.begin(), csn.end());
        check(seed, 4, where, reduct(ext, theta_c), constant_extension(reduct(m, theta), w, csn, an));
    }
    c.r.header += "  parts=5 x " + std::to_string(c.count);
}

// Length-0 and length-1 starts for every world pair of a model pair.
template <class F>
void for_starts(const KripkeModel& m1, const KripkeModel& m2, int max_len, F f) {
    for (int w = 0; w < m1.size(); ++w)
        for (int v = 0; v < m2.size(); ++v)
            for (int len = 0; len <= max_len; ++len)
                for (const auto& a : tuples_upto(m1.domain_size(w), len))
                    if (static_cast<int>(a.size()) == len)
                        for (const auto& b : tuples_upto(m2.domain_size(v), len))
                            if (static_cast<int>(b.size()) == len) f(w, a, v, b);
}

void suite_quotient_faithfulness(Ctx& c) {
    auto corpus = small_corpus();
    const int bound = 3;
    std::size_t yes = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (std::size_t j = 0; j < corpus.size(); ++j) {
            auto q = asimulation_fixpoint(LogicId::IL, corpus[i], corpus[j]);
            auto raw = bounded_raw_asimulation(LogicId::IL, corpus[i], corpus[j], bound);
            for_starts(corpus[i], corpus[j], 1, [&](int w, const Tuple& a, int v, const Tuple& b) {
                RawPair s{0, w, a, v, b};
                bool x = q.contains(s);
                bool y = raw.count(s) != 0;
                ++c.r.cases;
                yes += x;
                if (x != y)
                    c.fail(i * 1000 + j, "-", "corpus " + std::to_string(i) + ":" + at(corpus[i], w, a) + " -> " +
                                                  std::to_string(j) + ":" + at(corpus[j], v, b),
                           std::string("raw ") + tf(y), std::string("quotient ") + tf(x));
            });
        }
    c.r.header += "  corpus=" + std::to_string(corpus.size()) + " models, raw tuple bound=" + std::to_string(bound) +
                  ", starts of length <= 1";
    c.r.notes.push_back(std::to_string(yes) + " starts admit an asimulation");
}

void suite_preservation(Ctx& c) {
    SliceCaps caps = c.caps();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        std::mt19937_64 rng(seed);
        Logic logic = i % 4 == 3 ? LogicId::ILeq : LogicId::IL;
        auto sig = make_sig({{"P", 1}}, {}, logic.equality());
        auto m1 = random_model(seed, sig, ModelClass::Any, 2, 2);
        auto m2 = random_model(seed ^ 0x9e3779b97f4a7c15ULL, sig, ModelClass::Any, 2, 2);
        int w1 = uniform(rng, 0, m1.size() - 1);
        int w2 = uniform(rng, 0, m2.size() - 1);
        int n = uniform(rng, 0, 1);
        Tuple a = random_tuple(rng, m1.domain_size(w1), n);
        Tuple b = random_tuple(rng, m2.domain_size(w2), n);
        ++c.r.cases;
        if (!asim_exists(logic, m1, w1, a, m2, w2, b)) continue;
        ++hits;
        auto s1 = type_slice(logic, m1, w1, a, c.opt.rank, caps);
        auto s2 = type_slice(logic, m2, w2, b, c.opt.rank, caps);
        if (positive_included(s1, s2)) continue;
        auto k2 = s2.positive_keys();
        std::string lost;
        for (const auto& f : s1.positive)
            if (!k2.count(print_formula(f))) {
                lost = print_formula(f);
                break;
            }
        c.fail(seed, lost, logic.name() + " " + at(m1, w1, a) + " -> " + at(m2, w2, b), "true at target", "false");
    }
    c.r.header += "  pairs over {P/1}, <=2 worlds, <=2 elements";
    c.r.notes.push_back(std::to_string(hits) + " of " + std::to_string(c.count) + " pairs admit an asimulation");
}

struct HmCount {
    std::size_t pairs = 0;
    std::vector<std::string> asim_only, incl_only;
};

HmCount hennessy_milner(const std::vector<KripkeModel>& corpus, const std::vector<AsimRelation>& fix, int d,
                        const SliceCaps& caps) {
    std::vector<std::vector<TheorySlice>> sl;
    for (const auto& m : corpus) {
        sl.emplace_back();
        for (int w = 0; w < m.size(); ++w) sl.back().push_back(theory_slice(LogicId::IL, m, w, d, caps));
    }
    HmCount out;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (std::size_t j = 0; j < corpus.size(); ++j)
            for (int w = 0; w < corpus[i].size(); ++w)
                for (int v = 0; v < corpus[j].size(); ++v) {
                    ++out.pairs;
                    bool asim = fix[i * corpus.size() + j].contains(RawPair{0, w, {}, v, {}});
                    bool incl = positive_included(sl[i][w], sl[j][v]);
                    std::string tag = std::to_string(i) + ":" + corpus[i].worlds[w] + " -> " + std::to_string(j) +
                                      ":" + corpus[j].worlds[v];
                    if (asim && !incl) out.asim_only.push_back(tag);
                    if (!asim && incl) out.incl_only.push_back(tag);
                }
    return out;
}

void suite_hennessy_milner(Ctx& c) {
    auto corpus = small_corpus();
    std::vector<AsimRelation> fix;
    for (const auto& m1 : corpus)
        for (const auto& m2 : corpus) fix.push_back(asimulation_fixpoint(LogicId::IL, m1, m2));
    SliceCaps caps = c.caps(20000);
    auto main = hennessy_milner(corpus, fix, c.opt.rank, caps);
    c.r.cases = main.pairs;
    for (const auto& t : main.asim_only) c.fail(0, "-", t, "Tp+ inclusion", "asimulation without inclusion");
    for (const auto& t : main.incl_only) c.fail(0, "-", t, "asimulation", "inclusion without asimulation");
    c.r.header = "suite hennessy-milner  rank=" + std::to_string(c.opt.rank) + "  caps: " + caps_text(caps) +
                 "  corpus=" + std::to_string(corpus.size()) + " models";
    if (caps.max_sentences != SliceCaps{}.max_sentences) {
        SliceCaps narrow;
        auto low = hennessy_milner(corpus, fix, c.opt.rank, narrow);
        std::string note = "at the default cap (" + caps_text(narrow) + "): " +
                           std::to_string(low.asim_only.size() + low.incl_only.size()) + " disagreements";
        for (const auto& t : low.incl_only) note += "; " + t + " (inclusion without asimulation)";
        for (const auto& t : low.asim_only) note += "; " + t + " (asimulation without inclusion)";
        c.r.notes.push_back(note);
    }
}

std::vector<KripkeModel> fixtures() { return {fixture_chain(), fixture_chain(true), fixture_cd(), fixture_eq()}; }

Logic base_logic(const KripkeModel& m) { return m.sig.equality ? LogicId::ILeq : LogicId::IL; }

// Both directions of a relation that lists its own reverse pairs.
void check_both(Ctx& c, std::uint64_t seed, const std::string& what, Logic logic, const KripkeModel& m1,
                const KripkeModel& m2, const RawAsimulation& rel, int w1, int w2) {
    auto fwd = check_asimulation_raw(logic, m1, m2, rel, RawPair{0, w1, {}, w2, {}});
    RawAsimulation flipped;
    for (auto p : rel) {
        p.dir = 1 - p.dir;
        flipped.insert(std::move(p));
    }
    auto back = check_asimulation_raw(logic, m2, m1, flipped, RawPair{0, w2, {}, w1, {}});
    c.r.cases += 2;
    if (!fwd.ok) c.fail(seed, what, at(m1, w1) + " -> " + at(m2, w2), "asimulation", fwd.condition + ": " + fwd.detail);
    if (!back.ok)
        c.fail(seed, what, at(m2, w2) + " -> " + at(m1, w1), "asimulation", back.condition + ": " + back.detail);
}

void suite_unravel(Ctx& c) {
    auto models = fixtures();
    auto sig = make_sig({{"P", 1}, {"R", 2}}, {"c"});
    for (std::size_t i = 0; i < c.count; ++i) models.push_back(random_model(c.seed(i), sig, ModelClass::Any, 4, 3));
    SliceCaps caps = c.caps();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        std::uint64_t seed = i < 4 ? i : c.seed(i - 4);
        Logic logic = base_logic(m);
        for (int w = 0; w < m.size(); ++w) {
            auto u = unravel_full(m, w);
            auto diags = validate_model(u.model);
            ++c.r.cases;
            if (!diags.empty()) c.fail(seed, "unravelling", at(m, w), "valid model", diags[0].law);
            check_both(c, seed, "B", logic, m, u.model, unravel_relation(m, u, 2), w, u.root);
            std::map<int, std::vector<TheorySlice>> first;  // last world -> slices of its first sequence
            for (int s = 0; s < u.model.size(); ++s) {
                int x = u.last(s);
                std::vector<TheorySlice> here;
                for (const auto& a : tuples_upto(m.domain_size(x), 1)) {
                    auto base = type_slice(logic, m, x, a, c.opt.rank, caps);
                    auto un = type_slice(logic, u.model, s, a, c.opt.rank, caps);
                    ++c.r.cases;
                    if (!slice_equal(base, un))
                        c.fail(seed, "type slice", at(m, x, a) + " vs " + at(u.model, s, a), "equal", "different");
                    here.push_back(std::move(un));
                }
                auto it = first.find(x);
                if (it == first.end()) {
                    first.emplace(x, std::move(here));
                    continue;
                }
                for (std::size_t k = 0; k < here.size(); ++k) {
                    ++c.r.cases;
                    if (!slice_equal(it->second[k], here[k]))
                        c.fail(seed, "history independence", u.model.worlds[s], "equal", "different");
                }
            }
        }
    }
    c.r.header += "  models=4 fixtures + " + std::to_string(c.count) + " random, B tuple bound=2, tuples <= 1";
}

void suite_quotient(Ctx& c) {
    auto sig = make_sig({{"P", 1}, {"Q", 1}}, {"c"});
    SliceCaps caps = c.caps();
    std::size_t merged = 0;
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        auto m = random_model(seed, sig, ModelClass::Any, 4, 3);
        auto cong = unary_profile_congruence(m);
        ++c.r.cases;
        auto diags = congruence_diagnostics(LogicId::IL, m, cong);
        if (!diags.empty()) {
            c.fail(seed, diags[0].law, diags[0].detail, "congruence", "rejected");
            continue;
        }
        auto q = quotient_full(LogicId::IL, m, cong);
        bool nontrivial = false;
        for (int w = 0; w < m.size(); ++w) nontrivial |= q.model.domain_size(w) < m.domain_size(w);
        merged += nontrivial;
        check_both(c, seed, "B", LogicId::IL, m, q.model, quotient_relation(m, q, 2), 0, 0);
        for (int w = 0; w < m.size(); ++w)
            for (const auto& a : tuples_upto(m.domain_size(w), 1)) {
                Tuple ca;
                for (int x : a) ca.push_back(q.class_index[w][x]);
                ++c.r.cases;
                if (!slice_equal(type_slice(LogicId::IL, m, w, a, c.opt.rank, caps),
                                 type_slice(LogicId::IL, q.model, w, ca, c.opt.rank, caps)))
                    c.fail(seed, "type slice", at(m, w, a) + " vs " + at(q.model, w, ca), "equal", "different");
            }
    }
    c.r.notes.push_back(std::to_string(merged) + " of " + std::to_string(c.count) + " congruences merge elements");
}

void suite_star(Ctx& c) {
    auto sig = make_sig({{"P", 1}, {"R", 2}}, {"c"});
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        std::mt19937_64 rng(seed);
        auto m = random_model(seed, sig, ModelClass::Any, 4, 3);
        int w = uniform(rng, 0, m.size() - 1);
        auto s = star_expand(m, w);
        auto diags = validate_model(s.model);
        ++c.r.cases;
        if (!diags.empty()) {
            c.fail(seed, "star expansion", at(m, w), "valid model", diags[0].law + ": " + diags[0].detail);
            continue;
        }
        Evaluator ev(LogicId::IL, s.model);
        for (int x = 0; x < m.size(); ++x) {
            auto [qp, qm] = q_formulas(s, x);
            for (int v = 0; v < m.size(); ++v) {
                c.r.cases += 2;
                bool p = ev.eval(v, qp), n = ev.eval(v, qm);
                if (p != m.le(x, v))
                    c.fail(seed, print_formula(qp), "at " + m.worlds[v], tf(m.le(x, v)), tf(p));
                if (n != !m.le(v, x))
                    c.fail(seed, print_formula(qm), "at " + m.worlds[v], tf(!m.le(v, x)), tf(n));
            }
        }
        auto sc = derive_star_congruence(s, s.model, w);
        auto cd = congruence_diagnostics(LogicId::IL, sc.model, sc.cong);
        ++c.r.cases;
        if (!cd.empty()) c.fail(seed, cd[0].law, "derived congruence at " + m.worlds[w], "congruence", cd[0].detail);
    }
}

void suite_injectivize(Ctx& c) {
    auto sig = make_sig({{"P", 1}, {"R", 2}}, {"c"});
    std::size_t su_inputs = 0;
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        std::mt19937_64 rng(seed);
        bool su = i % 2 == 1;
        su_inputs += su;
        auto m = random_model(seed, sig, su ? ModelClass::Su : ModelClass::Any, 3, 3);
        Injectivized inj;
        ++c.r.cases;
        try {
            inj = injectivize_full(m);
        } catch (const Error& e) {
            c.fail(seed, "injectivize", "-", "a model", e.what());
            continue;
        }
        auto flags = classify_model(inj.model);
        ++c.r.cases;
        if (!flags.in_class) c.fail(seed, "In class", "-", "true", "false");
        if (su) {
            ++c.r.cases;
            if (!flags.su_class) c.fail(seed, "Su preserved", "-", "true", "false");
        }
        Evaluator e1(LogicId::IL, m), e2(LogicId::IL, inj.model);
        for (int k = 0; k < 6; ++k) {
            int n = uniform(rng, 0, 2);
            FormulaGenParams fp;
            fp.max_rank = c.opt.rank;
            fp.free_vars = n;
            fp.max_size = uniform(rng, 3, 12);
            Formula f = random_formula(rng, sig, fp);
            for (int w = 0; w < m.size(); ++w) {
                int dom = inj.model.domain_size(w);
                for (int t = 0; t < 8; ++t) {
                    Tuple fs = random_tuple(rng, dom, n), as;
                    for (int x : fs) as.push_back(inj.choice[w][x].at(w));
                    bool lhs = e1.eval(w, f, default_assignment(as));
                    bool rhs = e2.eval(w, f, default_assignment(fs));
                    ++c.r.cases;
                    if (lhs != rhs) c.fail(seed, print_formula(f), at(inj.model, w, fs), tf(lhs), tf(rhs));
                }
            }
        }
    }
    c.r.header += "  models=" + std::to_string(c.count) + " (" + std::to_string(su_inputs) + " Su)";
}

RenamingMap random_renaming(std::mt19937_64& rng, const Signature& sig) {
    RenamingMap r;
    std::map<int, std::vector<std::string>> by_arity;
    for (const auto& [p, k] : sig.preds) by_arity[k].push_back(p);
    for (auto& [k, ps] : by_arity) {
        auto targets = ps;
        std::shuffle(targets.begin(), targets.end(), rng);
        bool tag = coin(rng, 0.5);
        for (std::size_t i = 0; i < ps.size(); ++i) r.preds[ps[i]] = targets[i] + (tag ? "_r" : "");
    }
    std::vector<std::string> cs(sig.consts.begin(), sig.consts.end()), ts = cs;
    std::shuffle(ts.begin(), ts.end(), rng);
    bool tag = coin(rng, 0.5);
    for (std::size_t i = 0; i < cs.size(); ++i) r.consts[cs[i]] = ts[i] + (tag ? "_r" : "");
    return r;
}

void suite_renaming(Ctx& c) {
    auto sig = make_sig({{"P", 1}, {"Q", 1}, {"R", 2}}, {"c", "d"});
    {
        std::mt19937_64 rng(c.opt.seed);
        auto r = random_renaming(rng, sig);
        const auto& family = canonical_sentences(sig, 2);
        std::set<Formula> images;
        for (const auto& f : family) images.insert(rename_formula(r, f));
        ++c.r.cases;
        if (images.size() != family.size())
            c.fail(c.opt.seed, "injectivity on the rank-2 family", "-", std::to_string(family.size()),
                   std::to_string(images.size()));
        // Surjectivity: the family is cut by text order, which renaming
        // changes, so only the size levels below the largest are complete.
        auto target = rename_signature(r, sig);
        const auto& tfam = canonical_sentences(target, 2);
        auto top = [](const std::vector<Formula>& fam) {
            std::size_t t = 0;
            for (const auto& f : fam) t = std::max(t, f.size());
            return t;
        };
        std::size_t cut = std::min(top(family), top(tfam));
        std::set<std::string> mapped;
        for (const auto& f : family)
            if (f.size() < cut) mapped.insert(print_formula(normalize(rename_formula(r, f))));
        std::set<std::string> expect;
        for (const auto& f : tfam)
            if (f.size() < cut) expect.insert(print_formula(normalize(f)));
        ++c.r.cases;
        if (mapped != expect)
            c.fail(c.opt.seed, "surjectivity on the complete rank-2 levels", "-", std::to_string(expect.size()),
                   std::to_string(mapped.size()));
        c.r.notes.push_back("rank-2 family: " + std::to_string(family.size()) + " sentences, " +
                            std::to_string(expect.size()) + " in complete size levels");
    }
    for (std::size_t i = 0; i < c.count; ++i) {
        std::uint64_t seed = c.seed(i);
        std::mt19937_64 rng(seed);
        auto m = random_model(seed, sig, ModelClass::Any, 3, 3);
        auto r = random_renaming(rng, sig);
        int w = uniform(rng, 0, m.size() - 1);
        int n = uniform(rng, 0, 2);
        Tuple a = random_tuple(rng, m.domain_size(w), n);
        FormulaGenParams fp;
        fp.max_rank = c.opt.rank;
        fp.free_vars = n;
        fp.max_size = uniform(rng, 3, 12);
        Formula f = random_formula(rng, sig, fp);
        Formula g = rename_formula(r, f);
        std::string text = print_formula(f);
        c.r.cases += 5;
        if (rename_formula(r.inverse(), g) != f) c.fail(seed, text, "-", "inverse recovers", print_formula(g));
        if (free_vars(f) != free_vars(g) || bound_vars(f) != bound_vars(g))
            c.fail(seed, text, "-", "same FV/BV", print_formula(g));
        auto theta = minimal_signature(f);
        RenamingMap restricted;
        for (const auto& [p, k] : theta.preds) restricted.preds[p] = r.preds.at(p);
        for (const auto& x : theta.consts) restricted.consts[x] = r.consts.at(x);
        if (!(minimal_signature(g) == rename_signature(restricted, theta)) || rename_formula(restricted, f) != g)
            c.fail(seed, text, "-", "restricted renaming", print_formula(g));
        auto rm = rename_model(m, r);
        bool lhs = eval(LogicId::IL, m, w, f, a), rhs = eval(LogicId::IL, rm, w, g, a);
        if (lhs != rhs) c.fail(seed, text, at(m, w, a), tf(lhs), tf(rhs));
        int v = pick_up(rng, m, w);
        auto d = structural_diff(generated_submodel(rm, v), rename_model(generated_submodel(m, v), r));
        if (!d.empty()) c.fail(seed, "generated renaming", m.worlds[v], "structurally equal", d);
    }
}

struct SuiteDef {
    const char* name;
    std::size_t count;
    void (*run)(Ctx&);
};

const std::vector<SuiteDef>& defs() {
    static const std::vector<SuiteDef> d{
        {"cd-separation", 500, suite_cd},
        {"eq-separation", 500, suite_eq},
        {"monotonicity", 500, suite_monotonicity},
        {"substitution", 500, suite_substitution},
        {"generated-submodel", 500, suite_generated},
        {"cutoff", 200, suite_cutoff},
        {"quotient-faithfulness", 0, suite_quotient_faithfulness},
        {"preservation", 200, suite_preservation},
        {"hennessy-milner", 0, suite_hennessy_milner},
        {"unravel-asim", 100, suite_unravel},
        {"quotient", 100, suite_quotient},
        {"star", 200, suite_star},
        {"injectivize", 100, suite_injectivize},
        {"renaming", 200, suite_renaming},
    };
    return d;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& d : defs()) v.push_back(d.name);
        return v;
    }();
    return names;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& opt) {
    auto it = std::find_if(defs().begin(), defs().end(), [&](const SuiteDef& d) { return name == d.name; });
    if (it == defs().end()) throw Error("unknown suite: " + name);
    SuiteReport r;
    r.name = name;
    Ctx c{r, opt, opt.count ? opt.count : it->count};
    SliceCaps caps = c.caps();
    r.header = "suite " + name + "  rank=" + std::to_string(opt.rank) + "  caps: " + caps_text(caps) +
               "  seed=" + std::to_string(opt.seed);
    auto t0 = Clock::now();
    it->run(c);
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
}

Json report_to_json(const SuiteReport& r) {
    Json j;
    j["suite"] = r.name;
    j["header"] = r.header;
    j["cases"] = r.cases;
    j["seconds"] = r.seconds;
    j["ok"] = r.ok();
    j["notes"] = r.notes;
    Json fs = Json::array();
    for (const auto& f : r.failures)
        fs.push_back({{"seed", f.seed}, {"formula", f.formula}, {"worlds", f.worlds}, {"expected", f.expected},
                      {"got", f.got}});
    j["failures"] = fs;
    return j;
}

std::string report_to_text(const SuiteReport& r, std::size_t max_failures) {
    std::ostringstream out;
    out << r.header << "\n";
    out << "cases " << r.cases << "  failures " << r.failures.size() << "  time " << r.seconds << "s\n";
    for (const auto& n : r.notes) out << "note: " << n << "\n";
    for (std::size_t i = 0; i < r.failures.size() && i < max_failures; ++i) {
        const auto& f = r.failures[i];
        out << "FAIL seed=" << f.seed << " at " << f.worlds << " : " << f.formula << " expected " << f.expected
            << ", got " << f.got << "\n";
    }
    if (r.failures.size() > max_failures) out << "... " << r.failures.size() - max_failures << " more\n";
    return out.str();
}

}  // namespace kwb
