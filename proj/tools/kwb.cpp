// kwb: command-line front end to the workbench.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kwb/asimulation.hpp"
#include "kwb/model_io.hpp"
#include "kwb/semantics.hpp"
#include "kwb/suites.hpp"
#include "kwb/transforms.hpp"

using namespace kwb;

namespace {

struct Globals {
    std::string logic = "IL";
    int rank = 3;
    std::uint64_t seed = 1;
    bool json = false;
};

// Thrown for usage mistakes that CLI11 cannot see (exit 2).
struct UsageError : Error {
    using Error::Error;
};

Tuple parse_tuple(const KripkeModel& m, int w, const std::string& text) {
    Tuple t;
    if (text.empty()) return t;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto a = m.find_element(w, item);
        if (!a) throw UsageError("no element " + item + " at world " + m.worlds[w]);
        t.push_back(*a);
    }
    return t;
}

int world_of(const KripkeModel& m, const std::string& name) {
    auto w = m.find_world(name);
    if (!w) throw UsageError("unknown world " + name);
    return *w;
}

void emit_model(const KripkeModel& m, const std::string& out) {
    if (out.empty()) {
        std::cout << dump_model(m) << "\n";
    } else {
        save_model(m, out);
    }
}

int cmd_validate(const std::string& path, const Globals& g) {
    auto m = load_model(path);
    auto diags = validate_model(m);
    if (g.json) {
        Json j = Json::array();
        for (const auto& d : diags) j.push_back({{"law", d.law}, {"detail", d.detail}});
        std::cout << Json{{"valid", diags.empty()}, {"diagnostics", j}}.dump(2) << "\n";
    } else if (diags.empty()) {
        auto f = classify_model(m);
        std::cout << "valid (" << m.size() << " worlds; In " << (f.in_class ? "yes" : "no") << ", Su "
                  << (f.su_class ? "yes" : "no") << ", Bi " << (f.bi_class ? "yes" : "no") << ")\n";
    } else {
        for (const auto& d : diags) std::cout << d.law << ": " << d.detail << "\n";
    }
    return diags.empty() ? 0 : 1;
}

int cmd_eval(const std::string& path, const std::string& world, const std::string& text, const std::string& tuple,
             const Globals& g) {
    auto m = load_model(path);
    require_valid(m);
    Logic logic = Logic::parse(g.logic);
    int w = world_of(m, world);
    Tuple t = parse_tuple(m, w, tuple);
    Formula f = parse_formula(text, m.sig);
    bool v = eval(logic, m, w, f, t);
    if (g.json)
        std::cout << Json{{"logic", logic.name()}, {"world", world}, {"formula", print_formula(f)}, {"value", v}}.dump(2)
                  << "\n";
    else
        std::cout << (v ? "true" : "false") << "\n";
    return 0;
}

struct Side {
    std::string model, world, tuple;
};

Signature common_signature(const Signature& a, const Signature& b) {
    Signature s;
    for (const auto& [p, k] : a.preds)
        if (b.preds.count(p) && b.preds.at(p) == k) s.preds[p] = k;
    for (const auto& c : a.consts)
        if (b.consts.count(c)) s.consts.insert(c);
    s.equality = a.equality && b.equality;
    return s;
}

int cmd_asim(const Side& l, const Side& r, const std::string& check, bool to_common, const Globals& g) {
    auto m1 = load_model(l.model);
    auto m2 = load_model(r.model);
    require_valid(m1);
    require_valid(m2);
    if (to_common) {
        Signature s = common_signature(m1.sig, m2.sig);
        m1 = reduct(m1, s);
        m2 = reduct(m2, s);
    }
    Logic logic = Logic::parse(g.logic);
    int w1 = world_of(m1, l.world), w2 = world_of(m2, r.world);
    Tuple a = parse_tuple(m1, w1, l.tuple), b = parse_tuple(m2, w2, r.tuple);
    if (a.size() != b.size()) throw UsageError("tuples differ in length");
    if (!check.empty()) {
        std::ifstream in(check);
        if (!in) throw ParseError("cannot read " + check, 0);
        Json j;
        try {
            j = Json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("relation file: " + std::string(e.what()), e.byte);
        }
        auto rel = raw_from_json(m1, m2, j);
        auto res = check_asimulation_raw(logic, m1, m2, rel, RawPair{0, w1, a, w2, b});
        if (g.json)
            std::cout << Json{{"asimulation", res.ok}, {"condition", res.condition}, {"detail", res.detail}}.dump(2)
                      << "\n";
        else
            std::cout << (res.ok ? "yes" : "no: " + res.condition + ": " + res.detail) << "\n";
        return 0;
    }
    auto fix = asimulation_fixpoint(logic, m1, m2);
    bool yes = fix.contains(RawPair{0, w1, a, w2, b});
    if (g.json)
        std::cout << Json{{"logic", logic.name()},
                          {"exists", yes},
                          {"surviving_positions", fix.surviving()},
                          {"position_space", fix.space()}}
                         .dump(2)
                  << "\n";
    else
        std::cout << (yes ? "yes" : "no") << "  (" << fix.surviving() << " of " << fix.space()
                  << " positions survive)\n";
    return 0;
}

int cmd_unravel(const std::string& path, const std::string& world, const std::string& mode, int depth,
                const std::string& out) {
    auto m = load_model(path);
    require_valid(m);
    UnravelMode um = mode == "strict" ? UnravelMode::make_strict() : UnravelMode::bounded(depth);
    if (mode != "strict" && mode != "bounded") throw UsageError("mode must be strict or bounded");
    emit_model(unravel(m, world_of(m, world), um), out);
    return 0;
}

Congruence congruence_from_file(const KripkeModel& m, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path, 0);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("congruence file: " + std::string(e.what()), e.byte);
    }
    // {"w": [["a1","a2"], ...], ...}: classes per world; unlisted elements are singletons.
    std::vector<std::pair<Element, int>> pairs;
    for (const auto& [wn, classes] : j.items()) {
        int w = world_of(m, wn);
        for (const auto& cls : classes) {
            std::vector<int> members;
            for (const auto& e : cls) members.push_back(m.element_index(w, e.get<std::string>()));
            for (std::size_t i = 1; i < members.size(); ++i) pairs.push_back({{w, members[0]}, members[i]});
        }
    }
    return Congruence::generated(m, pairs);
}

int cmd_quotient(const std::string& path, const std::string& cong, const std::string& out, const Globals& g) {
    auto m = load_model(path);
    require_valid(m);
    Logic logic = Logic::parse(g.logic);
    Congruence c = cong == "diagonal"        ? Congruence::diagonal(m)
                   : cong == "unary-profile" ? unary_profile_congruence(m)
                                             : congruence_from_file(m, cong);
    auto diags = congruence_diagnostics(logic, m, c);
    if (!diags.empty()) {
        for (const auto& d : diags) std::cerr << d.law << ": " << d.detail << "\n";
        return 1;
    }
    emit_model(quotient(logic, m, c), out);
    return 0;
}

int cmd_star(const std::string& path, const std::string& world, const std::string& out) {
    auto m = load_model(path);
    require_valid(m);
    emit_model(star_expand(m, world_of(m, world)).model, out);
    return 0;
}

int cmd_injectivize(const std::string& path, const std::string& out) {
    auto m = load_model(path);
    emit_model(injectivize(m), out);
    return 0;
}

struct Verdict {
    bool applicable = false;
    bool valid = true;
    std::string counter;
    std::size_t models = 0;
};

int cmd_diff(const std::string& sentence_file, const std::string& corpus_dir, std::size_t seeds,
             const std::string& signature, const Globals& g) {
    std::ifstream in(sentence_file);
    if (!in) throw ParseError("cannot read " + sentence_file, 0);
    std::vector<std::string> texts;
    for (std::string line; std::getline(in, line);)
        if (line.find_first_not_of(" \t") != std::string::npos && line[line.find_first_not_of(" \t")] != '#')
            texts.push_back(line);

    std::vector<std::pair<std::string, KripkeModel>> corpus{{"FIX-CHAIN", fixture_chain()},
                                                           {"FIX-CHAIN-EQ", fixture_chain(true)},
                                                           {"FIX-CD", fixture_cd()},
                                                           {"FIX-EQ", fixture_eq()}};
    if (!corpus_dir.empty()) {
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::directory_iterator(corpus_dir))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& p : files) corpus.emplace_back(p.filename().string(), load_model(p.string()));
    }
    const ModelClass classes[] = {ModelClass::Any, ModelClass::In, ModelClass::Su, ModelClass::Bi};
    std::optional<Signature> declared;
    if (!signature.empty()) {
        try {
            declared = signature_from_json(Json::parse(signature));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("signature: " + std::string(e.what()), e.byte);
        }
    }
    const std::size_t fixed = corpus.size();
    Json report = Json::array();
    int status = 0;
    if (!g.json)
        std::cout << "diff-logics  sentences=" << texts.size() << "  corpus=" << fixed << " fixed models + " << seeds
                  << " random per sentence (seeds from " << g.seed << ")\n";
    for (const auto& text : texts) {
        Json row;
        row["sentence"] = text;
        corpus.resize(fixed);
        // Random models over the declared signature, else over the symbols of
        // the sentence as read by the first corpus model that parses it.
        std::optional<Signature> sig = declared;
        for (std::size_t i = 0; i < fixed && !sig; ++i) try {
                sig = minimal_signature(parse_formula(text, corpus[i].second.sig));
            } catch (const Error&) {
            }
        if (seeds && !sig) throw UsageError("no signature for " + text + " (use --signature)");
        bool uses_eq = sig && sig->equality;
        for (std::size_t i = 0; i < seeds; ++i) {
            RandomModelParams p;
            p.sig = *sig;
            p.sig.equality = uses_eq || (i / 4) % 2 == 1;
            p.cls = classes[i % 4];
            p.max_worlds = 4;
            corpus.emplace_back("seed " + std::to_string(g.seed + i), generate_random_model(g.seed + i, p));
        }
        std::map<std::string, Verdict> verdicts;
        for (Logic logic : Logic::all()) {
            Verdict& v = verdicts[logic.name()];
            for (const auto& [name, m] : corpus) {
                if (m.sig.equality != logic.equality() || !in_class(classify_model(m), logic.model_class())) continue;
                Formula f;
                try {
                    f = parse_formula(text, m.sig);
                    if (!is_sentence(f)) throw UsageError("not a sentence: " + text);
                } catch (const UsageError&) {
                    throw;
                } catch (const Error&) {
                    continue;  // the sentence is not over this model's signature
                }
                v.applicable = true;
                ++v.models;
                Evaluator ev(logic, m);
                for (int w = 0; w < m.size() && v.valid; ++w)
                    if (!ev.eval(w, f)) {
                        v.valid = false;
                        v.counter = name + " at " + m.worlds[w];
                    }
                if (!v.valid) break;
            }
        }
        // Definitional relativizations: CD and Bi are IL read over Su and Bi models.
        auto relativized = [&](const char* base, ModelClass cls) {
            Verdict v;
            Logic logic = Logic::parse(base);
            for (const auto& [name, m] : corpus) {
                if (m.sig.equality != logic.equality() || !in_class(classify_model(m), cls)) continue;
                Formula f;
                try {
                    f = parse_formula(text, m.sig);
                } catch (const Error&) {
                    continue;
                }
                v.applicable = true;
                Evaluator ev(logic, m);
                for (int w = 0; w < m.size(); ++w) v.valid = v.valid && ev.eval(w, f);
            }
            return v;
        };
        for (auto [rel, base, cls] : {std::tuple{"CD", "IL", ModelClass::Su}, std::tuple{"CDeq", "ILeq", ModelClass::Su},
                                      std::tuple{"Bi", "IL", ModelClass::Bi}, std::tuple{"Bieq", "ILeq", ModelClass::Bi}}) {
            auto v = relativized(base, cls);
            if (v.applicable != verdicts[rel].applicable || (v.applicable && v.valid != verdicts[rel].valid)) {
                std::cerr << "relativization mismatch for " << rel << " on " << text << "\n";
                status = 1;
            }
        }
        if (!g.json) std::cout << text << "\n";
        for (Logic logic : Logic::all()) {
            const Verdict& v = verdicts[logic.name()];
            std::string verdict = !v.applicable ? "n/a" : v.valid ? "valid" : "invalid";
            row["verdicts"][logic.name()] = {{"verdict", verdict}, {"models", v.models}, {"countermodel", v.counter}};
            if (!g.json) {
                std::cout << "  " << logic.name() << std::string(6 - logic.name().size(), ' ') << verdict;
                if (v.applicable) std::cout << " over " << v.models << " models";
                if (!v.counter.empty()) std::cout << "; countermodel " << v.counter;
                std::cout << "\n";
            }
        }
        report.push_back(row);
    }
    if (g.json) std::cout << report.dump(2) << "\n";
    return status;
}

int cmd_suite(const std::string& name, std::size_t count, std::size_t max_sentences, const Globals& g) {
    if (name == "list") {
        for (const auto& n : suite_names()) std::cout << n << "\n";
        return 0;
    }
    std::vector<std::string> names;
    if (name == "all") {
        names = suite_names();
    } else {
        if (std::find(suite_names().begin(), suite_names().end(), name) == suite_names().end())
            throw UsageError("unknown suite " + name + " (try: kwb suite list)");
        names.push_back(name);
    }
    SuiteOptions opt;
    opt.seed = g.seed;
    opt.count = count;
    opt.rank = g.rank;
    if (max_sentences) opt.max_sentences = max_sentences;
    bool ok = true;
    Json all = Json::array();
    for (const auto& n : names) {
        auto r = run_suite(n, opt);
        ok = ok && r.ok();
        if (g.json)
            all.push_back(report_to_json(r));
        else
            std::cout << report_to_text(r) << (names.size() > 1 ? "\n" : "");
    }
    if (g.json) std::cout << (names.size() == 1 ? all[0] : all).dump(2) << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for finite first-order intuitionistic Kripke models"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--logic", g.logic, "IL, ILeq, In, Ineq, CD, CDeq, Bi or Bieq")->capture_default_str();
    app.add_option("--rank", g.rank, "rank bound d for theory slices")->capture_default_str();
    app.add_option("--seed", g.seed, "base seed for random corpora")->capture_default_str();
    app.add_flag("--json", g.json, "machine-readable output");
    app.fallthrough();

    std::string model, world, formula, tuple, out, mode = "strict", cong = "unary-profile", check;
    int depth = 3;

    auto* validate = app.add_subcommand("validate", "check the model laws");
    validate->add_option("model", model)->required();

    auto* ev = app.add_subcommand("eval", "evaluate a formula at a world");
    ev->add_option("--model", model)->required();
    ev->add_option("--world", world)->required();
    ev->add_option("--formula", formula)->required();
    ev->add_option("--tuple", tuple, "comma-separated elements bound to x1, x2, ...");

    Side left, right;
    auto* asim = app.add_subcommand("asim", "greatest asimulation between two pointed models");
    asim->add_option("--left", left.model)->required();
    asim->add_option("--left-world", left.world)->required();
    asim->add_option("--left-tuple", left.tuple);
    asim->add_option("--right", right.model)->required();
    asim->add_option("--right-world", right.world)->required();
    asim->add_option("--right-tuple", right.tuple);
    asim->add_option("--check", check, "verify a relation file instead of searching");
    bool to_common = false;
    asim->add_flag("--reduct", to_common, "compare the reducts to the shared signature");

    auto* unr = app.add_subcommand("unravel", "unravel a model around a world");
    unr->add_option("--model", model)->required();
    unr->add_option("--world", world)->required();
    unr->add_option("--mode", mode)->check(CLI::IsMember({"strict", "bounded"}))->capture_default_str();
    unr->add_option("--depth", depth, "maximal sequence length in bounded mode")->capture_default_str();
    unr->add_option("-o,--out", out);

    auto* quo = app.add_subcommand("quotient", "quotient by a congruence");
    quo->add_option("--model", model)->required();
    quo->add_option("--congruence", cong, "diagonal, unary-profile or a class file")->capture_default_str();
    quo->add_option("-o,--out", out);

    auto* star = app.add_subcommand("star", "expand with P+/P- tracking predicates");
    star->add_option("--model", model)->required();
    star->add_option("--world", world)->required();
    star->add_option("-o,--out", out);

    auto* inj = app.add_subcommand("injectivize", "equivalent model with injective homomorphisms");
    inj->add_option("--model", model)->required();
    inj->add_option("-o,--out", out);

    std::string sentences, corpus_dir, signature;
    std::size_t seeds = 0;
    auto* diff = app.add_subcommand("diff-logics", "validity of sentences per logic over a corpus");
    diff->add_option("--sentence-file", sentences)->required();
    diff->add_option("--corpus-dir", corpus_dir);
    diff->add_option("--seeds", seeds, "number of random models added to the corpus");
    diff->add_option("--signature", signature, "shared signature, as the model file's signature block");

    std::string suite;
    std::size_t count = 0, max_sentences = 0;
    auto* su = app.add_subcommand("suite", "run a property suite (or 'all', 'list')");
    su->add_option("name", suite)->required();
    su->add_option("--count", count, "cases (0: suite default)");
    su->add_option("--max-sentences", max_sentences, "sentence cap K (0: suite default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) return cmd_validate(model, g);
        if (*ev) return cmd_eval(model, world, formula, tuple, g);
        if (*asim) return cmd_asim(left, right, check, to_common, g);
        if (*unr) return cmd_unravel(model, world, mode, depth, out);
        if (*quo) return cmd_quotient(model, cong, out, g);
        if (*star) return cmd_star(model, world, out);
        if (*inj) return cmd_injectivize(model, out);
        if (*diff) return cmd_diff(sentences, corpus_dir, seeds, signature, g);
        if (*su) return cmd_suite(suite, count, max_sentences, g);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
