#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kwb/kripke.hpp"
#include "kwb/model_io.hpp"
#include "kwb/semantics.hpp"

namespace kwb {

struct FormulaGenParams {
    int max_rank = 3;
    int max_size = 10;   // node budget
    int free_vars = 0;   // free variables drawn from x1..x{free_vars}
    bool shadowing = true;  // quantifiers may rebind x_i
};

// Random formula over sig with FV within x1..x{free_vars} and rank <= max_rank.
Formula random_formula(std::mt19937_64& rng, const Signature& sig, const FormulaGenParams& p);

// Every {P/1} model with <= 2 worlds and 1..2 elements per world, up to
// isomorphism.
std::vector<KripkeModel> small_corpus();

struct SuiteFailure {
    std::uint64_t seed = 0;
    std::string formula;
    std::string worlds;
    std::string expected;
    std::string got;
};

struct SuiteReport {
    std::string name;
    std::string header;  // rank, caps and counts the suite ran with
    std::size_t cases = 0;
    std::vector<SuiteFailure> failures;
    std::vector<std::string> notes;  // findings that are not failures
    double seconds = 0;

    bool ok() const { return failures.empty(); }
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    std::size_t count = 0;  // 0: the suite's default
    int rank = 3;
    std::optional<std::size_t> max_sentences;  // default: SliceCaps, 20000 for hennessy-milner
};

const std::vector<std::string>& suite_names();
// Throws Error on an unknown suite name.
SuiteReport run_suite(const std::string& name, const SuiteOptions& opt = {});

Json report_to_json(const SuiteReport& r);
std::string report_to_text(const SuiteReport& r, std::size_t max_failures = 10);

}  // namespace kwb
