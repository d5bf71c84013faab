#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kwb/kripke.hpp"
#include "kwb/syntax.hpp"

namespace kwb {

enum class LogicId { IL, ILeq, In, Ineq, CD, CDeq, Bi, Bieq };

struct Logic {
    LogicId id = LogicId::IL;

    Logic() = default;
    Logic(LogicId i) : id(i) {}  // NOLINT: implicit on purpose

    ModelClass model_class() const;
    bool equality() const;
    std::string name() const;
    static Logic parse(const std::string& s);  // throws Error
    static std::vector<Logic> all();
    friend bool operator==(Logic a, Logic b) { return a.id == b.id; }
};

// Throws Error when m lies outside the logic's class of intended models.
void check_admissible(Logic logic, const KripkeModel& m);

// Variable bindings; tuples ā bind x1, x2, ... by default.
using Assignment = std::vector<std::pair<std::string, int>>;
Assignment default_assignment(const Tuple& elems);

bool eval(Logic logic, const KripkeModel& m, int w, const Formula& f, const Assignment& asg);
bool eval(Logic logic, const KripkeModel& m, int w, const Formula& f, const Tuple& elems = {});

// Evaluator bound to one model; checks admissibility once and reuses compiled
// lookup tables across many formulas.
class Evaluator {
public:
    Evaluator(Logic logic, const KripkeModel& m);
    bool eval(int w, const Formula& f, const Assignment& asg = {}) const;
    const KripkeModel& model() const { return m_; }

private:
    struct Compiled;
    Logic logic_;
    const KripkeModel& m_;
    std::vector<std::string> preds_;
    std::vector<std::string> consts_;
    std::vector<std::vector<const std::set<Tuple>*>> ext_;  // [world][pred]
    std::vector<std::vector<int>> cval_;                     // [world][const]
    std::vector<std::vector<int>> up_;
};

// Enumeration parameters for rank-bounded theory slices.
struct SliceCaps {
    std::size_t max_sentences = 200;
    int max_vars = 2;
};

// Canonical sentence family: rank <= d, at most two variables, ordered by
// size then text, normalized duplicates removed, first max_sentences kept.
const std::vector<Formula>& canonical_sentences(const Signature& sig, int d, const SliceCaps& caps = {});

struct TheorySlice {
    std::vector<Formula> positive;
    std::vector<Formula> negative;
    int rank_bound = 0;
    SliceCaps caps;
    // Shared sentence family and per-sentence verdicts, for fast comparison.
    const std::vector<Formula>* family = nullptr;
    std::vector<char> truth;

    std::set<std::string> positive_keys() const;
    std::set<std::string> negative_keys() const;
};

bool slice_equal(const TheorySlice& a, const TheorySlice& b);
// a.positive ⊆ b.positive
bool positive_included(const TheorySlice& a, const TheorySlice& b);

// Fresh constants c1..cn (avoiding the signature) used for type slices.
std::vector<std::string> type_constants(const Signature& sig, std::size_t n);

TheorySlice theory_slice(Logic logic, const KripkeModel& m, int w, int d, const SliceCaps& caps = {});
TheorySlice type_slice(Logic logic, const KripkeModel& m, int w, const std::vector<std::string>& consts,
                       const Tuple& elems, int d, const SliceCaps& caps = {});
TheorySlice type_slice(Logic logic, const KripkeModel& m, int w, const Tuple& elems, int d,
                       const SliceCaps& caps = {});

struct FormulaPair {
    std::vector<Formula> gamma;
    std::vector<Formula> delta;
};

bool satisfies_pair(Logic logic, const KripkeModel& m, int w, const FormulaPair& pair, const Tuple& elems = {});

// Tuples of length 0..max_len over A_w.
std::vector<Tuple> tuples_upto(int domain_size, int max_len);

bool is_elementary_submodel_upto(Logic logic, const KripkeModel& m, const KripkeModel& n, int d);
bool check_elementary_embedding_upto(Logic logic, const KripkeModel& m, const KripkeModel& n, const ElementMap& g,
                                     const WorldMap& h, int d);

enum class TypeKind { Successor, Existential, Universal };

// Successor types use candidate.gamma/delta over Θ∪{c̄_n}; existential and
// universal types use candidate.gamma as Ξ over Θ∪{c̄_{n+1}}.
bool classify_finite_type(Logic logic, const KripkeModel& m, int w, const Tuple& elems,
                          const std::vector<std::string>& consts, const FormulaPair& candidate, TypeKind kind);

// Witness search in n for a finite type of (m, w, ā); m must be a submodel of n.
bool is_type_realized(Logic logic, const KripkeModel& m, const KripkeModel& n, int w, const Tuple& elems,
                      const std::vector<std::string>& consts, const FormulaPair& candidate, TypeKind kind);

}  // namespace kwb
