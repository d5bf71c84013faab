#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kwb/asimulation.hpp"
#include "kwb/kripke.hpp"
#include "kwb/semantics.hpp"

namespace kwb {

// ---------------------------------------------------------------- unravelling

struct UnravelMode {
    bool strict = true;
    int depth = 0;  // bounded mode: maximal sequence length

    static UnravelMode make_strict() { return {true, 0}; }
    static UnravelMode bounded(int k) { return {false, k}; }
};

struct Unravelling {
    KripkeModel model;
    // seq[s] is the chain of base worlds behind sequence-world s; the last
    // entry is the world whose structure s copies. Element indices are shared
    // with that base world.
    std::vector<std::vector<int>> seq;
    int root = 0;

    int last(int s) const { return seq[s].back(); }
};

Unravelling unravel_full(const KripkeModel& m, int w, UnravelMode mode = UnravelMode::make_strict());
KripkeModel unravel(const KripkeModel& m, int w, UnravelMode mode = UnravelMode::make_strict());

// The relation B between m (as m1) and the unravelling (as m2), both
// directions, with tuples up to max_len.
RawAsimulation unravel_relation(const KripkeModel& m, const Unravelling& u, int max_len);

// ---------------------------------------------------------------- congruences

// cls[w][a] is the class id of a in A_w; ids are the least member index.
struct Congruence {
    std::vector<std::vector<int>> cls;

    bool related(int w, int a, int b) const { return cls[w][a] == cls[w][b]; }
    static Congruence diagonal(const KripkeModel& m);
    // Smallest equivalence per world containing the given pairs.
    static Congruence generated(const KripkeModel& m, const std::vector<std::pair<Element, int>>& pairs);
};

// a ≈(w) b iff the homomorphic images of a and b carry the same unary
// profile at every world above w. A congruence whenever all predicates are
// unary.
Congruence unary_profile_congruence(const KripkeModel& m);

std::vector<Diagnostic> congruence_diagnostics(Logic logic, const KripkeModel& m, const Congruence& cong);
bool check_congruence(Logic logic, const KripkeModel& m, const Congruence& cong);

// Elements of the quotient at w are indexed by class in increasing order of
// their least member; class_index maps (w, a) to that index.
struct Quotient {
    KripkeModel model;
    std::vector<std::vector<int>> class_index;
};

Quotient quotient_full(Logic logic, const KripkeModel& m, const Congruence& cong);
KripkeModel quotient(Logic logic, const KripkeModel& m, const Congruence& cong);

// B between m (as m1) and the quotient (as m2), both directions.
RawAsimulation quotient_relation(const KripkeModel& m, const Quotient& q, int max_len);

// ---------------------------------------------------------------- star expansion

struct StarModel {
    KripkeModel model;
    Signature base;
    int root = 0;
    std::map<Element, std::string> plus;
    std::map<Element, std::string> minus;
};

StarModel star_expand(const KripkeModel& m, int w);

// (Q⁺_w, Q⁻_w) for the least-named element of A_w.
std::pair<Formula, Formula> q_formulas(const StarModel& s, int w);

struct StarCongruence {
    KripkeModel model;  // [N, v]
    Congruence cong;
};

StarCongruence derive_star_congruence(const KripkeModel& n, int v, const std::vector<std::string>& plus_preds);
StarCongruence derive_star_congruence(const StarModel& s, const KripkeModel& n, int v);

// ---------------------------------------------------------------- isomorphic correction

struct Correction {
    KripkeModel model;  // m′: the worlds and elements of m keep their indices
    ElementMap g;
    WorldMap h;
};

Correction isomorphic_correction(Logic logic, const KripkeModel& m, const KripkeModel& n, const ElementMap& g,
                                 const WorldMap& h, int d = 2);

}  // namespace kwb
