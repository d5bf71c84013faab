#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kwb/syntax.hpp"

namespace kwb {

using Tuple = std::vector<int>;

// World-qualified element: index into domains[world].
struct Element {
    int world = 0;
    int index = 0;
    friend auto operator<=>(const Element&, const Element&) = default;
};

struct WorldInterp {
    std::map<std::string, std::set<Tuple>> preds;
    std::map<std::string, int> consts;
};

// A finite Kripke model. Worlds and elements are stored by index with their
// names alongside; leq is the reflexive order, hom[w][v] the map A_w -> A_v
// (meaningful only when leq[w][v]; -1 marks an unmapped element).
struct KripkeModel {
    Signature sig;
    std::vector<std::string> worlds;
    std::vector<std::vector<char>> leq;
    std::vector<std::vector<std::string>> domains;
    std::vector<WorldInterp> interp;
    std::vector<std::vector<Tuple>> hom;

    int size() const { return static_cast<int>(worlds.size()); }
    int domain_size(int w) const { return static_cast<int>(domains[w].size()); }
    bool le(int w, int v) const { return leq[w][v] != 0; }
    bool lt(int w, int v) const { return w != v && le(w, v); }

    std::optional<int> find_world(const std::string& name) const;
    std::optional<int> find_element(int w, const std::string& name) const;
    int world_index(const std::string& name) const;  // throws Error
    int element_index(int w, const std::string& name) const;

    std::vector<int> up(int w) const;    // worlds v with w <= v
    std::vector<int> down(int w) const;  // worlds v with v <= w

    int apply(int w, int v, int a) const { return hom[w][v][a]; }
    Tuple apply(int w, int v, const Tuple& t) const;
    bool holds(int w, const std::string& pred, const Tuple& t) const;
    int constant(int w, const std::string& c) const;

    // Construction helpers.
    int add_world(const std::string& name);
    int add_element(int w, const std::string& name);
    void add_edge(int w, int v) { leq[w][v] = 1; }
    // Reflexive-transitive closure of the edges added so far.
    void close_order();
    // Fill identity homs and compose missing ones along the order.
    void complete_homs();
    std::string element_name(Element e) const { return worlds[e.world] + ":" + domains[e.world][e.index]; }
};

struct Diagnostic {
    std::string law;
    std::string detail;
};

std::vector<Diagnostic> validate_model(const KripkeModel& m);
// Throws Error with the first diagnostic when m is invalid.
void require_valid(const KripkeModel& m);

struct ClassFlags {
    bool in_class = true;
    bool su_class = true;
    bool bi_class = true;
};

ClassFlags classify_model(const KripkeModel& m);

enum class ModelClass { Any, In, Su, Bi };
bool in_class(const ClassFlags& f, ModelClass c);
const char* class_name(ModelClass c);

// Equality by names: same signature, worlds, order, domains, interpretations, homs.
bool structurally_equal(const KripkeModel& a, const KripkeModel& b);
// First difference, or empty when structurally equal.
std::string structural_diff(const KripkeModel& a, const KripkeModel& b);

KripkeModel induced_submodel(const KripkeModel& n, const std::set<int>& worlds, const std::set<Element>& elems);
KripkeModel generated_submodel(const KripkeModel& m, int w);
KripkeModel constant_extension(const KripkeModel& m, int w, const std::vector<std::string>& consts,
                               const Tuple& elems);
KripkeModel reduct(const KripkeModel& m, const Signature& sub);
KripkeModel rename_model(const KripkeModel& m, const RenamingMap& r);

// Empty when m is a submodel of n, else the first violated law.
std::string submodel_violation(const KripkeModel& m, const KripkeModel& n);
bool is_submodel(const KripkeModel& m, const KripkeModel& n);
KripkeModel union_chain(const std::vector<KripkeModel>& chain);

// Element map for check_isomorphism / embeddings: g[w][a] is the image index
// of element a at world w, living at world h[w] of the target.
using ElementMap = std::vector<std::vector<int>>;
using WorldMap = std::vector<int>;

bool check_isomorphism(const KripkeModel& m, const KripkeModel& n, const ElementMap& g, const WorldMap& h);
// Search for any isomorphism (small models only); used by tests.
std::optional<std::pair<ElementMap, WorldMap>> find_isomorphism(const KripkeModel& m, const KripkeModel& n);

struct Injectivized {
    KripkeModel model;
    // choice[w][i] : world -> element index for the i-th element of A'_w.
    std::vector<std::vector<std::map<int, int>>> choice;
};

Injectivized injectivize_full(const KripkeModel& m);
KripkeModel injectivize(const KripkeModel& m);

struct RandomModelParams {
    int max_worlds = 3;
    int max_domain = 3;
    int min_domain = 1;
    Signature sig;
    ModelClass cls = ModelClass::Any;
    double edge_prob = 0.5;
    double fact_prob = 0.3;
};

KripkeModel generate_random_model(std::uint64_t seed, const RandomModelParams& params);

// Fixtures shipped with the workbench (also available as fixtures/*.json).
KripkeModel fixture_chain(bool equality = false);
KripkeModel fixture_cd();
KripkeModel fixture_eq();

}  // namespace kwb
