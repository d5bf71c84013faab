#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kwb/kripke.hpp"
#include "kwb/model_io.hpp"
#include "kwb/semantics.hpp"

namespace kwb {

// dir 0: the source (w; alpha) lives in m1 and the target in m2; dir 1 the
// other way round.
struct RawPair {
    int dir = 0;
    int w = 0;
    Tuple alpha;
    int v = 0;
    Tuple beta;
    friend auto operator<=>(const RawPair&, const RawPair&) = default;
};

using RawAsimulation = std::set<RawPair>;

struct RawCheck {
    bool ok = true;
    std::string condition;  // "type", "elem", "atom", "s-back", "obj-forth", "obj-back"
    std::string detail;
};

// A finite relation cannot meet (obj-forth)/(obj-back) at every tuple length,
// so pairs whose length reaches `bound` are exempt from the two object
// conditions. The default bound is the largest tuple length in a.
RawCheck check_asimulation_raw(Logic logic, const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a,
                               const RawPair& start, std::optional<int> bound = std::nullopt);

// Greatest bounded raw relation: all pairs of length <= max_len, pruned by the
// raw conditions (with the exemption above) until stable.
RawAsimulation bounded_raw_asimulation(Logic logic, const KripkeModel& m1, const KripkeModel& m2, int max_len);

inline constexpr std::uint64_t kPositionBudget = std::uint64_t{1} << 20;

// Greatest post-fixpoint over positions (dir, w, v, R), R a set of element
// pairs stored as a bitmask over A_w x B_v.
class AsimRelation {
public:
    bool contains(int dir, int w, int v, std::uint64_t rel) const;
    // Membership of a tuple pair through its set of componentwise pairs.
    bool contains(const RawPair& p) const;
    std::uint64_t mask(int dir, int w, int v, const Tuple& alpha, const Tuple& beta) const;
    std::size_t surviving() const;
    std::size_t space() const;
    // Every tuple pair of length <= max_len whose position survives.
    RawAsimulation expand(int max_len) const;

private:
    friend AsimRelation asimulation_fixpoint(Logic, const KripkeModel&, const KripkeModel&);
    struct Block {
        int src_size = 0;
        int tgt_size = 0;
        std::vector<char> alive;
    };
    int n_[2] = {0, 0};
    std::vector<Block> blocks_;  // [dir][w][v]
    const Block& block(int dir, int w, int v) const;
    Block& block(int dir, int w, int v);
};

// The whole fixpoint, independent of a start position. Throws Error when the
// position space exceeds kPositionBudget or a model is inadmissible.
AsimRelation asimulation_fixpoint(Logic logic, const KripkeModel& m1, const KripkeModel& m2);

std::optional<AsimRelation> greatest_asimulation(Logic logic, const KripkeModel& m1, int w1, const Tuple& a,
                                                 const KripkeModel& m2, int w2, const Tuple& b);
bool asim_exists(Logic logic, const KripkeModel& m1, int w1, const Tuple& a, const KripkeModel& m2, int w2,
                 const Tuple& b);

struct Projection {
    RawAsimulation rel;
    RawPair start;
};

// A↓ cut at the largest tuple length of a; the start pair is projected onto
// the given indices (repetitions allowed).
Projection project_subtuple(const RawAsimulation& a, const RawPair& start, const std::vector<int>& indices);

struct Restriction {
    RawAsimulation rel;  // indices refer to ext1/ext2
    KripkeModel ext1;
    KripkeModel ext2;
    RawPair start;
};

// A_{w1,w2} transported into ([M1,w1], c̄/ā) and ([M2,w2], c̄/b̄), with
// c̄ = type_constants(sig, |ā|).
Restriction restrict_generated(const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a,
                               const RawPair& start);

// Pairs of length <= max_len whose positive type slices at rank d are included.
RawAsimulation relation_from_type_inclusion(Logic logic, const KripkeModel& m1, const KripkeModel& m2, int d,
                                            int max_len = 1, const SliceCaps& caps = {});

// Identity relation on m (as both m1 and m2) up to the given tuple length.
RawAsimulation identity_relation(const KripkeModel& m, int max_len);

Json raw_to_json(const KripkeModel& m1, const KripkeModel& m2, const RawAsimulation& a);
RawAsimulation raw_from_json(const KripkeModel& m1, const KripkeModel& m2, const Json& j);
std::string describe_pair(const KripkeModel& m1, const KripkeModel& m2, const RawPair& p);

}  // namespace kwb
