#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "reconf/ids.hpp"

namespace reconf {

enum class Cmp { Less, Greater, Incomparable, Equal };

inline Cmp flip(Cmp c) {
    if (c == Cmp::Less) return Cmp::Greater;
    if (c == Cmp::Greater) return Cmp::Less;
    return c;
}

// Bounded epoch label ⟨lCreator, sting, Antistings⟩. Labels are compared
// first by creator identifier; same-creator labels compare through the
// sting/Antistings mechanism and can be incomparable.
struct EpochLabel {
    ProcessorId creator = kNoProcessor;
    int32_t sting = 0;
    IdSet antistings;  // integers in [1..d], |antistings| = k

    friend bool operator==(const EpochLabel&, const EpochLabel&) = default;

    std::string str() const {
        return "L(" + std::to_string(creator) + ";" + std::to_string(sting) +
               ";" + antistings.str() + ")";
    }
};

// ≺_lb: l1 ≺ l2 iff creator1 < creator2, or same creator and
// sting1 ∈ Antistings2 ∧ sting2 ∉ Antistings1.
inline Cmp label_cmp(const EpochLabel& a, const EpochLabel& b) {
    if (a == b) return Cmp::Equal;
    if (a.creator != b.creator)
        return a.creator < b.creator ? Cmp::Less : Cmp::Greater;
    bool a_lt_b = b.antistings.contains(a.sting) && !a.antistings.contains(b.sting);
    bool b_lt_a = a.antistings.contains(b.sting) && !b.antistings.contains(a.sting);
    if (a_lt_b) return Cmp::Less;
    if (b_lt_a) return Cmp::Greater;
    return Cmp::Incomparable;
}

inline bool label_lt(const EpochLabel& a, const EpochLabel& b) {
    return label_cmp(a, b) == Cmp::Less;
}

// Deterministic total tie-break used only where an arbitrary-but-stable
// choice among ≺_lb-maximal candidates is needed.
inline bool label_tie_lt(const EpochLabel& a, const EpochLabel& b) {
    if (a.creator != b.creator) return a.creator < b.creator;
    if (a.sting != b.sting) return a.sting < b.sting;
    return a.antistings < b.antistings;
}

// Label pair ⟨ml, cl⟩; cl ≠ nullopt marks ml as canceled. A pair whose ml is
// absent is the void pair ⟨⊥,⊥⟩ used after purging non-member creators.
struct LabelPair {
    std::optional<EpochLabel> ml;
    std::optional<EpochLabel> cl;

    bool is_void() const { return !ml.has_value(); }
    bool legit() const { return !cl.has_value(); }

    friend bool operator==(const LabelPair&, const LabelPair&) = default;

    std::string str() const {
        return "<" + (ml ? ml->str() : "_|_") + "," + (cl ? cl->str() : "_|_") + ">";
    }
};

}  // namespace reconf
