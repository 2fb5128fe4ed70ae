#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "reconf/epoch_label.hpp"

namespace reconf {

// Counter triple ⟨lbl, seqn, wid⟩ layered on an epoch label. seqn ranges over
// [0..2^b]; wid is the identifier of the writer of this sequence number.
struct CounterTriple {
    EpochLabel lbl;
    int64_t seqn = 0;
    ProcessorId wid = kNoProcessor;

    friend bool operator==(const CounterTriple&, const CounterTriple&) = default;

    std::string str() const {
        return "C(" + lbl.str() + ";" + std::to_string(seqn) + ";" +
               std::to_string(wid) + ")";
    }
};

// ≺_ct: label order first; equal labels order by seqn, then by wid.
// Incomparable labels make the counters incomparable.
inline Cmp counter_cmp(const CounterTriple& a, const CounterTriple& b) {
    Cmp lc = label_cmp(a.lbl, b.lbl);
    if (lc != Cmp::Equal) return lc;
    if (a.seqn != b.seqn) return a.seqn < b.seqn ? Cmp::Less : Cmp::Greater;
    if (a.wid != b.wid) return a.wid < b.wid ? Cmp::Less : Cmp::Greater;
    return Cmp::Equal;
}

inline bool counter_lt(const CounterTriple& a, const CounterTriple& b) {
    return counter_cmp(a, b) == Cmp::Less;
}

// Counter pair ⟨mct, cct⟩, the counter analogue of a label pair.
struct CounterPair {
    std::optional<CounterTriple> mct;
    std::optional<CounterTriple> cct;

    bool is_void() const { return !mct.has_value(); }
    bool legit() const { return !cct.has_value(); }

    friend bool operator==(const CounterPair&, const CounterPair&) = default;

    std::string str() const {
        return "<" + (mct ? mct->str() : "_|_") + "," + (cct ? cct->str() : "_|_") + ">";
    }
};

}  // namespace reconf
