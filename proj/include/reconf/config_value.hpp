#pragma once

#include <compare>
#include <optional>
#include <string>

#include "reconf/ids.hpp"

namespace reconf {

// A processor's view of the quorum configuration: a concrete processor set,
// Bottom (reset in progress) or Hash (the holder is not a participant).
class ConfigValue {
public:
    enum class Kind { Hash, Bottom, Set };

    ConfigValue() : kind_(Kind::Hash) {}
    static ConfigValue hash() { return ConfigValue(Kind::Hash, {}); }
    static ConfigValue bottom() { return ConfigValue(Kind::Bottom, {}); }
    static ConfigValue set(IdSet s) { return ConfigValue(Kind::Set, std::move(s)); }

    Kind kind() const { return kind_; }
    bool is_hash() const { return kind_ == Kind::Hash; }
    bool is_bottom() const { return kind_ == Kind::Bottom; }
    bool is_set() const { return kind_ == Kind::Set; }
    // The empty set is representable (and illegal: it is type-2 stale
    // information, distinct from Bottom).
    bool is_empty_set() const { return is_set() && members_.empty(); }
    const IdSet& members() const { return members_; }

    friend bool operator==(const ConfigValue&, const ConfigValue&) = default;
    friend auto operator<=>(const ConfigValue& a, const ConfigValue& b) {
        if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
        return a.members_ <=> b.members_;
    }

    std::string str() const {
        switch (kind_) {
            case Kind::Hash: return "#";
            case Kind::Bottom: return "_|_";
            case Kind::Set: return members_.str();
        }
        return "?";
    }

private:
    ConfigValue(Kind k, IdSet s) : kind_(k), members_(std::move(s)) {}
    Kind kind_;
    IdSet members_;
};

// Configuration replacement notification ("proposal"): ⟨phase, set⟩ with
// phase in {0,1,2} and set a processor set or Bottom (no value).
struct Proposal {
    int phase = 0;
    std::optional<IdSet> set;  // nullopt encodes Bottom

    static Proposal dflt() { return Proposal{}; }
    bool is_default() const { return phase == 0 && !set.has_value(); }

    friend bool operator==(const Proposal&, const Proposal&) = default;
    // Lexical order: phase major, then the set as an ascending tuple.
    // Bottom sorts below any concrete set.
    friend auto operator<=>(const Proposal& a, const Proposal& b) {
        if (auto c = a.phase <=> b.phase; c != 0) return c;
        bool ha = a.set.has_value(), hb = b.set.has_value();
        if (auto c = ha <=> hb; c != 0) return c;
        if (!ha) return std::strong_ordering::equal;
        return *a.set <=> *b.set;
    }

    std::string str() const {
        return "<" + std::to_string(phase) + "," + (set ? set->str() : "_|_") + ">";
    }
};

}  // namespace reconf
