#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace reconf {

using ProcessorId = int32_t;
constexpr ProcessorId kNoProcessor = -1;

// Sorted duplicate-free set of processor identifiers. Value semantics; the
// sorted representation doubles as the ascending tuple used for lexical
// comparison of proposal sets.
class IdSet {
public:
    IdSet() = default;
    IdSet(std::initializer_list<ProcessorId> ids) : ids_(ids) { normalize(); }
    explicit IdSet(std::vector<ProcessorId> ids) : ids_(std::move(ids)) { normalize(); }

    bool contains(ProcessorId id) const {
        return std::binary_search(ids_.begin(), ids_.end(), id);
    }
    void insert(ProcessorId id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) ids_.insert(it, id);
    }
    void erase(ProcessorId id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it != ids_.end() && *it == id) ids_.erase(it);
    }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    void clear() { ids_.clear(); }

    IdSet intersect(const IdSet& other) const {
        IdSet out;
        std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(),
                              other.ids_.end(), std::back_inserter(out.ids_));
        return out;
    }
    IdSet unite(const IdSet& other) const {
        IdSet out;
        std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(),
                       other.ids_.end(), std::back_inserter(out.ids_));
        return out;
    }
    bool subset_of(const IdSet& other) const {
        return std::includes(other.ids_.begin(), other.ids_.end(),
                             ids_.begin(), ids_.end());
    }

    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    const std::vector<ProcessorId>& items() const { return ids_; }

    friend bool operator==(const IdSet&, const IdSet&) = default;
    // Lexical order over the ascending identifier tuple.
    friend auto operator<=>(const IdSet& a, const IdSet& b) {
        return std::lexicographical_compare_three_way(
            a.ids_.begin(), a.ids_.end(), b.ids_.begin(), b.ids_.end());
    }

    std::string str() const {
        std::string s = "{";
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(ids_[i]);
        }
        s += '}';
        return s;
    }

private:
    void normalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }
    std::vector<ProcessorId> ids_;
};

}  // namespace reconf
