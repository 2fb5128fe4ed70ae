#include "doctest.h"
#include "reconf/config_value.hpp"
#include "reconf/ids.hpp"

using namespace reconf;

TEST_CASE("IdSet keeps a sorted duplicate-free view") {
    IdSet s{3, 1, 3, 2};
    CHECK(s.size() == 3);
    CHECK(s.items() == std::vector<ProcessorId>{1, 2, 3});
    s.insert(2);
    CHECK(s.size() == 3);
    s.erase(1);
    CHECK(!s.contains(1));
}

TEST_CASE("IdSet set algebra") {
    IdSet a{1, 2, 3};
    IdSet b{2, 3, 4};
    CHECK(a.intersect(b) == IdSet{2, 3});
    CHECK(a.unite(b) == IdSet{1, 2, 3, 4});
    CHECK(IdSet{2, 3}.subset_of(a));
    CHECK(!a.subset_of(b));
}

TEST_CASE("ConfigValue domain: set, Bottom, Hash; empty set is distinct") {
    ConfigValue h = ConfigValue::hash();
    ConfigValue b = ConfigValue::bottom();
    ConfigValue e = ConfigValue::set(IdSet{});
    ConfigValue s = ConfigValue::set(IdSet{1, 2});
    CHECK(h.is_hash());
    CHECK(b.is_bottom());
    CHECK(e.is_empty_set());
    CHECK(!s.is_empty_set());
    CHECK(!(e == b));
    CHECK(s.str() == "{1,2}");
}

TEST_CASE("proposal lexical order: phase major, set tuple minor") {
    Proposal dflt = Proposal::dflt();
    CHECK(dflt.is_default());
    Proposal p1{1, IdSet{1, 2}};
    Proposal p2{2, IdSet{1}};
    CHECK(dflt < p1);
    CHECK(p1 < p2);  // phase dominates

    // Oracle for the tuple comparison: sets as ascending tuples compared
    // lexicographically.
    Proposal a{1, IdSet{1, 2}};
    Proposal b{1, IdSet{1, 3}};
    auto tuple_less = [](const IdSet& x, const IdSet& y) {
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(),
                                            y.end());
    };
    bool oracle_a_less = tuple_less(*a.set, *b.set);
    CHECK(oracle_a_less);
    CHECK(a < b);
    CHECK(std::max(a, b) == b);
}
