#include "doctest.h"

#include <unordered_set>
#include <vector>

#include "homechain/core/id_registry.hpp"

using namespace homechain;

TEST_CASE("ids are unique among live ones across 1e5 allocations with churn") {
    IdRegistry reg(DetRng(301));
    DetRng chaos(302);

    std::unordered_set<std::string> shadow;
    std::vector<RandomId> live;
    for (int i = 0; i < 100000; ++i) {
        RandomId id = reg.allocate();
        CHECK(shadow.insert(id.value).second);
        live.push_back(id);
        // Release roughly a third of the time to interleave churn.
        if (!live.empty() && chaos.bounded(3) == 0) {
            const std::size_t pick = chaos.bounded(live.size());
            reg.release(live[pick]);
            shadow.erase(live[pick].value);
            live[pick] = live.back();
            live.pop_back();
        }
    }
    CHECK(reg.live_count() == shadow.size());
}

TEST_CASE("released ids stop being live") {
    IdRegistry reg(DetRng(311));
    const RandomId id = reg.allocate();
    CHECK(reg.is_live(id));
    reg.release(id);
    CHECK(!reg.is_live(id));
    CHECK(reg.live_count() == 0);
}

TEST_CASE("registry streams are reproducible") {
    IdRegistry a(DetRng(321)), b(DetRng(321));
    for (int i = 0; i < 100; ++i) CHECK(a.allocate() == b.allocate());
}
