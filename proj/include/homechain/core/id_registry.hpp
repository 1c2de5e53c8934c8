#pragma once

#include <cstddef>
#include <unordered_set>

#include "homechain/core/rng.hpp"
#include "homechain/core/types.hpp"

namespace homechain {

// Central allocator for random identifiers. Guarantees no two live ids are
// ever equal; released ids may recur.
class IdRegistry {
public:
    explicit IdRegistry(DetRng rng) : rng_(rng) {}

    RandomId allocate();
    void release(const RandomId& id) { live_.erase(id.value); }
    bool is_live(const RandomId& id) const { return live_.contains(id.value); }
    std::size_t live_count() const { return live_.size(); }

private:
    DetRng rng_;
    std::unordered_set<std::string> live_;
};

}  // namespace homechain
