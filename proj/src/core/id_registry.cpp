#include "homechain/core/id_registry.hpp"

namespace homechain {

RandomId IdRegistry::allocate() {
    while (true) {
        std::string token = rng_.token(128);
        if (live_.insert(token).second) return RandomId{std::move(token)};
    }
}

}  // namespace homechain
