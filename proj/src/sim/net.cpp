#include "homechain/sim/net.hpp"

#include <utility>

namespace homechain {

std::uint64_t Net::arrival_delay(const std::string& from, const std::string& to,
                                 std::size_t bytes) const {
    std::size_t h = topo_.hops(from, to);
    if (h == 0) return 0;
    return h * topo_.delay_per_hop(from, to) + (packets_for(bytes) - 1);
}

void Net::send(FlowTrace& flow, std::string from, std::string to, std::string msg,
               std::size_t bytes, std::function<void()> on_arrive) {
    std::size_t h = topo_.hops(from, to);
    std::size_t traversals = h == 0 ? 0 : packets_for(bytes) * h;
    std::uint64_t delay = h == 0 ? 0 : h * topo_.delay_per_hop(from, to) + (packets_for(bytes) - 1);
    flow.packets += traversals;
    flow.progress_tick = loop_.now();
    total_ += traversals;
    FlowTrace* fp = &flow;
    loop_.after(delay, [this, fp, from = std::move(from), to = std::move(to),
                        msg = std::move(msg), traversals, fn = std::move(on_arrive)] {
        fp->hops.push_back({loop_.now(), from, to, msg, traversals});
        fp->progress_tick = loop_.now();
        fn();
    });
}

}  // namespace homechain
