#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "homechain/sim/event_loop.hpp"
#include "homechain/sim/metrics.hpp"
#include "homechain/sim/topology.hpp"

namespace homechain {

// Multi-packet message layer. A message of n bytes crosses h hops as
// ceil(n / 64) packets; the first packet arrives after h link delays and
// the rest pipeline in one tick each. Co-located endpoints (0 hops)
// deliver instantly and move no packets.
class Net {
public:
    static constexpr std::size_t kPacketBytes = 64;

    Net(EventLoop& loop, Topology& topo) : loop_(loop), topo_(topo) {}

    static std::size_t packets_for(std::size_t bytes) {
        return bytes == 0 ? 1 : (bytes + kPacketBytes - 1) / kPacketBytes;
    }

    std::uint64_t arrival_delay(const std::string& from, const std::string& to,
                                std::size_t bytes) const;

    // Schedules on_arrive at the arrival tick and charges packets * hops
    // link traversals to `flow`. The hop is recorded on delivery.
    void send(FlowTrace& flow, std::string from, std::string to, std::string msg,
              std::size_t bytes, std::function<void()> on_arrive);

    std::uint64_t total_packets() const { return total_; }
    EventLoop& loop() { return loop_; }
    Topology& topology() { return topo_; }

private:
    EventLoop& loop_;
    Topology& topo_;
    std::uint64_t total_ = 0;
};

}  // namespace homechain
