#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homechain/sim/topology.hpp"

namespace homechain {

// One scripted attack. Which fields matter depends on the kind:
//   dos_flood:        sp-less requester fires `count` unauthorized access
//                     requests every `every` ticks from `tick`; rotate_pk
//                     draws a fresh keypair per request.
//   modification:     tampers with the last stored block of home/device's
//                     cloud account at `tick`.
//   dropping_ch:      the head of `cluster` stops serving at `tick`.
//   mining_collusion: the head of `cluster` mines a block with forged_txs
//                     forged among honest_txs transactions; the head of
//                     cosigner_cluster co-signs without verifying.
//   fake_sp_chain:    a service provider replays the storage pointer it
//                     learned from a full-chain access to append its own data.
//   rogue_device:     a device with no genesis transaction tries to store.
struct AdversaryScript {
    std::string kind;
    std::uint64_t tick = 0;
    std::size_t count = 1;
    std::uint64_t every = 1;
    std::size_t cluster = 0;
    std::size_t home = 0;
    std::size_t device = 0;
    std::size_t sp = 0;
    std::size_t cosigner_cluster = 0;
    std::size_t forged_txs = 1;
    std::size_t honest_txs = 4;
    bool rotate_pk = false;
};

Status validate_scripts(const SimParams& p, const std::vector<AdversaryScript>& scripts);

}  // namespace homechain
