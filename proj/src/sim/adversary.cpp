#include "homechain/sim/adversary.hpp"

namespace homechain {

Status validate_scripts(const SimParams& p, const std::vector<AdversaryScript>& scripts) {
    for (const auto& s : scripts) {
        if (s.kind != "dos_flood" && s.kind != "modification" && s.kind != "dropping_ch" &&
            s.kind != "mining_collusion" && s.kind != "fake_sp_chain" && s.kind != "rogue_device")
            return Status::fail(Reject::invalid_params, "unknown adversary kind: " + s.kind);
        if (s.count == 0) return Status::fail(Reject::invalid_params, "count must be positive");
        if (s.every == 0) return Status::fail(Reject::invalid_params, "every must be positive");
        if (s.cluster >= p.clusters)
            return Status::fail(Reject::invalid_params, "adversary cluster out of range");
        if (s.kind == "mining_collusion") {
            if (p.clusters < 2)
                return Status::fail(Reject::invalid_params, "mining_collusion needs two clusters");
            if (s.cosigner_cluster >= p.clusters || s.cosigner_cluster == s.cluster)
                return Status::fail(Reject::invalid_params, "cosigner_cluster must name another cluster");
            if (s.forged_txs == 0)
                return Status::fail(Reject::invalid_params, "forged_txs must be positive");
        }
    }
    return Status::success();
}

}  // namespace homechain
