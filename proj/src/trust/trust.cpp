#include "homechain/trust/trust.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "homechain/core/tx.hpp"

namespace homechain {

double trust_level(const EvidenceRecord& e) {
    const double r = static_cast<double>(e.direct_pos) +
                     kIndirectWeight * static_cast<double>(e.indirect_pos);
    const double s = static_cast<double>(e.direct_neg) +
                     kIndirectWeight * static_cast<double>(e.indirect_neg);
    return (r + 1.0) / (r + s + 2.0);
}

EvidenceRecord evidence_for_trust(double tl) {
    EvidenceRecord e;
    if (tl <= 0.0 || tl >= 1.0) return e;
    if (tl == 0.5) {
        e.direct_pos = 1;
        e.direct_neg = 1;
    } else if (tl > 0.5) {
        // tl = (r + 1) / (r + 2) at s = 0, so r = (2 tl - 1) / (1 - tl).
        e.direct_pos = static_cast<std::uint64_t>(std::llround((2.0 * tl - 1.0) / (1.0 - tl)));
    } else {
        // tl = 1 / (s + 2) at r = 0, so s = (1 - 2 tl) / tl.
        e.direct_neg = static_cast<std::uint64_t>(std::llround((1.0 - 2.0 * tl) / tl));
    }
    return e;
}

void TrustTable::update_evidence(const std::string& subject, Outcome outcome, Channel channel) {
    EvidenceRecord& e = records_[subject];
    if (channel == Channel::direct) {
        (outcome == Outcome::pos ? e.direct_pos : e.direct_neg) += 1;
    } else {
        (outcome == Outcome::pos ? e.indirect_pos : e.indirect_neg) += 1;
    }
}

double TrustTable::trust(const std::string& subject) const {
    const auto it = records_.find(subject);
    return it == records_.end() ? trust_level(EvidenceRecord{}) : trust_level(it->second);
}

const EvidenceRecord* TrustTable::record(const std::string& subject) const {
    const auto it = records_.find(subject);
    return it == records_.end() ? nullptr : &it->second;
}

bool TrustTable::has_direct(const std::string& subject) const {
    const EvidenceRecord* e = record(subject);
    return e != nullptr && e->has_direct();
}

double TrustTable::verification_fraction(const std::string& miner,
                                         const std::vector<std::string>& cosigners) const {
    double best = -1.0;
    if (has_direct(miner)) best = trust(miner);
    for (const std::string& c : cosigners) {
        if (has_direct(c)) best = std::max(best, trust(c));
    }
    if (best < 0.0) return 1.0;
    return std::max(kMinFraction, 1.0 - best);
}

std::string TrustTable::export_table() const {
    std::ostringstream out;
    out << "subject direct_pos direct_neg indirect_pos indirect_neg trust\n";
    out << std::fixed << std::setprecision(6);
    for (const auto& [subject, e] : records_) {
        out << subject << " " << e.direct_pos << " " << e.direct_neg << " " << e.indirect_pos
            << " " << e.indirect_neg << " " << trust_level(e) << "\n";
    }
    return out.str();
}

VerifyOutcome verify_block_sampled(const CryptoProvider& p, const Block& block, double f,
                                   DetRng& rng) {
    VerifyOutcome out;
    if (block.txs.empty()) return out;
    const double clamped = std::clamp(f, 0.0, 1.0);
    const auto m = static_cast<std::size_t>(
        std::ceil(clamped * static_cast<double>(block.txs.size())));
    const std::vector<std::size_t> picks = rng.sample_indices(block.txs.size(), m);
    out.sampled = picks.size();
    for (const std::size_t i : picks) {
        if (!validate_tx_signatures(p, block.txs[i]).ok()) {
            out.pass = false;
            out.failed_tx_ids.push_back(tx_id(p, block.txs[i]).value);
        }
    }
    std::sort(out.failed_tx_ids.begin(), out.failed_tx_ids.end());
    return out;
}

}  // namespace homechain
