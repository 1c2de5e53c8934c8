#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "homechain/core/block.hpp"
#include "homechain/core/crypto.hpp"
#include "homechain/core/result.hpp"

namespace homechain {

// Beta-reputation evidence about one cluster head. Direct counts come from
// this table owner's own block verifications; indirect counts from relayed
// reports. Counters only grow.
struct EvidenceRecord {
    std::uint64_t direct_pos = 0;
    std::uint64_t direct_neg = 0;
    std::uint64_t indirect_pos = 0;
    std::uint64_t indirect_neg = 0;

    bool has_direct() const { return direct_pos + direct_neg > 0; }
};

enum class Outcome : std::uint8_t { pos = 0, neg = 1 };
enum class Channel : std::uint8_t { direct = 0, indirect = 1 };

// Indirect observations weigh half a direct one.
inline constexpr double kIndirectWeight = 0.5;
// Even fully trusted miners face spot checks.
inline constexpr double kMinFraction = 0.1;

// trust = (r + 1) / (r + s + 2) with r, s the weighted positive/negative
// evidence mass. No evidence gives the uniform prior 0.5.
double trust_level(const EvidenceRecord& e);

// Smallest direct-only evidence record whose trust level reaches `tl`.
// Inverts the trust formula: one-sided counts except the 0.5 midpoint,
// which needs one observation of each sign to count as direct evidence.
EvidenceRecord evidence_for_trust(double tl);

// One cluster head's view of its peers.
class TrustTable {
public:
    void update_evidence(const std::string& subject, Outcome outcome, Channel channel);

    double trust(const std::string& subject) const;
    const EvidenceRecord* record(const std::string& subject) const;
    bool has_direct(const std::string& subject) const;
    std::size_t size() const { return records_.size(); }

    // Fraction of a block's transactions this table owner verifies, given
    // who mined and who co-signed: 1 with no direct evidence on any of them,
    // otherwise max(kMinFraction, 1 - best trust level among those with
    // direct evidence).
    double verification_fraction(const std::string& miner,
                                 const std::vector<std::string>& cosigners) const;

    // One row per subject: subject, the four counters, and the trust level.
    std::string export_table() const;

private:
    std::map<std::string, EvidenceRecord> records_;
};

// Sampled signature verification of a block's transactions.
struct VerifyOutcome {
    bool pass = true;
    std::size_t sampled = 0;
    std::vector<std::string> failed_tx_ids;
};

// Verifies ceil(f * |txs|) distinct transactions sampled uniformly. An empty
// block passes vacuously.
VerifyOutcome verify_block_sampled(const CryptoProvider& p, const Block& block, double f,
                                   DetRng& rng);

}  // namespace homechain
