#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "homechain/trust/trust.hpp"
#include "homechain/core/tx.hpp"

using namespace homechain;

namespace {

EvidenceRecord evidence(std::uint64_t dp, std::uint64_t dn, std::uint64_t ip = 0,
                        std::uint64_t in = 0) {
    return EvidenceRecord{dp, dn, ip, in};
}

// P(at least one of b bad among T is hit by an m-sample without replacement).
double detect_probability(std::size_t total, std::size_t bad, std::size_t sample) {
    double miss = 1.0;
    for (std::size_t i = 0; i < sample; ++i) {
        if (total - bad < i + 1) return 1.0;
        miss *= static_cast<double>(total - bad - i) / static_cast<double>(total - i);
    }
    return 1.0 - miss;
}

// A block of `total` one-signer transactions, the first `bad` of them carrying
// signatures that no longer match their content.
Block sampled_block(CryptoProvider& p, DetRng& rng, const KeyPair& signer, std::size_t total,
                    std::size_t bad) {
    Block b;
    b.miner = signer.pub;
    for (std::size_t i = 0; i < total; ++i) {
        Transaction tx;
        tx.kind = TxKind::store;
        tx.device = "dev";
        tx.block_number = rng.bytes(4);
        const Bytes payload = rng.bytes(8);
        tx.data_hash = p.hash_bytes(ByteView(payload.data(), payload.size()));
        tx.timestamp = i;
        append_signature(p, tx, signer.priv);
        if (i < bad) tx.timestamp += 1000;  // breaks the signature
        b.txs.push_back(std::move(tx));
    }
    return b;
}

}  // namespace

TEST_CASE("trust follows the beta rule with a uniform prior") {
    CHECK(trust_level(evidence(0, 0)) == doctest::Approx(0.5));
    CHECK(trust_level(evidence(3, 1)) == doctest::Approx(4.0 / 6.0));
    // Indirect observations count half.
    CHECK(trust_level(evidence(0, 0, 2, 0)) == doctest::Approx(2.0 / 3.0));
    CHECK(trust_level(evidence(8, 0)) == doctest::Approx(0.9));

    TrustTable t;
    CHECK(t.trust("stranger") == doctest::Approx(0.5));
    t.update_evidence("b", Outcome::pos, Channel::direct);
    t.update_evidence("b", Outcome::pos, Channel::direct);
    t.update_evidence("b", Outcome::pos, Channel::direct);
    t.update_evidence("b", Outcome::neg, Channel::direct);
    CHECK(t.trust("b") == doctest::Approx(4.0 / 6.0));
    t.update_evidence("c", Outcome::pos, Channel::indirect);
    t.update_evidence("c", Outcome::pos, Channel::indirect);
    CHECK(t.trust("c") == doctest::Approx(2.0 / 3.0));
    CHECK(!t.has_direct("c"));
    CHECK(t.has_direct("b"));
}

TEST_CASE("positive evidence never lowers trust and negative never raises it") {
    DetRng rng(17);
    TrustTable t;
    const std::vector<std::string> subjects = {"a", "b", "c"};
    for (int i = 0; i < 4000; ++i) {
        const std::string& s = subjects[rng.bounded(subjects.size())];
        const auto outcome = static_cast<Outcome>(rng.bounded(2));
        const auto channel = static_cast<Channel>(rng.bounded(2));
        const double before = t.trust(s);
        t.update_evidence(s, outcome, channel);
        const double after = t.trust(s);
        if (outcome == Outcome::pos) {
            CHECK(after >= before);
        } else {
            CHECK(after <= before);
        }
    }
}

TEST_CASE("the verified fraction shrinks as the best direct trust grows") {
    TrustTable t;
    CHECK(t.verification_fraction("miner", {}) == doctest::Approx(1.0));
    CHECK(t.verification_fraction("miner", {"c1", "c2"}) == doctest::Approx(1.0));

    // Indirect-only evidence does not unlock sampling.
    t.update_evidence("miner", Outcome::pos, Channel::indirect);
    CHECK(t.verification_fraction("miner", {}) == doctest::Approx(1.0));

    // A trusted cosigner stands in for an unknown miner.
    for (int i = 0; i < 3; ++i) t.update_evidence("c1", Outcome::pos, Channel::direct);
    t.update_evidence("c1", Outcome::neg, Channel::direct);
    CHECK(t.verification_fraction("unknown", {"c1"}) == doctest::Approx(1.0 - 2.0 / 3.0));

    // The floor holds for highly trusted miners.
    TrustTable high;
    for (int i = 0; i < 8; ++i) high.update_evidence("miner", Outcome::pos, Channel::direct);
    CHECK(high.trust("miner") == doctest::Approx(0.9));
    CHECK(high.verification_fraction("miner", {}) == doctest::Approx(kMinFraction));

    // Monotone non-increasing along a trust sweep.
    const std::vector<std::pair<int, int>> presets = {{0, 8}, {0, 2}, {1, 1}, {2, 0}, {8, 0},
                                                      {97, 0}};
    double last = 2.0;
    for (const auto& [pos, neg] : presets) {
        TrustTable sweep;
        for (int i = 0; i < pos; ++i) sweep.update_evidence("m", Outcome::pos, Channel::direct);
        for (int i = 0; i < neg; ++i) sweep.update_evidence("m", Outcome::neg, Channel::direct);
        const double f = sweep.verification_fraction("m", {});
        CHECK(f <= last);
        CHECK(f >= kMinFraction);
        last = f;
    }
}

TEST_CASE("full verification always exposes a forged transaction") {
    auto prov = make_fast_provider();
    DetRng rng(23);
    const KeyPair signer = prov->generate_keypair(rng, "m1");
    const Block block = sampled_block(*prov, rng, signer, 20, 1);
    const std::string bad_id = tx_id(*prov, block.txs.front()).value;

    for (int trial = 0; trial < 50; ++trial) {
        DetRng sample_rng(1000 + trial);
        const VerifyOutcome out = verify_block_sampled(*prov, block, 1.0, sample_rng);
        CHECK(!out.pass);
        CHECK(out.sampled == 20);
        REQUIRE(out.failed_tx_ids.size() == 1);
        CHECK(out.failed_tx_ids.front() == bad_id);
    }

    const Block clean = sampled_block(*prov, rng, signer, 20, 0);
    for (double f : {0.1, 0.25, 0.5, 1.0}) {
        DetRng sample_rng(77);
        CHECK(verify_block_sampled(*prov, clean, f, sample_rng).pass);
    }

    DetRng sample_rng(78);
    CHECK(verify_block_sampled(*prov, Block{}, 1.0, sample_rng).pass);
}

TEST_CASE("sampled detection matches the draw-without-replacement odds") {
    auto prov = make_fast_provider();
    DetRng rng(29);
    const KeyPair signer = prov->generate_keypair(rng, "m2");

    struct Setup {
        std::size_t total, bad;
        double f;
    };
    for (const Setup s : {Setup{20, 1, 0.25}, Setup{20, 2, 0.25}}) {
        const Block block = sampled_block(*prov, rng, signer, s.total, s.bad);
        const auto m = static_cast<std::size_t>(
            std::ceil(s.f * static_cast<double>(s.total)));
        int hits = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i) {
            DetRng sample_rng(5000 + static_cast<std::uint64_t>(i));
            const VerifyOutcome out = verify_block_sampled(*prov, block, s.f, sample_rng);
            CHECK(out.sampled == m);
            if (!out.pass) ++hits;
        }
        const double rate = static_cast<double>(hits) / trials;
        const double expected = detect_probability(s.total, s.bad, m);
        CHECK(std::abs(rate - expected) <= 0.02);
    }
}

TEST_CASE("the trust table exports one row per subject") {
    TrustTable t;
    t.update_evidence("ch-b", Outcome::pos, Channel::direct);
    t.update_evidence("ch-b", Outcome::pos, Channel::direct);
    t.update_evidence("ch-b", Outcome::pos, Channel::direct);
    t.update_evidence("ch-b", Outcome::neg, Channel::direct);
    t.update_evidence("ch-a", Outcome::pos, Channel::indirect);

    const std::string table = t.export_table();
    CHECK(table ==
          "subject direct_pos direct_neg indirect_pos indirect_neg trust\n"
          "ch-a 0 0 1 0 0.600000\n"
          "ch-b 3 1 0 0 0.666667\n");
}
