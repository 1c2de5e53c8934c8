#include "doctest.h"

#include "homechain/core/block.hpp"
#include "homechain/core/rng.hpp"

using namespace homechain;

namespace {

Block sample_block(CryptoProvider& prov, DetRng& rng, std::size_t ntxs) {
    Block b;
    const Bytes prev = rng.bytes(32);
    std::copy(prev.begin(), prev.end(), b.prev_block.bytes.begin());

    PolicyHeader policy;
    policy.version = 3;
    PolicyRule rule;
    rule.subject = "owner-pk";
    rule.device = "cam";
    rule.actions = action_bit(Action::store_local) | action_bit(Action::store_cloud);
    REQUIRE(upsert_rule(policy, rule));
    b.policy_copy = policy;

    const KeyPair signer = prov.generate_keypair(rng, "");
    for (std::size_t i = 0; i < ntxs; ++i) {
        Transaction tx;
        tx.kind = TxKind::store;
        tx.device = "cam";
        tx.block_number = rng.bytes(16);
        DataHash h;
        const Bytes raw = rng.bytes(32);
        std::copy(raw.begin(), raw.end(), h.bytes.begin());
        tx.data_hash = h;
        tx.timestamp = i;
        append_signature(prov, tx, signer.priv);
        b.txs.push_back(std::move(tx));
    }
    b.miner = PublicKey{"fast:miner-block-test"};
    return b;
}

}  // namespace

TEST_CASE("block bytes round trip") {
    auto prov = make_fast_provider();
    DetRng rng(201);
    for (const std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{5}}) {
        const Block b = sample_block(*prov, rng, n);
        const Bytes raw = block_bytes(b);
        const auto back = block_from_bytes(ByteView(raw.data(), raw.size()));
        REQUIRE(back.has_value());
        CHECK(*back == b);
    }
}

TEST_CASE("overlay block header round trips too") {
    auto prov = make_fast_provider();
    DetRng rng(202);
    Block b;
    Transaction multisig;
    multisig.kind = TxKind::access;
    multisig.scope = AccessScope::latest;
    multisig.timestamp = 77;
    const KeyPair kp = prov->generate_keypair(rng, "");
    append_signature(*prov, multisig, kp.priv);
    b.trust_multisig = multisig;
    b.miner = PublicKey{"fast:ch-0"};

    const Bytes raw = block_bytes(b);
    const auto back = block_from_bytes(ByteView(raw.data(), raw.size()));
    REQUIRE(back.has_value());
    CHECK(*back == b);
}

TEST_CASE("block hash moves with any part") {
    auto prov = make_fast_provider();
    DetRng rng(211);
    const Block base = sample_block(*prov, rng, 3);
    const DataHash h0 = block_hash(*prov, base);

    Block moved_prev = base;
    moved_prev.prev_block.bytes[0] ^= 1;
    CHECK(block_hash(*prov, moved_prev) != h0);

    Block moved_policy = base;
    moved_policy.policy_copy->version += 1;
    CHECK(block_hash(*prov, moved_policy) != h0);

    Block moved_tx = base;
    moved_tx.txs[1].timestamp += 1;
    CHECK(block_hash(*prov, moved_tx) != h0);

    Block moved_sig = base;
    moved_sig.txs[0].signatures[0].value[0] ^= 1;
    CHECK(block_hash(*prov, moved_sig) != h0);

    Block moved_miner = base;
    moved_miner.miner.id += "x";
    CHECK(block_hash(*prov, moved_miner) != h0);
}

TEST_CASE("memory units grow with content") {
    auto prov = make_fast_provider();
    DetRng rng(221);
    const Block small = sample_block(*prov, rng, 1);
    const Block big = sample_block(*prov, rng, 10);
    CHECK(block_mem_units(small) > 0);
    CHECK(block_mem_units(big) > block_mem_units(small));
    CHECK(block_mem_units(small) == block_bytes(small).size());
}
