#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "homechain/core/id_registry.hpp"
#include "homechain/overlay/cluster_head.hpp"

using namespace homechain;

namespace {

// A handful of cluster heads over one crypto provider, plus key pairs for a
// requester, a home miner, and a storage node.
struct Mesh {
    std::unique_ptr<CryptoProvider> prov = make_fast_provider();
    IdRegistry ids{DetRng(7)};
    DetRng rng{2026};
    ClusterHead ch_a{*prov, DetRng(11), "ch-a"};
    ClusterHead ch_b{*prov, DetRng(12), "ch-b"};
    ClusterHead ch_c{*prov, DetRng(13), "ch-c"};
    KeyPair requester = prov->generate_keypair(rng, "sp-1");
    KeyPair home = prov->generate_keypair(rng, "home-miner");
    KeyPair storage = prov->generate_keypair(rng, "storage");
};

// An access transaction the way it leaves a home: requester slot 0, miner
// verdict and co-signature in slot 1.
Transaction resolved_access(CryptoProvider& p, IdRegistry& ids, const KeyPair& requester,
                            const KeyPair& miner, const DeviceId& dev,
                            std::uint8_t verdict = 1) {
    Transaction tx;
    tx.kind = TxKind::access;
    tx.device = dev;
    tx.scope = AccessScope::latest;
    tx.timestamp = 5;
    tx.payload_refs.push_back(ids.allocate());
    append_signature(p, tx, requester.priv);
    tx.output_bit = verdict;
    append_signature(p, tx, miner.priv);
    return tx;
}

// A 2-of-2 storage attestation: storage slot 0, home miner slot 1.
Transaction chained_attestation(CryptoProvider& p, IdRegistry& ids, const KeyPair& storage,
                                const KeyPair& miner, const std::string& ledger) {
    Transaction tx;
    tx.kind = TxKind::signed_hash;
    tx.device = ledger;
    tx.block_number = Bytes{1, 2, 3, 4};
    tx.data_hash = p.hash_bytes(Bytes{9, 9});
    tx.timestamp = 3;
    tx.payload_refs.push_back(ids.allocate());
    append_signature(p, tx, storage.priv);
    append_signature(p, tx, miner.priv);
    return tx;
}

Transaction signed_store(CryptoProvider& p, IdRegistry& ids, const KeyPair& miner,
                         const DeviceId& dev) {
    Transaction tx;
    tx.kind = TxKind::store;
    tx.device = dev;
    tx.block_number = Bytes{7};
    tx.data_hash = p.hash_bytes(Bytes{1});
    tx.timestamp = 1;
    tx.payload_refs.push_back(ids.allocate());
    append_signature(p, tx, miner.priv);
    return tx;
}

Envelope access_envelope(const Transaction& tx, std::string target) {
    Envelope env;
    env.tag = OverlayMsgTag::multisig;
    env.target_home = std::move(target);
    env.tx = tx;
    return env;
}

// Mine `txs` at `miner_ch`, attest, have `cosigner` co-sign, and return the
// announced block. The miner keeps its own copy.
Block announce(ClusterHead& miner_ch, ClusterHead& cosigner, const std::vector<Transaction>& txs) {
    for (const Transaction& tx : txs) REQUIRE(miner_ch.enqueue_tx(tx).ok());
    auto built = miner_ch.build_block();
    REQUIRE(built.ok());
    Block block = built.take();
    Transaction att = miner_ch.make_block_attest(block);
    cosigner.cosign_attest(att);
    block.trust_multisig = std::move(att);
    miner_ch.adopt_own_block(block);
    return block;
}

}  // namespace

TEST_CASE("envelopes round trip and reject damaged bytes") {
    Mesh m;
    Envelope env;
    env.target_home = "home-a";
    env.tx = signed_store(*m.prov, m.ids, m.home, "dev-1");
    for (const auto tag : {OverlayMsgTag::multisig, OverlayMsgTag::block_announce,
                           OverlayMsgTag::signed_hash, OverlayMsgTag::alarm,
                           OverlayMsgTag::proof_store}) {
        env.tag = tag;
        const Bytes wire = encode_envelope(env);
        const auto back = decode_envelope(wire);
        REQUIRE(back.has_value());
        CHECK(*back == env);
    }

    Bytes wire = encode_envelope(env);
    Bytes bad_tag = wire;
    bad_tag[0] = 0;
    CHECK(!decode_envelope(bad_tag).has_value());
    bad_tag[0] = 6;
    CHECK(!decode_envelope(bad_tag).has_value());

    Bytes truncated(wire.begin(), wire.end() - 3);
    CHECK(!decode_envelope(truncated).has_value());
    Bytes padded = wire;
    padded.push_back(0);
    CHECK(!decode_envelope(padded).has_value());
    CHECK(!decode_envelope(Bytes{}).has_value());
}

TEST_CASE("block content hash ignores the multisig and binds everything else") {
    Mesh m;
    Block block;
    block.miner = m.ch_a.pub();
    block.txs.push_back(signed_store(*m.prov, m.ids, m.home, "dev-1"));

    const DataHash bare = block_content_hash(*m.prov, block);
    Block attested = block;
    attested.trust_multisig = m.ch_a.make_block_attest(block);
    CHECK(block_content_hash(*m.prov, attested) == bare);

    Block other = block;
    other.txs[0].timestamp += 1;
    CHECK(block_content_hash(*m.prov, other) != bare);
    other = block;
    other.miner = m.ch_b.pub();
    CHECK(block_content_hash(*m.prov, other) != bare);
    other = block;
    other.prev_block.bytes[0] ^= 1;
    CHECK(block_content_hash(*m.prov, other) != bare);
}

TEST_CASE("overlay block validity demands a sound multisig and sound transactions") {
    Mesh m;
    const Transaction tx =
        resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");
    const Block block = announce(m.ch_a, m.ch_b, {tx});

    std::vector<std::string> failed;
    CHECK(overlay_block_valid(*m.prov, block, &failed));
    CHECK(failed.empty());

    Block no_sig = block;
    no_sig.trust_multisig.reset();
    CHECK(!overlay_block_valid(*m.prov, no_sig, nullptr));

    Block one_sig = block;
    one_sig.trust_multisig->signatures.resize(1);
    CHECK(!overlay_block_valid(*m.prov, one_sig, nullptr));

    // Slot 0 of the multisig must be the block's miner.
    Block wrong_signer = block;
    Transaction foreign = m.ch_b.make_block_attest(wrong_signer);
    m.ch_a.cosign_attest(foreign);
    wrong_signer.trust_multisig = foreign;
    CHECK(!overlay_block_valid(*m.prov, wrong_signer, nullptr));

    Block stale_hash = block;
    stale_hash.trust_multisig->data_hash->bytes[0] ^= 1;
    CHECK(!overlay_block_valid(*m.prov, stale_hash, nullptr));

    Block forged = block;
    forged.txs[0].timestamp += 100;
    failed.clear();
    CHECK(!overlay_block_valid(*m.prov, forged, &failed));
    // The multisig no longer matches either, but the tx id is still pinned.
    Block retagged = forged;
    Transaction att = m.ch_a.make_block_attest(retagged);
    m.ch_b.cosign_attest(att);
    retagged.trust_multisig = att;
    failed.clear();
    CHECK(!overlay_block_valid(*m.prov, retagged, &failed));
    REQUIRE(failed.size() == 1);
    CHECK(failed[0] == tx_id(*m.prov, retagged.txs[0]).value);
}

TEST_CASE("multisig routing follows the requester and requestee lists") {
    Mesh m;
    m.ch_a.add_member("home-1", m.home.pub, true);

    const Transaction tx =
        resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");

    SUBCASE("known requester delivers into the cluster") {
        m.ch_a.allow_requester(m.requester.pub);
        const auto r = m.ch_a.route_multisig(access_envelope(tx, "home-elsewhere"));
        CHECK(r.kind == ClusterHead::Route::Kind::delivered);
        CHECK(m.ch_a.forward_list_size() == 0);
    }
    SUBCASE("accessible member home delivers even for a stranger requester") {
        const auto r = m.ch_a.route_multisig(access_envelope(tx, "home-1"));
        CHECK(r.kind == ClusterHead::Route::Kind::delivered);
    }
    SUBCASE("inaccessible member home forwards") {
        m.ch_a.add_member("home-2", m.storage.pub, false);
        const auto r = m.ch_a.route_multisig(access_envelope(tx, "home-2"));
        CHECK(r.kind == ClusterHead::Route::Kind::forwarded);
        CHECK(m.ch_a.forward_list_size() == 1);
        CHECK(m.ch_a.forwarded() == 1);
    }
    SUBCASE("neither list matches: forwarded once, duplicate suppressed") {
        const Envelope env = access_envelope(tx, "home-elsewhere");
        CHECK(m.ch_a.route_multisig(env).kind == ClusterHead::Route::Kind::forwarded);
        CHECK(m.ch_a.route_multisig(env).kind ==
              ClusterHead::Route::Kind::dropped_duplicate);
        CHECK(m.ch_a.forward_list_size() == 1);
        CHECK(m.ch_a.forwarded() == 1);
    }
    SUBCASE("delivered transactions are also duplicate-suppressed") {
        m.ch_a.allow_requester(m.requester.pub);
        const Envelope env = access_envelope(tx, "home-1");
        CHECK(m.ch_a.route_multisig(env).kind == ClusterHead::Route::Kind::delivered);
        CHECK(m.ch_a.route_multisig(env).kind ==
              ClusterHead::Route::Kind::dropped_duplicate);
    }
    SUBCASE("revoking a requester turns delivery into forwarding") {
        m.ch_a.allow_requester(m.requester.pub);
        m.ch_a.revoke_requester(m.requester.pub);
        const auto r = m.ch_a.route_multisig(access_envelope(tx, "home-elsewhere"));
        CHECK(r.kind == ClusterHead::Route::Kind::forwarded);
    }
}

TEST_CASE("attestations route purely by home membership") {
    Mesh m;
    m.ch_a.add_member("home-1", m.home.pub, false);
    Envelope env;
    env.tag = OverlayMsgTag::signed_hash;
    env.target_home = "home-1";
    env.tx = chained_attestation(*m.prov, m.ids, m.storage, m.home, "cam-1-ledger");

    CHECK(m.ch_a.route_attestation(env).kind == ClusterHead::Route::Kind::delivered);
    CHECK(m.ch_a.route_attestation(env).kind ==
          ClusterHead::Route::Kind::dropped_duplicate);

    env.tx = chained_attestation(*m.prov, m.ids, m.storage, m.home, "cam-1-ledger");
    env.target_home = "home-9";
    CHECK(m.ch_a.route_attestation(env).kind == ClusterHead::Route::Kind::forwarded);
    // Attestation forwarding leaves no requester bookkeeping behind.
    CHECK(m.ch_a.forward_list_size() == 0);
}

TEST_CASE("the forward list is bounded and evicts oldest first") {
    Mesh m;
    OverlayConfig cfg;
    cfg.forward_cap = 8;
    ClusterHead ch(*m.prov, DetRng(21), "ch-small", cfg);

    std::vector<Transaction> txs;
    for (int i = 0; i < 20; ++i) {
        txs.push_back(resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1"));
        CHECK(ch.route_multisig(access_envelope(txs.back(), "nowhere")).kind ==
              ClusterHead::Route::Kind::forwarded);
    }
    CHECK(ch.forwarded() == 20);
    CHECK(ch.forward_list_size() == 8);

    // Forward-list membership is what makes a CH involved in a block, so the
    // eviction is observable: the oldest forwarded tx no longer binds.
    Block old_block = announce(m.ch_a, m.ch_b, {txs.front()});
    Block new_block = announce(m.ch_a, m.ch_b, {txs.back()});
    CHECK(ch.receive_block(old_block).kind ==
          ClusterHead::Receive::Kind::discarded_uninvolved);
    CHECK(ch.receive_block(new_block).kind == ClusterHead::Receive::Kind::kept);
}

TEST_CASE("three failures inside one epoch block a key for good") {
    Mesh m;

    SUBCASE("failures 1 and 2 warn, the third blocks") {
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 1));
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 2));
        CHECK(!m.ch_a.is_blocked(m.requester.pub));
        CHECK(m.ch_a.register_access_failure(m.requester.pub, 50));
        CHECK(m.ch_a.is_blocked(m.requester.pub));
        // Only the blocking call reports true.
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 51));

        const Transaction tx =
            resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");
        const auto r = m.ch_a.route_multisig(access_envelope(tx, "anywhere"));
        CHECK(r.kind == ClusterHead::Route::Kind::dropped_blocked);
        CHECK(m.ch_a.dropped_blocked() == 1);
    }
    SUBCASE("the epoch boundary resets the count") {
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 10));
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 20));
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 150));
        CHECK(!m.ch_a.register_access_failure(m.requester.pub, 160));
        CHECK(m.ch_a.register_access_failure(m.requester.pub, 170));
        CHECK(m.ch_a.is_blocked(m.requester.pub));
    }
    SUBCASE("rotating keys never accumulate enough failures") {
        DetRng rng(9);
        for (int i = 0; i < 50; ++i) {
            const KeyPair fresh = m.prov->generate_keypair(rng, "");
            CHECK(!m.ch_a.register_access_failure(fresh.pub, 5));
            CHECK(!m.ch_a.register_access_failure(fresh.pub, 6));
            CHECK(!m.ch_a.is_blocked(fresh.pub));
        }
    }
    SUBCASE("a blocked key is absorbed at the ingress CH") {
        for (std::uint64_t t = 0; t < 3; ++t) {
            m.ch_a.register_access_failure(m.requester.pub, t);
        }
        const std::uint64_t fwd_before = m.ch_a.forwarded();
        for (int i = 0; i < 25; ++i) {
            const Transaction tx =
                resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");
            const auto r = m.ch_a.route_multisig(access_envelope(tx, "anywhere"));
            CHECK(r.kind == ClusterHead::Route::Kind::dropped_blocked);
        }
        CHECK(m.ch_a.dropped_blocked() == 25);
        CHECK(m.ch_a.forwarded() == fwd_before);
        CHECK(m.ch_a.forward_list_size() == 0);
    }
}

TEST_CASE("routing conserves every injected multisig") {
    Mesh shared;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        DetRng rng(1000 + seed);
        OverlayConfig cfg;
        cfg.forward_cap = 16;
        ClusterHead ch(*shared.prov, DetRng(seed), "ch-x" + std::to_string(seed), cfg);
        ch.add_member("home-in", shared.home.pub, true);
        ch.allow_requester(shared.requester.pub);

        KeyPair stranger = shared.prov->generate_keypair(rng, "");
        KeyPair blocked = shared.prov->generate_keypair(rng, "");
        for (std::uint64_t t = 0; t < 3; ++t) ch.register_access_failure(blocked.pub, t);

        std::vector<Envelope> history;
        std::size_t delivered = 0, forwarded = 0, drop_block = 0, drop_dup = 0;
        const std::size_t total = 200;
        for (std::size_t i = 0; i < total; ++i) {
            Envelope env;
            const std::uint64_t kind = rng.bounded(5);
            if (kind == 4 && !history.empty()) {
                env = history[rng.bounded(history.size())];
            } else {
                const KeyPair& signer = kind == 0   ? shared.requester
                                        : kind == 1 ? stranger
                                        : kind == 2 ? blocked
                                                    : shared.home;
                env = access_envelope(
                    resolved_access(*shared.prov, shared.ids, signer, shared.home, "cam-1"),
                    rng.bounded(2) == 0 ? "home-in" : "home-out");
                history.push_back(env);
            }
            switch (ch.route_multisig(env).kind) {
                case ClusterHead::Route::Kind::delivered: ++delivered; break;
                case ClusterHead::Route::Kind::forwarded: ++forwarded; break;
                case ClusterHead::Route::Kind::dropped_blocked: ++drop_block; break;
                case ClusterHead::Route::Kind::dropped_duplicate: ++drop_dup; break;
            }
        }
        CHECK(delivered + forwarded + drop_block + drop_dup == total);
        CHECK(ch.forwarded() == forwarded);
        CHECK(ch.forward_list_size() == std::min<std::size_t>(forwarded, cfg.forward_cap));
    }
}

TEST_CASE("the pending pool mines at the threshold onto the view tip") {
    Mesh m;
    for (int i = 0; i < 4; ++i) {
        CHECK(m.ch_a.enqueue_tx(signed_store(*m.prov, m.ids, m.home, "dev-1")).ok());
        CHECK(!m.ch_a.block_ready());
    }
    CHECK(m.ch_a.enqueue_tx(signed_store(*m.prov, m.ids, m.home, "dev-1")).ok());
    CHECK(m.ch_a.block_ready());
    CHECK(m.ch_a.pending_count() == 5);

    auto built = m.ch_a.build_block();
    REQUIRE(built.ok());
    Block first = built.take();
    CHECK(first.prev_block == DataHash{});
    CHECK(first.txs.size() == 5);
    CHECK(first.miner == m.ch_a.pub());
    CHECK(m.ch_a.pending_count() == 0);
    CHECK(!m.ch_a.build_block().ok());
    CHECK(m.ch_a.build_block().why() == Reject::nothing_pending);

    Transaction att = m.ch_a.make_block_attest(first);
    m.ch_b.cosign_attest(att);
    first.trust_multisig = att;
    m.ch_a.adopt_own_block(first);
    const DataHash tip = block_content_hash(*m.prov, first);
    CHECK(m.ch_a.chain_size() == 1);
    REQUIRE(m.ch_a.find_block(tip) != nullptr);
    CHECK(*m.ch_a.find_block(tip) == first);

    CHECK(m.ch_a.enqueue_tx(signed_store(*m.prov, m.ids, m.home, "dev-1")).ok());
    auto second = m.ch_a.build_block();
    REQUIRE(second.ok());
    CHECK(second.value().prev_block == tip);
}

TEST_CASE("only fully signed transactions enter the pending pool") {
    Mesh m;

    // A raw storage attestation carries one signature but needs two.
    Transaction raw;
    raw.kind = TxKind::signed_hash;
    raw.device = "cam-1-ledger";
    raw.data_hash = m.prov->hash_bytes(Bytes{5});
    raw.timestamp = 2;
    append_signature(*m.prov, raw, m.storage.priv);
    CHECK(m.ch_a.enqueue_tx(raw).why == Reject::missing_signature);

    Transaction unsigned_store;
    unsigned_store.kind = TxKind::store;
    unsigned_store.device = "dev-1";
    unsigned_store.block_number = Bytes{1};
    unsigned_store.data_hash = m.prov->hash_bytes(Bytes{1});
    CHECK(m.ch_a.enqueue_tx(unsigned_store).why == Reject::missing_signature);

    Transaction forged = signed_store(*m.prov, m.ids, m.home, "dev-1");
    forged.timestamp += 1;
    CHECK(m.ch_a.enqueue_tx(forged).why == Reject::bad_signature);
    CHECK(m.ch_a.pending_count() == 0);

    m.ch_a.enqueue_unchecked(forged);
    CHECK(m.ch_a.pending_count() == 1);
}

TEST_CASE("the block attest binds content and miner") {
    Mesh m;
    const Block block = announce(m.ch_a, m.ch_b, {signed_store(*m.prov, m.ids, m.home, "d")});
    REQUIRE(block.trust_multisig.has_value());
    const Transaction& att = *block.trust_multisig;
    CHECK(att.kind == TxKind::signed_hash);
    CHECK(*att.data_hash == block_content_hash(*m.prov, block));
    REQUIRE(att.signatures.size() == 2);
    CHECK(att.signatures[0].signer == m.ch_a.pub());
    CHECK(att.signatures[1].signer == m.ch_b.pub());
    CHECK(validate_tx_signatures(*m.prov, att).ok());
}

TEST_CASE("received blocks are kept only when valid and involved") {
    Mesh m;
    const Transaction tx =
        resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");
    const Block block = announce(m.ch_a, m.ch_c, {tx});

    SUBCASE("requester CH keeps it and credits the miner") {
        m.ch_b.allow_requester(m.requester.pub);
        const auto r = m.ch_b.receive_block(block);
        CHECK(r.kind == ClusterHead::Receive::Kind::kept);
        CHECK(r.verify.pass);
        CHECK(m.ch_b.chain_size() == 1);
        const EvidenceRecord* rec = m.ch_b.trust().record(m.ch_a.pub().id);
        REQUIRE(rec != nullptr);
        CHECK(rec->direct_pos == 1);

        // A flood echo of the same block changes nothing.
        const auto again = m.ch_b.receive_block(block);
        CHECK(again.kind == ClusterHead::Receive::Kind::kept);
        CHECK(m.ch_b.chain_size() == 1);
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_pos == 1);
    }
    SUBCASE("requestee CH keeps it") {
        m.ch_b.add_member("home-1", m.home.pub, true);
        CHECK(m.ch_b.receive_block(block).kind == ClusterHead::Receive::Kind::kept);
    }
    SUBCASE("member home involvement keeps it even when not accessible") {
        m.ch_b.add_member("home-1", m.home.pub, false);
        CHECK(m.ch_b.receive_block(block).kind == ClusterHead::Receive::Kind::kept);
    }
    SUBCASE("a forwarding CH keeps it") {
        CHECK(m.ch_b.route_multisig(access_envelope(tx, "nowhere")).kind ==
              ClusterHead::Route::Kind::forwarded);
        CHECK(m.ch_b.receive_block(block).kind == ClusterHead::Receive::Kind::kept);
    }
    SUBCASE("an uninvolved CH verifies, credits, and discards") {
        const auto r = m.ch_b.receive_block(block);
        CHECK(r.kind == ClusterHead::Receive::Kind::discarded_uninvolved);
        CHECK(r.verify.pass);
        CHECK(m.ch_b.chain_size() == 0);
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_pos == 1);
    }
    SUBCASE("a block without its multisig is discarded and debited") {
        m.ch_b.allow_requester(m.requester.pub);
        Block naked = block;
        naked.trust_multisig.reset();
        const auto r = m.ch_b.receive_block(naked);
        CHECK(r.kind == ClusterHead::Receive::Kind::discarded_invalid);
        CHECK(!r.verify.pass);
        CHECK(m.ch_b.chain_size() == 0);
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_neg == 1);
    }
}

TEST_CASE("verification effort tracks miner trust") {
    Mesh m;
    std::vector<Transaction> txs;
    for (int i = 0; i < 10; ++i) txs.push_back(signed_store(*m.prov, m.ids, m.home, "d"));
    const Block block = announce(m.ch_a, m.ch_c, {txs});

    SUBCASE("an unknown miner gets the full treatment") {
        const auto r = m.ch_b.receive_block(block);
        CHECK(r.verify.sampled == 10);
    }
    SUBCASE("a highly trusted miner gets the floor fraction") {
        for (int i = 0; i < 8; ++i) {
            m.ch_b.trust().update_evidence(m.ch_a.pub().id, Outcome::pos, Channel::direct);
        }
        CHECK(m.ch_b.trust().trust(m.ch_a.pub().id) == doctest::Approx(0.9));
        const auto r = m.ch_b.receive_block(block);
        CHECK(r.verify.sampled == 1);
    }
    SUBCASE("a trusted cosigner lowers the effort for an unknown miner") {
        for (int i = 0; i < 2; ++i) {
            m.ch_b.trust().update_evidence(m.ch_c.pub().id, Outcome::pos, Channel::direct);
        }
        const auto r = m.ch_b.receive_block(block);
        // TL(ch-c) = 3/4, f = max(0.1, 0.25), m = ceil(2.5).
        CHECK(r.verify.sampled == 3);
    }
}

TEST_CASE("a forged transaction is caught at full verification and debited") {
    Mesh m;
    m.ch_b.allow_requester(m.requester.pub);
    Block block = announce(m.ch_a, m.ch_c,
                           {resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1")});
    block.txs[0].timestamp += 50;
    Transaction att = m.ch_a.make_block_attest(block);
    m.ch_c.cosign_attest(att);
    block.trust_multisig = att;

    const auto r = m.ch_b.receive_block(block);
    CHECK(r.kind == ClusterHead::Receive::Kind::discarded_invalid);
    CHECK(!r.verify.pass);
    REQUIRE(r.verify.failed_tx_ids.size() == 1);
    CHECK(r.verify.failed_tx_ids[0] == tx_id(*m.prov, block.txs[0]).value);
    CHECK(m.ch_b.chain_size() == 0);
    CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_neg == 1);
    CHECK(m.ch_b.trust().record(m.ch_c.pub().id)->direct_neg == 1);

    // Having raised the alarm itself, the CH ignores the echo.
    CHECK(!m.ch_b.handle_alarm("ch-x", block).processed);
}

TEST_CASE("alarms re-verify the accused block before punishing anyone") {
    Mesh m;
    const Block good = announce(m.ch_a, m.ch_c,
                                {resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1")});

    SUBCASE("a false alarm costs the accuser") {
        m.ch_b.allow_requester(m.requester.pub);
        CHECK(m.ch_b.receive_block(good).kind == ClusterHead::Receive::Kind::kept);
        const auto out = m.ch_b.handle_alarm("ch-liar", good);
        CHECK(out.processed);
        CHECK(!out.confirmed);
        CHECK(m.ch_b.chain_size() == 1);
        CHECK(m.ch_b.trust().record("ch-liar")->direct_neg == 1);
        // The miner keeps the credit it earned at receive time.
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_neg == 0);
    }
    SUBCASE("a confirmed alarm evicts the block and debits miner and cosigner") {
        Block bad = good;
        bad.txs[0].timestamp += 9;
        Transaction att = m.ch_a.make_block_attest(bad);
        m.ch_c.cosign_attest(att);
        bad.trust_multisig = att;

        const auto out = m.ch_b.handle_alarm("ch-w", bad);
        CHECK(out.processed);
        CHECK(out.confirmed);
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_neg == 1);
        CHECK(m.ch_b.trust().record(m.ch_c.pub().id)->direct_neg == 1);
        CHECK(m.ch_b.trust().record("ch-w") == nullptr);

        // Duplicate alarms are absorbed without double-counting.
        CHECK(!m.ch_b.handle_alarm("ch-w", bad).processed);
        CHECK(m.ch_b.trust().record(m.ch_a.pub().id)->direct_neg == 1);
    }
}

TEST_CASE("a sampling miss is repaired by the alarm path") {
    Mesh m;
    // Ten transactions, one forged: a trusted miner's f = 0.1 samples one tx,
    // so some seed misses the bad one and keeps the block.
    std::vector<Transaction> txs;
    for (int i = 0; i < 10; ++i) {
        txs.push_back(resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1"));
    }
    Block block = announce(m.ch_a, m.ch_c, txs);
    block.txs[3].timestamp += 1;
    Transaction att = m.ch_a.make_block_attest(block);
    m.ch_c.cosign_attest(att);
    block.trust_multisig = att;

    bool repaired = false;
    for (std::uint64_t seed = 0; seed < 40 && !repaired; ++seed) {
        ClusterHead victim(*m.prov, DetRng(seed), "ch-victim-" + std::to_string(seed));
        victim.allow_requester(m.requester.pub);
        for (int i = 0; i < 8; ++i) {
            victim.trust().update_evidence(m.ch_a.pub().id, Outcome::pos, Channel::direct);
        }
        const auto r = victim.receive_block(block);
        REQUIRE(r.verify.sampled == 1);
        if (r.kind != ClusterHead::Receive::Kind::kept) continue;

        // The sampled check missed the forgery; a peer's alarm repairs it.
        repaired = true;
        const DataHash content = block_content_hash(*m.prov, block);
        CHECK(victim.find_block(content) != nullptr);
        const auto out = victim.handle_alarm("ch-honest", block);
        CHECK(out.processed);
        CHECK(out.confirmed);
        CHECK(victim.find_block(content) == nullptr);
        CHECK(victim.chain_size() == 0);
        CHECK(victim.trust().record(m.ch_a.pub().id)->direct_neg == 1);
    }
    CHECK(repaired);
}

TEST_CASE("chains may diverge but shared blocks are byte-identical") {
    Mesh m;
    KeyPair sp2 = m.prov->generate_keypair(m.rng, "sp-2");
    m.ch_b.allow_requester(m.requester.pub);
    m.ch_c.allow_requester(sp2.pub);

    const Block only_b = announce(
        m.ch_a, m.ch_c, {resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1")});
    const Block only_c =
        announce(m.ch_a, m.ch_b, {resolved_access(*m.prov, m.ids, sp2, m.home, "cam-1")});
    const Block both = announce(
        m.ch_a, m.ch_c, {resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1"),
                         resolved_access(*m.prov, m.ids, sp2, m.home, "cam-1")});

    for (const Block* blk : {&only_b, &only_c, &both}) {
        m.ch_b.receive_block(*blk);
        m.ch_c.receive_block(*blk);
    }
    CHECK(m.ch_b.chain_size() == 2);
    CHECK(m.ch_c.chain_size() == 2);
    CHECK(m.ch_b.chain_order() != m.ch_c.chain_order());

    std::size_t shared = 0;
    for (const DataHash& h : m.ch_b.chain_order()) {
        const Block* in_b = m.ch_b.find_block(h);
        const Block* in_c = m.ch_c.find_block(h);
        if (in_c == nullptr) continue;
        ++shared;
        CHECK(block_bytes(*in_b) == block_bytes(*in_c));
    }
    CHECK(shared == 1);
}

TEST_CASE("proof copies resolve by transaction id") {
    Mesh m;
    const Transaction proof =
        resolved_access(*m.prov, m.ids, m.requester, m.home, "cam-1");
    const RandomId id = tx_id(*m.prov, proof);

    SUBCASE("fan-out to r of n cluster heads stores exactly r copies") {
        std::vector<ClusterHead*> chs = {&m.ch_a, &m.ch_b, &m.ch_c};
        ClusterHead ch_d(*m.prov, DetRng(14), "ch-d");
        ClusterHead ch_e(*m.prov, DetRng(15), "ch-e");
        chs.push_back(&ch_d);
        chs.push_back(&ch_e);

        DetRng pick(77);
        const auto chosen = pick.sample_indices(chs.size(), m.ch_a.config().proof_fanout);
        for (const std::size_t i : chosen) REQUIRE(chs[i]->enqueue_tx(proof).ok());

        std::size_t holders = 0;
        for (ClusterHead* ch : chs) {
            if (ch->find_proof(id) != nullptr) ++holders;
        }
        CHECK(holders == 2);
    }
    SUBCASE("the stored copy is the transaction itself") {
        REQUIRE(m.ch_b.enqueue_tx(proof).ok());
        const Transaction* stored = m.ch_b.find_proof(id);
        REQUIRE(stored != nullptr);
        CHECK(*stored == proof);
        CHECK(m.ch_b.find_proof(m.ids.allocate()) == nullptr);
    }
    SUBCASE("transactions inside kept blocks also resolve") {
        m.ch_b.allow_requester(m.requester.pub);
        const Block block = announce(m.ch_a, m.ch_c, {proof});
        CHECK(m.ch_b.receive_block(block).kind == ClusterHead::Receive::Kind::kept);
        REQUIRE(m.ch_b.find_proof(id) != nullptr);
        CHECK(*m.ch_b.find_proof(id) == proof);
    }
}

TEST_CASE("re-election picks the lowest id at or above the median score") {
    std::vector<MemberInfo> members = {
        {"n-07", 5.0, false},
        {"n-03", 9.0, false},
        {"n-01", 1.0, false},
        {"n-09", 5.0, false},
    };
    auto winner = reelect_ch(members);
    REQUIRE(winner.ok());
    CHECK(winner.value() == "n-03");

    members[1].accused = true;
    winner = reelect_ch(members);
    REQUIRE(winner.ok());
    CHECK(winner.value() == "n-07");

    SUBCASE("a single healthy member wins regardless of score") {
        std::vector<MemberInfo> lone = {{"n-42", 0.0, false}, {"n-01", 99.0, true}};
        auto w = reelect_ch(lone);
        REQUIRE(w.ok());
        CHECK(w.value() == "n-42");
    }
    SUBCASE("an all-accused cluster is unrecoverable") {
        for (auto& mi : members) mi.accused = true;
        CHECK(reelect_ch(members).why() == Reject::unrecoverable);
        CHECK(reelect_ch({}).why() == Reject::unrecoverable);
    }
    SUBCASE("the winner is never accused and never below the median") {
        DetRng rng(505);
        for (int trial = 0; trial < 300; ++trial) {
            std::vector<MemberInfo> set;
            std::set<std::string> used;
            const std::size_t n = 1 + rng.bounded(9);
            for (std::size_t i = 0; i < n; ++i) {
                MemberInfo mi;
                do {
                    mi.node_id = "n-" + std::to_string(rng.bounded(100));
                } while (!used.insert(mi.node_id).second);
                mi.resource_score = static_cast<double>(rng.bounded(10));
                mi.accused = rng.bounded(3) == 0;
                set.push_back(mi);
            }
            const auto w = reelect_ch(set);
            std::vector<double> healthy;
            for (const auto& mi : set) {
                if (!mi.accused) healthy.push_back(mi.resource_score);
            }
            if (healthy.empty()) {
                CHECK(!w.ok());
                continue;
            }
            REQUIRE(w.ok());
            std::sort(healthy.begin(), healthy.end());
            const double median = healthy[(healthy.size() - 1) / 2];
            bool found = false;
            for (const auto& mi : set) {
                if (mi.node_id != w.value()) continue;
                found = true;
                CHECK(!mi.accused);
                CHECK(mi.resource_score >= median);
            }
            CHECK(found);
        }
    }
}

TEST_CASE("the shared overlay table keeps one entry per home") {
    Mesh m;
    SharedOverlayTable table;
    CHECK(table.find("home-1") == nullptr);

    const RandomId bn1 = m.ids.allocate();
    const DataHash h1 = m.prov->hash_bytes(Bytes{1});
    table.update("home-1", bn1, h1);
    REQUIRE(table.find("home-1") != nullptr);
    CHECK(table.find("home-1")->block_number == bn1);
    CHECK(table.find("home-1")->hash == h1);

    const RandomId bn2 = m.ids.allocate();
    const DataHash h2 = m.prov->hash_bytes(Bytes{2});
    table.update("home-1", bn2, h2);
    CHECK(table.entries.size() == 1);
    CHECK(table.find("home-1")->block_number == bn2);

    table.update("home-2", m.ids.allocate(), h1);
    CHECK(table.entries.size() == 2);
}
