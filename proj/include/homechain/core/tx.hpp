#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homechain/core/bytes.hpp"
#include "homechain/core/crypto.hpp"
#include "homechain/core/result.hpp"
#include "homechain/core/types.hpp"

namespace homechain {

// Transaction kinds. Values are wire tags; do not reorder.
enum class TxKind : std::uint8_t {
    genesis = 0,        // first transaction of a device ledger
    store = 1,          // data stored locally or in cloud storage
    access = 2,         // multisig request/grant between requester and device
    monitor = 3,        // periodic-read grant
    policy_update = 4,  // header change; new rules referenced by data_hash
    remove_device = 5,  // closes a device ledger
    breach_report = 6,  // points at two conflicting transactions
    signed_hash = 7,    // storage-tier attestation of stored data
};

std::string_view to_string(TxKind k);
std::optional<TxKind> tx_kind_from_string(std::string_view s);

// How much history an access transaction asks for.
enum class AccessScope : std::uint8_t {
    latest = 0,
    window = 1,
    full_chain = 2,
};

std::string_view to_string(AccessScope s);

struct Transaction {
    TxKind kind = TxKind::genesis;
    std::optional<DeviceId> device;
    std::optional<RandomId> prev_tx;   // predecessor in the device's ledger
    std::optional<Bytes> block_number; // opaque storage pointer, often encrypted
    std::optional<DataHash> data_hash;
    std::uint64_t timestamp = 0;       // logical (event-loop) time
    std::optional<std::uint8_t> output_bit;  // miner's verdict, 0 or 1
    std::vector<RandomId> payload_refs;
    std::optional<AccessScope> scope;  // access transactions only

    // Identity lives in the slots, not the canonical bytes: slot 0 is the
    // requester / originator, slot 1 the requestee / co-signer.
    std::vector<Signature> signatures;

    bool operator==(const Transaction&) const = default;
};

// Byte-exact encoding of everything except the signature slots; the preimage
// of tx_id. Field order is fixed: kind, device, prev_tx, block_number,
// data_hash, timestamp, output_bit, payload_refs, scope. See
// docs/wire_format.md.
Bytes canonical_bytes(const Transaction& tx);

// True for kinds whose originator is outside the target ledger (requests and
// attestations): they cannot know the chain position, and the verdict is set
// after they sign.
bool originator_external(TxKind kind);

// What signature slot `slot` covers. Slot 0 of an external-originator kind
// signs with prev_tx and output_bit cleared (the request form); slot 0 of
// other kinds signs with only output_bit cleared; later slots (the resolver
// side) sign the full canonical form.
Bytes signing_bytes(const Transaction& tx, std::size_t slot);

// Canonical bytes followed by the signature slots; the block-hash preimage
// and dump encoding.
Bytes full_bytes(const Transaction& tx);

std::optional<Transaction> transaction_from_full_bytes(ByteView data);

DataHash tx_id_hash(const CryptoProvider& p, const Transaction& tx);
RandomId tx_id(const CryptoProvider& p, const Transaction& tx);

// Present signatures a well-formed transaction of this kind must carry:
// access and signed_hash are two-party, everything else one.
std::size_t required_signatures(TxKind kind);

// Shape checks that need no cryptography: breach reports point at exactly two
// transactions, stores carry block_number and data_hash, access carries scope.
Status check_tx_shape(const Transaction& tx);

// True result iff every required slot is present and every present signature
// verifies over canonical_bytes(tx). Fails with missing_signature or
// bad_signature.
Status validate_tx_signatures(const CryptoProvider& p, const Transaction& tx);

// Convenience: sign canonical bytes and append the slot.
void append_signature(const CryptoProvider& p, Transaction& tx, const PrivateKey& key);

}  // namespace homechain
