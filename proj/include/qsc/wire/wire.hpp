#pragma once

// Sealed message format for orchestration traffic. A frame carries sender,
// receiver, a 24-byte nonce, 25 bytes of authenticated associated data
// (message kind, task id, logical timestamp), the ciphertext and a
// signature over (ciphertext, associated data, nonce). Opening verifies
// signature, replay freshness and AEAD in that order, so a frame that
// fails early never pollutes the replay registry.

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>

#include "qsc/bytes.hpp"
#include "qsc/error.hpp"
#include "qsc/session/session.hpp"

namespace qsc::wire {

enum class MsgKind : std::uint8_t {
    REQUEST = 1,
    TASK_ASSIGNMENT = 2,
    TASK_RESULT = 3,
    MERGE_SUMMARY = 4,
    FINAL_RESPONSE = 5,
    CONTROL = 6,
};

constexpr std::string_view msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::REQUEST: return "REQUEST";
        case MsgKind::TASK_ASSIGNMENT: return "TASK_ASSIGNMENT";
        case MsgKind::TASK_RESULT: return "TASK_RESULT";
        case MsgKind::MERGE_SUMMARY: return "MERGE_SUMMARY";
        case MsgKind::FINAL_RESPONSE: return "FINAL_RESPONSE";
        case MsgKind::CONTROL: return "CONTROL";
    }
    return "CONTROL";
}

MsgKind msg_kind_from_byte(std::uint8_t b);

inline constexpr std::size_t kTaskIdBytes = 16;
inline constexpr std::size_t kAadBytes = 1 + kTaskIdBytes + 8;
inline constexpr std::string_view kWireSigTag = "qsc.wire.sig";

// Authenticated associated data: bound into both the AEAD and the frame
// signature but never encrypted.
struct Aad {
    MsgKind kind = MsgKind::CONTROL;
    Bytes task_id = Bytes(kTaskIdBytes, 0);  // all-zero when not task-scoped
    std::uint64_t timestamp_ms = 0;

    Bytes encode() const;
    static Aad decode(ByteView data);

    bool operator==(const Aad&) const = default;
};

struct SecureMessage {
    std::string sender;
    std::string receiver;
    Bytes nonce;  // AeadProvider::kNonceBytes
    Aad aad;
    Bytes ciphertext;
    Bytes signature;

    Bytes encode() const;
    static SecureMessage decode(ByteView frame);

    // Digest the frame signature covers.
    Bytes signing_digest() const;

    bool operator==(const SecureMessage&) const = default;
};

// Atomic seen-set over (sender, nonce). check_and_insert returns false
// when the pair was already seen; check and insert happen under one lock
// so concurrent duplicate deliveries cannot both pass.
class ReplayRegistry {
public:
    bool check_and_insert(const std::string& sender, ByteView nonce);
    void clear();
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::set<std::pair<std::string, Bytes>> seen_;
};

// Seals `payload` for the directed link sender->receiver. The nonce is a
// fresh QRNG draw; timestamp_ms is the caller's logical clock (wall time
// never enters frames, which keeps seeded runs byte-identical).
SecureMessage seal(session::SessionContext& ctx, const std::string& sender,
                   const std::string& receiver, MsgKind kind,
                   const Bytes& task_id, ByteView payload,
                   std::uint64_t timestamp_ms);

struct OpenedMessage {
    std::string sender;
    std::string receiver;
    MsgKind kind = MsgKind::CONTROL;
    Bytes task_id;
    std::uint64_t timestamp_ms = 0;
    Bytes payload;
};

// Verification order: sender identity (UnknownLink when the claimed sender
// is not admitted), frame signature (SignatureInvalid), replay freshness
// (ReplayDetected), link key lookup (UnknownLink), AEAD open
// (AuthenticationFailure).
OpenedMessage open(session::SessionContext& ctx, ReplayRegistry& replay,
                   const SecureMessage& msg);

}  // namespace qsc::wire
