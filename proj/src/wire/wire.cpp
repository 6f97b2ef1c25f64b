#include "qsc/wire/wire.hpp"

#include "qsc/crypto/provider.hpp"
#include "qsc/sha256.hpp"

namespace qsc::wire {

MsgKind msg_kind_from_byte(std::uint8_t b) {
    if (b < 1 || b > 6) {
        throw Error(ErrorCode::MalformedFrame,
                    "unknown message kind " + std::to_string(int(b)));
    }
    return static_cast<MsgKind>(b);
}

Bytes Aad::encode() const {
    if (task_id.size() != kTaskIdBytes) {
        throw Error(ErrorCode::MalformedFrame,
                    "task id must be " + std::to_string(kTaskIdBytes) +
                        " bytes");
    }
    Bytes out;
    out.reserve(kAadBytes);
    out.push_back(static_cast<std::uint8_t>(kind));
    append(out, task_id);
    append_u64_be(out, timestamp_ms);
    return out;
}

Aad Aad::decode(ByteView data) {
    if (data.size() != kAadBytes) {
        throw Error(ErrorCode::MalformedFrame,
                    "associated data must be " + std::to_string(kAadBytes) +
                        " bytes, got " + std::to_string(data.size()));
    }
    ByteReader reader(data);
    Aad aad;
    aad.kind = msg_kind_from_byte(reader.u8());
    auto id = reader.take(kTaskIdBytes);
    aad.task_id.assign(id.begin(), id.end());
    aad.timestamp_ms = reader.u64();
    reader.expect_done();
    return aad;
}

Bytes SecureMessage::encode() const {
    Bytes out;
    append_lp(out, to_bytes(sender));
    append_lp(out, to_bytes(receiver));
    append_lp(out, nonce);
    append_lp(out, aad.encode());
    append_lp(out, ciphertext);
    append_lp(out, signature);
    return out;
}

SecureMessage SecureMessage::decode(ByteView frame) {
    ByteReader reader(frame);
    SecureMessage msg;
    msg.sender = reader.lp_string();
    msg.receiver = reader.lp_string();
    msg.nonce = reader.lp();
    if (msg.nonce.size() != crypto::AeadProvider::kNonceBytes) {
        throw Error(ErrorCode::MalformedFrame,
                    "nonce must be " +
                        std::to_string(crypto::AeadProvider::kNonceBytes) +
                        " bytes");
    }
    msg.aad = Aad::decode(reader.lp());
    msg.ciphertext = reader.lp();
    msg.signature = reader.lp();
    reader.expect_done();
    return msg;
}

Bytes SecureMessage::signing_digest() const {
    return hash_segments(
        {to_bytes(std::string(kWireSigTag)), ciphertext, aad.encode(), nonce});
}

bool ReplayRegistry::check_and_insert(const std::string& sender,
                                      ByteView nonce) {
    std::lock_guard<std::mutex> lock(mu_);
    return seen_.emplace(sender, Bytes(nonce.begin(), nonce.end())).second;
}

void ReplayRegistry::clear() {
    std::lock_guard<std::mutex> lock(mu_);
    seen_.clear();
}

std::size_t ReplayRegistry::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return seen_.size();
}

SecureMessage seal(session::SessionContext& ctx, const std::string& sender,
                   const std::string& receiver, MsgKind kind,
                   const Bytes& task_id, ByteView payload,
                   std::uint64_t timestamp_ms) {
    const auto& link = ctx.link(sender, receiver);
    if (link.retired) {
        throw Error(ErrorCode::UnknownLink,
                    "link " + sender + "->" + receiver + " is retired");
    }
    const auto& suite = ctx.suite();

    SecureMessage msg;
    msg.sender = sender;
    msg.receiver = receiver;
    msg.nonce = ctx.entropy().sample(crypto::AeadProvider::kNonceBytes);
    msg.aad.kind = kind;
    msg.aad.task_id = task_id;
    msg.aad.timestamp_ms = timestamp_ms;
    msg.ciphertext =
        suite.aead->seal(link.key, msg.nonce, payload, msg.aad.encode());
    msg.signature = suite.sig->sign(ctx.identity(sender).sig_private,
                                    msg.signing_digest());
    return msg;
}

OpenedMessage open(session::SessionContext& ctx, ReplayRegistry& replay,
                   const SecureMessage& msg) {
    if (!ctx.has_actor(msg.sender)) {
        throw Error(ErrorCode::UnknownLink,
                    "frame claims unknown sender " + msg.sender);
    }
    const auto& sender = ctx.actor(msg.sender);
    const auto& suite = ctx.suite();
    if (!suite.sig->verify(sender.cert.sig_public, msg.signing_digest(),
                           msg.signature)) {
        throw Error(ErrorCode::SignatureInvalid,
                    "frame signature does not verify for " + msg.sender);
    }
    if (!replay.check_and_insert(msg.sender, msg.nonce)) {
        throw Error(ErrorCode::ReplayDetected,
                    "nonce already seen from " + msg.sender);
    }
    const auto& link = ctx.link(msg.sender, msg.receiver);
    if (link.retired) {
        throw Error(ErrorCode::UnknownLink,
                    "link " + msg.sender + "->" + msg.receiver +
                        " is retired");
    }
    auto plaintext =
        suite.aead->open(link.key, msg.nonce, msg.ciphertext, msg.aad.encode());

    OpenedMessage out;
    out.sender = msg.sender;
    out.receiver = msg.receiver;
    out.kind = msg.aad.kind;
    out.task_id = msg.aad.task_id;
    out.timestamp_ms = msg.aad.timestamp_ms;
    out.payload = std::move(plaintext);
    return out;
}

}  // namespace qsc::wire
