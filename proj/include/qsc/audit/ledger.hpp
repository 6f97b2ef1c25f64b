#pragma once

// Tamper-evident audit ledger: each record is signed by its source and
// folded into a hash chain. Records carry the signer certificate and the
// file header carries the root authority key, so a saved ledger verifies
// stand-alone. Logical time is a monotone counter, which keeps seeded runs
// byte-identical.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "qsc/bytes.hpp"
#include "qsc/crypto/entropy.hpp"
#include "qsc/crypto/provider.hpp"
#include "qsc/crypto/qkd.hpp"
#include "qsc/session/certs.hpp"

namespace qsc::audit {

inline constexpr std::string_view kEvBootstrapInit = "BOOTSTRAP_INIT";
inline constexpr std::string_view kEvBootstrapReject = "BOOTSTRAP_REJECT";
inline constexpr std::string_view kEvTaskGraphCreated = "TASK_GRAPH_CREATED";
inline constexpr std::string_view kEvAgentExecutionCompleted =
    "AGENT_EXECUTION_COMPLETED";
inline constexpr std::string_view kEvAgentExecutionFailed =
    "AGENT_EXECUTION_FAILED";
inline constexpr std::string_view kEvMergeReasoningCompleted =
    "MERGE_REASONING_COMPLETED";
inline constexpr std::string_view kEvFinalResponseSent = "FINAL_RESPONSE_SENT";
inline constexpr std::string_view kEvSessionTeardown = "SESSION_TEARDOWN";
inline constexpr std::string_view kEvSessionTeardownNoop =
    "SESSION_TEARDOWN_NOOP";
inline constexpr std::string_view kEvIntakeRejected = "INTAKE_REJECTED";
inline constexpr std::string_view kEvPipelineAborted = "PIPELINE_ABORTED";
inline constexpr std::string_view kEvKeyRotated = "KEY_ROTATED";
inline constexpr std::string_view kEvDegradedEntropy = "DEGRADED_ENTROPY";
inline constexpr std::string_view kEvDegradedQkd = "DEGRADED_QKD";

inline constexpr std::string_view kQkdStatusActive = "QKD_ACTIVE";
inline constexpr std::string_view kQkdStatusPqcOnly = "PQC_ONLY";

inline constexpr std::string_view kReplicaFlagQkd = "QKD_REPL";
inline constexpr std::string_view kReplicaFlagPqc = "PQC_FALLBACK";

struct AuditRecord {
    std::string event_id;  // "qrng:e-" + hex entropy tag
    std::string source;
    std::string event_type;
    std::uint64_t logical_time = 0;
    Bytes payload;  // canonical JSON bytes; never contains secrets
    Bytes payload_hash;
    Bytes signature;
    Bytes correlation_id;
    bool qkd_active = false;
    Bytes prev_chain;
    Bytes chain;
    session::Certificate signer_cert;

    // Digest the signature covers: payload, event id and logical time.
    Bytes signing_digest() const;
    // Everything the chain covers except prev_chain itself.
    Bytes chained_fields() const;
    Bytes compute_chain() const;

    Bytes encode() const;
    static AuditRecord decode(ByteReader& reader);

    nlohmann::json payload_json() const;
};

struct VerifyReport {
    bool ok = true;
    std::ptrdiff_t broken_at = -1;
    std::string reason;  // chain-mismatch | signature-invalid | payload-hash-mismatch
};

class AuditLedger {
public:
    AuditLedger(crypto::Suite suite, Bytes root_ca_public);

    // Appends a signed record. correlation_scope is the task or request the
    // event belongs to; entropy feeds the event id and correlation tag.
    const AuditRecord& append(const std::string& source,
                              std::string_view event_type,
                              ByteView correlation_scope,
                              const nlohmann::json& payload, bool qkd_active,
                              const session::Certificate& signer_cert,
                              ByteView signer_private,
                              crypto::EntropySource& entropy);

    void seal();
    bool sealed() const;

    const std::vector<AuditRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    const Bytes& root_ca_public() const { return root_ca_public_; }
    const crypto::Suite& suite() const { return suite_; }

    VerifyReport verify() const;
    static VerifyReport verify_records(const std::vector<AuditRecord>& records,
                                       const Bytes& root_ca_public,
                                       const crypto::Suite& suite);

    std::map<std::string, std::size_t> type_counts() const;

    void save(const std::string& path) const;
    static AuditLedger load(const std::string& path, crypto::Suite suite);

    static constexpr std::string_view kFileMagic = "QSCLEDG1";

private:
    crypto::Suite suite_;
    Bytes root_ca_public_;
    std::vector<AuditRecord> records_;
    bool sealed_ = false;
    std::uint64_t clock_ = 0;
    mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
};

// Off-site replication of ledger records, sealed per record with a fresh
// key: a QKD-delivered key when the site link is up (flag QKD_REPL),
// otherwise a KEM-wrapped key (flag PQC_FALLBACK).
struct ReplicaSite {
    std::string site_id;
    Bytes kem_public;
    bool qkd_capable = false;
};

struct ReplicaRecord {
    std::string source_event_id;
    Bytes sealed;  // lp(keyref) lp(nonce) lp(ciphertext)
    std::string qkd_flag;
    std::uint64_t logical_time = 0;
};

struct ReplicationResult {
    std::vector<ReplicaRecord> records;
    bool degraded_qkd = false;
};

// site_id must name an entry in `sites`; raises UnknownReplicaSite
// otherwise. When a qkd-capable site has no working link, records fall back
// to the KEM path and one DEGRADED_QKD alert is appended to the ledger.
ReplicationResult replicate(AuditLedger& ledger,
                            const std::map<std::string, ReplicaSite>& sites,
                            const std::string& site_id,
                            const std::string& source_site,
                            crypto::QkdLinkModel& qkd,
                            crypto::EntropySource& entropy,
                            const session::Certificate& signer_cert,
                            ByteView signer_private,
                            const std::set<std::string>* event_type_filter);

// Opens one replica record on the site side and returns the original
// record bytes.
Bytes open_replica(const ReplicaRecord& record, const crypto::Suite& suite,
                   const Bytes& site_kem_private, crypto::QkdLinkModel& qkd);

}  // namespace qsc::audit
