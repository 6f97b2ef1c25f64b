#include "qsc/audit/ledger.hpp"

#include <array>
#include <fstream>

#include "qsc/error.hpp"
#include "qsc/sha256.hpp"

namespace qsc::audit {

namespace {
const Bytes kGenesisChain(32, 0x00);

Bytes json_bytes(const nlohmann::json& doc) {
    return to_bytes(doc.dump());
}
}  // namespace

Bytes AuditRecord::signing_digest() const {
    Bytes lt;
    append_u64_be(lt, logical_time);
    return hash_segments({to_bytes("qsc.audit.sig"), ByteView(payload),
                          to_bytes(event_id), ByteView(lt)});
}

Bytes AuditRecord::chained_fields() const {
    Bytes out;
    append_lp(out, event_id);
    append_lp(out, source);
    append_lp(out, event_type);
    append_u64_be(out, logical_time);
    append_lp(out, ByteView(payload));
    append_lp(out, ByteView(payload_hash));
    append_lp(out, ByteView(signature));
    append_lp(out, ByteView(correlation_id));
    out.push_back(qkd_active ? 1 : 0);
    append_lp(out, ByteView(signer_cert.encode()));
    return out;
}

Bytes AuditRecord::compute_chain() const {
    return hash_segments({to_bytes("qsc.audit.chain"), ByteView(prev_chain),
                          ByteView(chained_fields())});
}

Bytes AuditRecord::encode() const {
    Bytes out;
    append_lp(out, event_id);
    append_lp(out, source);
    append_lp(out, event_type);
    append_u64_be(out, logical_time);
    append_lp(out, ByteView(payload));
    append_lp(out, ByteView(payload_hash));
    append_lp(out, ByteView(signature));
    append_lp(out, ByteView(correlation_id));
    out.push_back(qkd_active ? 1 : 0);
    append_lp(out, ByteView(prev_chain));
    append_lp(out, ByteView(chain));
    append_lp(out, ByteView(signer_cert.encode()));
    return out;
}

AuditRecord AuditRecord::decode(ByteReader& reader) {
    AuditRecord r;
    r.event_id = reader.lp_string();
    r.source = reader.lp_string();
    r.event_type = reader.lp_string();
    r.logical_time = reader.u64();
    r.payload = reader.lp();
    r.payload_hash = reader.lp();
    r.signature = reader.lp();
    r.correlation_id = reader.lp();
    r.qkd_active = reader.u8() != 0;
    r.prev_chain = reader.lp();
    r.chain = reader.lp();
    Bytes cert_blob = reader.lp();
    ByteReader cert_reader{ByteView(cert_blob)};
    r.signer_cert = session::Certificate::decode(cert_reader);
    cert_reader.expect_done();
    return r;
}

nlohmann::json AuditRecord::payload_json() const {
    return nlohmann::json::parse(std::string(payload.begin(), payload.end()));
}

AuditLedger::AuditLedger(crypto::Suite suite, Bytes root_ca_public)
    : suite_(suite), root_ca_public_(std::move(root_ca_public)) {}

const AuditRecord& AuditLedger::append(
    const std::string& source, std::string_view event_type,
    ByteView correlation_scope, const nlohmann::json& payload, bool qkd_active,
    const session::Certificate& signer_cert, ByteView signer_private,
    crypto::EntropySource& entropy) {
    // draw entropy outside the lock; the sink of a degraded source may
    // re-enter append for the alert event
    Bytes event_tag = entropy.sample(16);
    Bytes corr_tag = entropy.sample(16);

    std::lock_guard<std::mutex> lock(*mu_);
    if (sealed_)
        throw Error(ErrorCode::LedgerSealed, "append after ledger seal");

    AuditRecord r;
    r.event_id = "qrng:e-" + to_hex(event_tag);
    r.source = source;
    r.event_type = std::string(event_type);
    r.logical_time = clock_++;
    r.payload = json_bytes(payload);
    r.payload_hash = suite_.hash->hash(ByteView(r.payload));
    r.correlation_id =
        hash_segments({to_bytes("qsc.audit.corr"), correlation_scope,
                       to_bytes(event_type), ByteView(corr_tag)});
    r.qkd_active = qkd_active;
    r.signer_cert = signer_cert;
    r.signature = suite_.sig->sign(signer_private, ByteView(r.signing_digest()));
    r.prev_chain = records_.empty() ? kGenesisChain : records_.back().chain;
    r.chain = r.compute_chain();
    records_.push_back(std::move(r));
    return records_.back();
}

void AuditLedger::seal() {
    std::lock_guard<std::mutex> lock(*mu_);
    sealed_ = true;
}

bool AuditLedger::sealed() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return sealed_;
}

VerifyReport AuditLedger::verify() const {
    return verify_records(records_, root_ca_public_, suite_);
}

VerifyReport AuditLedger::verify_records(const std::vector<AuditRecord>& records,
                                         const Bytes& root_ca_public,
                                         const crypto::Suite& suite) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const AuditRecord& r = records[i];
        if (suite.hash->hash(ByteView(r.payload)) != r.payload_hash)
            return {false, static_cast<std::ptrdiff_t>(i), "payload-hash-mismatch"};
        if (!session::CertificateAuthority::verify_against(root_ca_public, suite,
                                                           r.signer_cert) ||
            !suite.sig->verify(ByteView(r.signer_cert.sig_public),
                               ByteView(r.signing_digest()),
                               ByteView(r.signature)))
            return {false, static_cast<std::ptrdiff_t>(i), "signature-invalid"};
        const Bytes& expect_prev = i == 0 ? kGenesisChain : records[i - 1].chain;
        if (r.prev_chain != expect_prev)
            return {false, static_cast<std::ptrdiff_t>(i), "chain-mismatch"};
        if (r.compute_chain() != r.chain)
            return {false, static_cast<std::ptrdiff_t>(i), "chain-mismatch"};
    }
    return {};
}

std::map<std::string, std::size_t> AuditLedger::type_counts() const {
    std::lock_guard<std::mutex> lock(*mu_);
    std::map<std::string, std::size_t> counts;
    for (const AuditRecord& r : records_) ++counts[r.event_type];
    return counts;
}

void AuditLedger::save(const std::string& path) const {
    Bytes out;
    qsc::append(out, kFileMagic);
    {
        std::lock_guard<std::mutex> lock(*mu_);
        append_lp(out, ByteView(root_ca_public_));
        append_u32_be(out, static_cast<std::uint32_t>(records_.size()));
        for (const AuditRecord& r : records_) append_lp(out, ByteView(r.encode()));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error(ErrorCode::ConfigError, "cannot write ledger file: " + path);
    f.write(reinterpret_cast<const char*>(out.data()),
            static_cast<std::streamsize>(out.size()));
}

AuditLedger AuditLedger::load(const std::string& path, crypto::Suite suite) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::ConfigError, "cannot read ledger file: " + path);
    Bytes data((std::istreambuf_iterator<char>(f)),
               std::istreambuf_iterator<char>());

    ByteReader reader{ByteView(data)};
    Bytes magic = reader.take(kFileMagic.size());
    if (to_string(ByteView(magic)) != kFileMagic)
        throw Error(ErrorCode::MalformedFrame, "bad ledger magic");
    AuditLedger ledger(suite, reader.lp());
    std::uint32_t count = reader.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        Bytes blob = reader.lp();
        ByteReader rr{ByteView(blob)};
        ledger.records_.push_back(AuditRecord::decode(rr));
        rr.expect_done();
        ledger.clock_ =
            std::max(ledger.clock_, ledger.records_.back().logical_time + 1);
    }
    reader.expect_done();
    return ledger;
}

ReplicationResult replicate(AuditLedger& ledger,
                            const std::map<std::string, ReplicaSite>& sites,
                            const std::string& site_id,
                            const std::string& source_site,
                            crypto::QkdLinkModel& qkd,
                            crypto::EntropySource& entropy,
                            const session::Certificate& signer_cert,
                            ByteView signer_private,
                            const std::set<std::string>* event_type_filter) {
    auto site_it = sites.find(site_id);
    if (site_it == sites.end())
        throw Error(ErrorCode::UnknownReplicaSite,
                    "replica site not registered: " + site_id);
    const ReplicaSite& site = site_it->second;

    // Snapshot first: the degraded alert below appends to the same ledger.
    const std::size_t end = ledger.size();
    const crypto::Suite& suite = ledger.suite();

    ReplicationResult result;
    for (std::size_t i = 0; i < end; ++i) {
        const AuditRecord& src = ledger.records()[i];
        if (event_type_filter && !event_type_filter->contains(src.event_type))
            continue;

        crypto::KeyMaterial key{};
        Bytes keyref;
        std::string flag;
        crypto::QkdOutcome q;
        if (site.qkd_capable) q = qkd.establish(source_site, site.site_id);
        if (q.established()) {
            key = *q.key;
            keyref = to_bytes(*q.session_id);
            flag = std::string(kReplicaFlagQkd);
        } else {
            if (site.qkd_capable) result.degraded_qkd = true;
            crypto::Encapsulation enc =
                suite.kem->encapsulate(ByteView(site.kem_public), entropy);
            key = std::move(enc.shared_secret);
            keyref = std::move(enc.ciphertext);
            flag = std::string(kReplicaFlagPqc);
        }

        Bytes nonce = entropy.sample(crypto::AeadProvider::kNonceBytes);
        Bytes record_bytes = src.encode();
        Bytes ct = suite.aead->seal(key, ByteView(nonce), ByteView(record_bytes),
                                    to_bytes(src.event_id));
        ReplicaRecord rr;
        rr.source_event_id = src.event_id;
        append_lp(rr.sealed, ByteView(keyref));
        append_lp(rr.sealed, ByteView(nonce));
        append_lp(rr.sealed, ByteView(ct));
        rr.qkd_flag = flag;
        rr.logical_time = src.logical_time;
        result.records.push_back(std::move(rr));
    }

    if (result.degraded_qkd) {
        nlohmann::json payload = {{"site", site.site_id},
                                  {"fallback", kReplicaFlagPqc}};
        ledger.append(source_site, kEvDegradedQkd, to_bytes(site.site_id),
                      payload, false, signer_cert, signer_private, entropy);
    }
    return result;
}

Bytes open_replica(const ReplicaRecord& record, const crypto::Suite& suite,
                   const Bytes& site_kem_private, crypto::QkdLinkModel& qkd) {
    ByteReader reader{ByteView(record.sealed)};
    Bytes keyref = reader.lp();
    Bytes nonce = reader.lp();
    Bytes ct = reader.lp();
    reader.expect_done();

    crypto::KeyMaterial key{};
    if (record.qkd_flag == kReplicaFlagQkd) {
        auto k = qkd.session_key(to_string(ByteView(keyref)));
        if (!k)
            throw Error(ErrorCode::UnknownLink,
                        "qkd session unknown to replica site");
        key = std::move(*k);
    } else {
        key = suite.kem->decapsulate(ByteView(site_kem_private), ByteView(keyref));
    }
    return suite.aead->open(key, ByteView(nonce), ByteView(ct),
                            to_bytes(record.source_event_id));
}

}  // namespace qsc::audit
