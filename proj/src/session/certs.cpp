#include "qsc/session/certs.hpp"

#include "qsc/error.hpp"
#include "qsc/sha256.hpp"

namespace qsc::session {

Bytes Certificate::tbs_digest() const {
    return hash_segments({to_bytes("qsc.cert.tbs"), to_bytes(subject),
                          ByteView(sig_public), to_bytes(issuer)});
}

Bytes Certificate::encode() const {
    Bytes out;
    append_lp(out, subject);
    append_lp(out, ByteView(sig_public));
    append_lp(out, issuer);
    append_lp(out, ByteView(issuer_signature));
    return out;
}

Certificate Certificate::decode(ByteReader& reader) {
    Certificate cert;
    cert.subject = reader.lp_string();
    cert.sig_public = reader.lp();
    cert.issuer = reader.lp_string();
    cert.issuer_signature = reader.lp();
    return cert;
}

CertificateAuthority::CertificateAuthority(const crypto::Suite& suite,
                                           crypto::EntropySource& entropy)
    : suite_(suite), root_(suite.sig->keygen(entropy)) {}

Certificate CertificateAuthority::issue(const std::string& subject,
                                        Bytes sig_public) const {
    if (subject.empty())
        throw Error(ErrorCode::CertificateInvalid, "empty certificate subject");
    Certificate cert;
    cert.subject = subject;
    cert.sig_public = std::move(sig_public);
    cert.issuer = std::string(kIssuerName);
    cert.issuer_signature =
        suite_.sig->sign(ByteView(root_.private_key), ByteView(cert.tbs_digest()));
    return cert;
}

bool CertificateAuthority::verify(const Certificate& cert) const {
    return verify_against(root_.public_key, suite_, cert);
}

bool CertificateAuthority::verify_against(const Bytes& root_public,
                                          const crypto::Suite& suite,
                                          const Certificate& cert) {
    if (cert.subject.empty() || cert.issuer != kIssuerName) return false;
    return suite.sig->verify(ByteView(root_public), ByteView(cert.tbs_digest()),
                             ByteView(cert.issuer_signature));
}

}  // namespace qsc::session
