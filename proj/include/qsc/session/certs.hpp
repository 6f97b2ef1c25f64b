#pragma once

// Minimal certificate model: a root authority signs (subject, signing key)
// bindings. Enough structure for bootstrap admission checks and for audit
// records to carry a verifiable signer identity.

#include <string>

#include "qsc/bytes.hpp"
#include "qsc/crypto/entropy.hpp"
#include "qsc/crypto/provider.hpp"

namespace qsc::session {

struct Certificate {
    std::string subject;
    Bytes sig_public;
    std::string issuer;
    Bytes issuer_signature;

    Bytes tbs_digest() const;
    Bytes encode() const;
    static Certificate decode(ByteReader& reader);
};

class CertificateAuthority {
public:
    static constexpr std::string_view kIssuerName = "qsc-root";

    CertificateAuthority(const crypto::Suite& suite,
                         crypto::EntropySource& entropy);

    Certificate issue(const std::string& subject, Bytes sig_public) const;
    bool verify(const Certificate& cert) const;
    const Bytes& root_public() const { return root_.public_key; }

    // Verification against a bare root key (used by ledger verification,
    // which has no CA object).
    static bool verify_against(const Bytes& root_public,
                               const crypto::Suite& suite,
                               const Certificate& cert);

private:
    crypto::Suite suite_;
    crypto::SigKeyPair root_;
};

}  // namespace qsc::session
