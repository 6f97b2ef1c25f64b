#pragma once

// Per-link crypto posture selection: three posture tiers, a region
// compliance matrix, and a weighted argmax over security / latency / cost
// with ties resolved toward the stronger tier.

#include <array>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "qsc/crypto/provider.hpp"
#include "qsc/error.hpp"

namespace qsc::policy {

enum class PostureTier : int {
    PQC = 0,
    PQC_QRNG = 1,
    QKD_PQC_QRNG = 2,
};

inline constexpr std::array<PostureTier, 3> kAllTiers = {
    PostureTier::PQC, PostureTier::PQC_QRNG, PostureTier::QKD_PQC_QRNG};

constexpr std::string_view tier_name(PostureTier t) {
    switch (t) {
        case PostureTier::PQC: return "PQC";
        case PostureTier::PQC_QRNG: return "PQC_QRNG";
        case PostureTier::QKD_PQC_QRNG: return "QKD_PQC_QRNG";
    }
    return "PQC";
}

PostureTier tier_from_name(std::string_view name);

struct CryptoPosture {
    PostureTier tier = PostureTier::PQC;
    crypto::SuiteDescriptor suite;
};

// Non-negative objective weights; at least one must be positive.
struct PolicyWeights {
    double security = 1.0;
    double latency = 0.1;
    double cost = 0.05;

    void validate() const;
};

// Per-tier objective inputs. Latency defaults compose the handshake-path
// primitive costs: encapsulation 0.082 + signing 0.34 for the baseline
// tier, plus 1.157 per QRNG nonce request, plus 10.0 for QKD establishment.
struct LinkScoreTable {
    std::array<double, 3> security = {1.0, 2.0, 3.0};
    std::array<double, 3> latency_ms = {0.422, 1.579, 11.579};
    std::array<double, 3> cost = {1.0, 2.0, 5.0};

    double score(const PolicyWeights& w, PostureTier t) const {
        auto i = static_cast<std::size_t>(t);
        return w.security * security[i] - w.latency * latency_ms[i] -
               w.cost * cost[i];
    }
};

// Directed region-pair permissions per tier. Total over the declared
// region set: lookups for undeclared regions raise UnknownRegion, and the
// baseline tier must be permitted for every pair.
class ComplianceMatrix {
public:
    // Default transcription. Per-region layer permissions under a
    // conservative reading of published deployment status:
    //   QRNG permitted: US, EU, AU (CN certification-dependent, JP R&D only)
    //   QKD permitted intra-region: EU, CN (US defense-restricted, JP
    //   emerging, AU under review); cross-border QKD never permitted
    // A tier is permitted iff every layer above the baseline is permitted
    // at both endpoints; the QKD tier additionally requires both endpoints
    // in the same region.
    static ComplianceMatrix builtin_default();

    static ComplianceMatrix from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    bool permitted(const std::string& region_u, const std::string& region_v,
                   PostureTier tier) const;
    const std::set<std::string>& regions() const { return regions_; }

    void set(const std::string& region_u, const std::string& region_v,
             PostureTier tier, bool permitted);
    // Verifies totality and the baseline invariant; ConfigError on failure.
    void validate() const;

private:
    std::set<std::string> regions_;
    // key: region_u | region_v | tier
    std::map<std::tuple<std::string, std::string, int>, bool> rows_;
};

// Weighted argmax over compliant, feasible tiers. The QKD tier is feasible
// only when the link has QKD availability; min_tier expresses a mission
// floor below which postures are not acceptable. Ties prefer the stronger
// tier. Raises NoCompliantPosture when the feasible set is empty.
PostureTier select_posture(const PolicyWeights& weights,
                           const LinkScoreTable& scores,
                           const ComplianceMatrix& matrix,
                           const std::string& region_u,
                           const std::string& region_v, bool qkd_available,
                           PostureTier min_tier = PostureTier::PQC);

// Degradation order from a starting tier down to the baseline.
std::vector<PostureTier> fallback_chain(PostureTier start);

}  // namespace qsc::policy
