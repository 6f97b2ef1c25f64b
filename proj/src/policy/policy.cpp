#include "qsc/policy/policy.hpp"

#include <algorithm>

namespace qsc::policy {

PostureTier tier_from_name(std::string_view name) {
    for (PostureTier t : kAllTiers)
        if (tier_name(t) == name) return t;
    throw Error(ErrorCode::ConfigError,
                "unknown posture tier: " + std::string(name));
}

void PolicyWeights::validate() const {
    if (security < 0 || latency < 0 || cost < 0)
        throw Error(ErrorCode::ConfigError, "policy weights must be non-negative");
    if (security == 0 && latency == 0 && cost == 0)
        throw Error(ErrorCode::ConfigError, "at least one policy weight must be positive");
}

namespace {

struct RegionLayers {
    bool qrng;
    bool qkd_intra;
};

const std::map<std::string, RegionLayers>& default_region_layers() {
    static const std::map<std::string, RegionLayers> layers = {
        {"US", {true, false}}, {"EU", {true, true}},  {"CN", {false, true}},
        {"JP", {false, false}}, {"AU", {true, false}},
    };
    return layers;
}

}  // namespace

ComplianceMatrix ComplianceMatrix::builtin_default() {
    ComplianceMatrix m;
    const auto& layers = default_region_layers();
    for (const auto& [ru, lu] : layers) {
        for (const auto& [rv, lv] : layers) {
            m.set(ru, rv, PostureTier::PQC, true);
            m.set(ru, rv, PostureTier::PQC_QRNG, lu.qrng && lv.qrng);
            bool qkd_ok = lu.qrng && lv.qrng && lu.qkd_intra && lv.qkd_intra &&
                          ru == rv;
            m.set(ru, rv, PostureTier::QKD_PQC_QRNG, qkd_ok);
        }
    }
    m.validate();
    return m;
}

ComplianceMatrix ComplianceMatrix::from_json(const nlohmann::json& doc) {
    ComplianceMatrix m;
    try {
        if (!doc.is_object() || !doc.contains("regions") || !doc.contains("rows"))
            throw Error(ErrorCode::ConfigError,
                        "compliance matrix needs regions and rows");
        for (const auto& r : doc.at("regions"))
            m.regions_.insert(r.get<std::string>());
        for (const auto& row : doc.at("rows")) {
            if (!row.is_array() || row.size() != 4)
                throw Error(ErrorCode::ConfigError,
                            "matrix row must be [region_u, region_v, tier, permitted]");
            m.set(row[0].get<std::string>(), row[1].get<std::string>(),
                  tier_from_name(row[2].get<std::string>()), row[3].get<bool>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError,
                    std::string("compliance matrix parse: ") + e.what());
    }
    m.validate();
    return m;
}

nlohmann::json ComplianceMatrix::to_json() const {
    nlohmann::json doc;
    doc["regions"] = regions_;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, permitted] : rows_) {
        const auto& [ru, rv, tier] = key;
        rows.push_back({ru, rv,
                        std::string(tier_name(static_cast<PostureTier>(tier))),
                        permitted});
    }
    doc["rows"] = rows;
    return doc;
}

bool ComplianceMatrix::permitted(const std::string& region_u,
                                 const std::string& region_v,
                                 PostureTier tier) const {
    if (!regions_.contains(region_u))
        throw Error(ErrorCode::UnknownRegion, "undeclared region: " + region_u);
    if (!regions_.contains(region_v))
        throw Error(ErrorCode::UnknownRegion, "undeclared region: " + region_v);
    auto it = rows_.find({region_u, region_v, static_cast<int>(tier)});
    if (it == rows_.end())
        throw Error(ErrorCode::ConfigError,
                    "compliance matrix row missing for " + region_u + "/" +
                        region_v);
    return it->second;
}

void ComplianceMatrix::set(const std::string& region_u,
                           const std::string& region_v, PostureTier tier,
                           bool permitted) {
    regions_.insert(region_u);
    regions_.insert(region_v);
    rows_[{region_u, region_v, static_cast<int>(tier)}] = permitted;
}

void ComplianceMatrix::validate() const {
    if (regions_.empty())
        throw Error(ErrorCode::ConfigError, "compliance matrix declares no regions");
    for (const auto& ru : regions_) {
        for (const auto& rv : regions_) {
            for (PostureTier t : kAllTiers) {
                auto it = rows_.find({ru, rv, static_cast<int>(t)});
                if (it == rows_.end())
                    throw Error(ErrorCode::ConfigError,
                                "compliance matrix incomplete: " + ru + "/" + rv +
                                    "/" + std::string(tier_name(t)));
            }
            if (!rows_.at({ru, rv, static_cast<int>(PostureTier::PQC)}))
                throw Error(ErrorCode::ConfigError,
                            "baseline tier must be permitted for " + ru + "/" + rv);
        }
    }
}

PostureTier select_posture(const PolicyWeights& weights,
                           const LinkScoreTable& scores,
                           const ComplianceMatrix& matrix,
                           const std::string& region_u,
                           const std::string& region_v, bool qkd_available,
                           PostureTier min_tier) {
    weights.validate();
    bool found = false;
    PostureTier best = PostureTier::PQC;
    double best_score = 0.0;
    // descending tier order with strict improvement keeps the stronger tier
    // on score ties
    for (auto it = kAllTiers.rbegin(); it != kAllTiers.rend(); ++it) {
        PostureTier t = *it;
        if (static_cast<int>(t) < static_cast<int>(min_tier)) continue;
        if (t == PostureTier::QKD_PQC_QRNG && !qkd_available) continue;
        if (!matrix.permitted(region_u, region_v, t)) continue;
        double s = scores.score(weights, t);
        if (!found || s > best_score) {
            found = true;
            best = t;
            best_score = s;
        }
    }
    if (!found)
        throw Error(ErrorCode::NoCompliantPosture,
                    "no feasible posture for " + region_u + " -> " + region_v);
    return best;
}

std::vector<PostureTier> fallback_chain(PostureTier start) {
    std::vector<PostureTier> chain;
    for (int t = static_cast<int>(start); t >= 0; --t)
        chain.push_back(static_cast<PostureTier>(t));
    return chain;
}

}  // namespace qsc::policy
