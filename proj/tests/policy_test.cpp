#include "doctest.h"

#include <random>

#include "qsc/policy/policy.hpp"

using namespace qsc;
using namespace qsc::policy;

namespace {

// Independent reference: enumerate feasible tiers, take the max score,
// break ties toward the higher tier index.
std::optional<PostureTier> oracle_select(const PolicyWeights& w,
                                         const LinkScoreTable& s,
                                         const std::array<bool, 3>& feasible) {
    std::optional<PostureTier> best;
    double best_score = 0;
    for (int t = 0; t < 3; ++t) {
        if (!feasible[static_cast<std::size_t>(t)]) continue;
        double sc = s.score(w, static_cast<PostureTier>(t));
        if (!best || sc > best_score ||
            (sc == best_score && t > static_cast<int>(*best))) {
            best = static_cast<PostureTier>(t);
            best_score = sc;
        }
    }
    return best;
}

ComplianceMatrix all_permitted_matrix() {
    ComplianceMatrix m;
    for (PostureTier t : kAllTiers) m.set("X", "X", t, true);
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("tier names roundtrip") {
    for (PostureTier t : kAllTiers) CHECK(tier_from_name(tier_name(t)) == t);
    CHECK_THROWS_AS(tier_from_name("RSA"), Error);
}

TEST_CASE("weights validation") {
    PolicyWeights w;
    w.validate();
    w.security = -1;
    CHECK_THROWS_AS(w.validate(), Error);
    w = PolicyWeights{0, 0, 0};
    CHECK_THROWS_AS(w.validate(), Error);
}

TEST_CASE("builtin compliance matrix pinned entries") {
    ComplianceMatrix m = ComplianceMatrix::builtin_default();
    CHECK(m.permitted("EU", "EU", PostureTier::PQC));
    CHECK_FALSE(m.permitted("EU", "US", PostureTier::QKD_PQC_QRNG));
    CHECK(m.permitted("EU", "EU", PostureTier::QKD_PQC_QRNG));
    CHECK(m.permitted("EU", "US", PostureTier::PQC_QRNG));
    CHECK_FALSE(m.permitted("EU", "CN", PostureTier::PQC_QRNG));
    CHECK_FALSE(m.permitted("CN", "CN", PostureTier::QKD_PQC_QRNG));
    CHECK_FALSE(m.permitted("US", "US", PostureTier::QKD_PQC_QRNG));
    CHECK_FALSE(m.permitted("JP", "JP", PostureTier::PQC_QRNG));
    CHECK(m.permitted("AU", "US", PostureTier::PQC_QRNG));

    for (const auto& ru : m.regions())
        for (const auto& rv : m.regions())
            CHECK(m.permitted(ru, rv, PostureTier::PQC));

    CHECK_THROWS_AS((void)m.permitted("MARS", "EU", PostureTier::PQC), Error);
    try {
        (void)m.permitted("EU", "MARS", PostureTier::PQC);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownRegion);
    }
}

TEST_CASE("compliance matrix json roundtrip and validation") {
    ComplianceMatrix m = ComplianceMatrix::builtin_default();
    nlohmann::json doc = m.to_json();
    ComplianceMatrix m2 = ComplianceMatrix::from_json(doc);
    for (const auto& ru : m.regions())
        for (const auto& rv : m.regions())
            for (PostureTier t : kAllTiers)
                CHECK(m.permitted(ru, rv, t) == m2.permitted(ru, rv, t));

    SUBCASE("incomplete matrix rejected") {
        nlohmann::json bad = doc;
        bad["rows"].erase(0);
        CHECK_THROWS_AS((void)ComplianceMatrix::from_json(bad), Error);
    }
    SUBCASE("baseline ban rejected") {
        ComplianceMatrix bad;
        for (PostureTier t : kAllTiers) bad.set("A", "A", t, false);
        CHECK_THROWS_AS(bad.validate(), Error);
    }
    SUBCASE("schema violations rejected") {
        CHECK_THROWS_AS((void)ComplianceMatrix::from_json(nlohmann::json::array()),
                        Error);
        nlohmann::json norows = {{"regions", {"A"}}};
        CHECK_THROWS_AS((void)ComplianceMatrix::from_json(norows), Error);
    }
}

TEST_CASE("posture selection on the default table") {
    ComplianceMatrix m = ComplianceMatrix::builtin_default();
    LinkScoreTable scores;
    PolicyWeights balanced{1.0, 0.1, 0.05};

    // balanced weights: QRNG tier wins on EU-EU even with QKD available
    CHECK(select_posture(balanced, scores, m, "EU", "EU", true) ==
          PostureTier::PQC_QRNG);

    // security-dominant weights promote to the QKD tier where lawful
    PolicyWeights security_first{10.0, 0.1, 0.05};
    CHECK(select_posture(security_first, scores, m, "EU", "EU", true) ==
          PostureTier::QKD_PQC_QRNG);

    // same weights across the border cap out at the QRNG tier
    CHECK(select_posture(security_first, scores, m, "EU", "US", true) ==
          PostureTier::PQC_QRNG);

    // no QKD availability on the link demotes the QKD tier
    CHECK(select_posture(security_first, scores, m, "EU", "EU", false) ==
          PostureTier::PQC_QRNG);

    // latency-dominant weights collapse to the baseline
    PolicyWeights latency_first{0.01, 10.0, 0.0};
    CHECK(select_posture(latency_first, scores, m, "EU", "EU", true) ==
          PostureTier::PQC);
}

TEST_CASE("posture floor produces NoCompliantPosture across borders") {
    ComplianceMatrix m = ComplianceMatrix::builtin_default();
    LinkScoreTable scores;
    PolicyWeights w{1.0, 0.1, 0.05};

    CHECK(select_posture(w, scores, m, "EU", "EU", true,
                         PostureTier::QKD_PQC_QRNG) ==
          PostureTier::QKD_PQC_QRNG);
    CHECK_THROWS_AS((void)select_posture(w, scores, m, "EU", "US", true,
                                         PostureTier::QKD_PQC_QRNG),
                    Error);
    try {
        (void)select_posture(w, scores, m, "EU", "US", true,
                             PostureTier::QKD_PQC_QRNG);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCompliantPosture);
    }
}

TEST_CASE("score ties resolve toward the stronger tier") {
    ComplianceMatrix m = all_permitted_matrix();
    LinkScoreTable scores;
    scores.security = {1.0, 2.0, 2.0};
    scores.latency_ms = {0.0, 0.0, 0.0};
    scores.cost = {0.0, 0.0, 0.0};
    PolicyWeights w{1.0, 0.0, 0.0};
    CHECK(select_posture(w, scores, m, "X", "X", true) ==
          PostureTier::QKD_PQC_QRNG);
}

TEST_CASE("selection matches brute-force oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> val(0.0, 10.0);

    int checked = 0;
    for (int trial = 0; trial < 600; ++trial) {
        LinkScoreTable scores;
        for (int t = 0; t < 3; ++t) {
            scores.security[t] = val(rng);
            scores.latency_ms[t] = val(rng);
            scores.cost[t] = val(rng);
        }
        PolicyWeights w{val(rng), val(rng), val(rng)};
        if (w.security == 0 && w.latency == 0 && w.cost == 0) continue;

        bool qkd_available = rng() % 2 == 0;
        ComplianceMatrix m;
        std::array<bool, 3> permitted;
        permitted[0] = true;
        permitted[1] = rng() % 2 == 0;
        permitted[2] = rng() % 2 == 0;
        for (int t = 0; t < 3; ++t)
            m.set("X", "X", static_cast<PostureTier>(t), permitted[t]);
        m.validate();

        std::array<bool, 3> feasible = permitted;
        feasible[2] = feasible[2] && qkd_available;

        auto expect = oracle_select(w, scores, feasible);
        REQUIRE(expect.has_value());  // baseline always feasible here
        CHECK(select_posture(w, scores, m, "X", "X", qkd_available) == *expect);
        ++checked;
    }
    CHECK(checked >= 500);
}

TEST_CASE("raising the security weight never demotes the tier") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> val(0.0, 5.0);

    for (int sweep = 0; sweep < 120; ++sweep) {
        LinkScoreTable scores;
        // security values ascending in tier; latency/cost arbitrary
        scores.security = {val(rng), 0, 0};
        scores.security[1] = scores.security[0] + val(rng) + 0.01;
        scores.security[2] = scores.security[1] + val(rng) + 0.01;
        for (int t = 0; t < 3; ++t) {
            scores.latency_ms[t] = val(rng);
            scores.cost[t] = val(rng);
        }
        ComplianceMatrix m;
        m.set("X", "X", PostureTier::PQC, true);
        m.set("X", "X", PostureTier::PQC_QRNG, rng() % 2 == 0);
        m.set("X", "X", PostureTier::QKD_PQC_QRNG, rng() % 2 == 0);
        m.validate();
        bool qkd_available = rng() % 2 == 0;
        double lat_w = val(rng), cost_w = val(rng);

        int prev = -1;
        for (double sec_w = 0.0; sec_w <= 10.0; sec_w += 0.25) {
            PolicyWeights w{sec_w, lat_w, cost_w};
            if (sec_w == 0 && lat_w == 0 && cost_w == 0) continue;
            PostureTier t = select_posture(w, scores, m, "X", "X", qkd_available);
            CHECK(static_cast<int>(t) >= prev);
            prev = static_cast<int>(t);
        }
    }
}

TEST_CASE("selection is invariant under weight rescaling") {
    ComplianceMatrix m = ComplianceMatrix::builtin_default();
    LinkScoreTable scores;
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> val(0.01, 5.0);

    for (int i = 0; i < 100; ++i) {
        PolicyWeights w{val(rng), val(rng), val(rng)};
        PostureTier base = select_posture(w, scores, m, "EU", "EU", true);
        double c = val(rng);
        PolicyWeights scaled{w.security * c, w.latency * c, w.cost * c};
        CHECK(select_posture(scaled, scores, m, "EU", "EU", true) == base);
    }
}

TEST_CASE("fallback chain descends to the baseline") {
    CHECK(fallback_chain(PostureTier::QKD_PQC_QRNG) ==
          std::vector<PostureTier>{PostureTier::QKD_PQC_QRNG,
                                   PostureTier::PQC_QRNG, PostureTier::PQC});
    CHECK(fallback_chain(PostureTier::PQC_QRNG) ==
          std::vector<PostureTier>{PostureTier::PQC_QRNG, PostureTier::PQC});
    CHECK(fallback_chain(PostureTier::PQC) ==
          std::vector<PostureTier>{PostureTier::PQC});
}
