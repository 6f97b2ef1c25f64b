#include <cmath>
#include <vector>

#include "doctest.h"

#include "qsc/perfmodel/perfmodel.hpp"

using namespace qsc;
using namespace qsc::perfmodel;
using policy::PostureTier;

namespace {
constexpr double kEps = 1e-12;
}

TEST_CASE("per-tier costs compose from the primitive costs") {
    LatencyParams p;
    CHECK(p.handshake_ms[0] == doctest::Approx(p.kem_encap_ms + p.sign_ms)
                                   .epsilon(kEps));
    CHECK(p.handshake_ms[1] ==
          doctest::Approx(p.handshake_ms[0] + p.qrng_nonce_ms).epsilon(kEps));
    // The hybrid tier handshake is pinned to the QKD establishment budget.
    CHECK(p.handshake_ms[2] == 10.0);
    CHECK(p.handshake_ms[2] == p.qkd_establish_ms);

    CHECK(p.per_msg_ms[0] ==
          doctest::Approx(p.sign_ms + p.verify_ms + p.encrypt_ms)
              .epsilon(kEps));
    CHECK(p.per_msg_ms[1] ==
          doctest::Approx(p.per_msg_ms[0] + p.qrng_nonce_ms).epsilon(kEps));
    CHECK(p.per_msg_ms[2] ==
          doctest::Approx(p.per_msg_ms[0] + p.qkd_key_draw_ms).epsilon(kEps));

    // Example composition: one QKD establishment plus 100 encryptions.
    CHECK(p.qkd_establish_ms + 100 * p.encrypt_ms ==
          doctest::Approx(10.5).epsilon(kEps));
}

TEST_CASE("link latency is exact at zero messages and affine in count") {
    LatencyParams p;
    CHECK(link_latency(p, PostureTier::QKD_PQC_QRNG, 0) == 10.0);
    CHECK(link_latency(p, PostureTier::PQC, 0) == 0.422);
    CHECK(link_latency(p, PostureTier::PQC_QRNG, 0) == 1.579);

    for (auto tier : {PostureTier::PQC, PostureTier::PQC_QRNG,
                      PostureTier::QKD_PQC_QRNG}) {
        // Affine: marginal cost per message is constant.
        auto l0 = link_latency(p, tier, 0);
        auto l1 = link_latency(p, tier, 1);
        auto l10 = link_latency(p, tier, 10);
        CHECK(l10 - l0 == doctest::Approx(10 * (l1 - l0)).epsilon(1e-9));
        // Strictly increasing in message count.
        CHECK(l1 > l0);
        CHECK(l10 > l1);
    }
    // Handshake cost rises with the tier.
    CHECK(link_latency(p, PostureTier::PQC, 0) <
          link_latency(p, PostureTier::PQC_QRNG, 0));
    CHECK(link_latency(p, PostureTier::PQC_QRNG, 0) <
          link_latency(p, PostureTier::QKD_PQC_QRNG, 0));

    // Network baseline enters per message.
    LatencyParams wan = p;
    wan.network_baseline_ms = 297.41;
    CHECK(link_latency(wan, PostureTier::PQC, 5) ==
          doctest::Approx(0.422 + 5 * (0.425 + 297.41)).epsilon(kEps));
}

TEST_CASE("crypto share stays under 5% on a WAN baseline") {
    LatencyParams wan;
    wan.network_baseline_ms = 297.41;
    for (auto tier : {PostureTier::PQC, PostureTier::PQC_QRNG,
                      PostureTier::QKD_PQC_QRNG}) {
        for (std::uint64_t n : {1, 2, 10, 100}) {
            CHECK(crypto_share(wan, tier, n) < 0.05);
        }
    }
    // Without a network the share is trivially 1.
    LatencyParams local;
    CHECK(crypto_share(local, PostureTier::PQC, 3) == doctest::Approx(1.0));
}

TEST_CASE("channel profiles carry the exact flag and shape matrix") {
    const auto& profiles = channel_profiles();
    REQUIRE(profiles.size() == 7);
    // id, pqc, qrng, qkd, hops, nonces, reference_ms
    struct Row {
        int id;
        bool pqc, qrng, qkd;
        int hops, nonces;
        double ref;
    };
    const Row expected[] = {
        {1, true, true, false, 1, 1, 1.06},
        {2, true, false, false, 0, 0, 0.41},
        {3, true, true, true, 2, 1, 2.26},
        {4, true, false, true, 2, 0, 1.10},
        {5, true, true, true, 2, 1, 3.38},
        {6, true, true, true, 4, 2, 4.53},
        {7, true, false, true, 6, 0, 9.83},
    };
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        CAPTURE(i);
        CHECK(profiles[i].id == expected[i].id);
        CHECK(profiles[i].pqc == expected[i].pqc);
        CHECK(profiles[i].qrng == expected[i].qrng);
        CHECK(profiles[i].qkd == expected[i].qkd);
        CHECK(profiles[i].hops == expected[i].hops);
        CHECK(profiles[i].nonces == expected[i].nonces);
        CHECK(profiles[i].reference_ms ==
              doctest::Approx(expected[i].ref).epsilon(kEps));
    }
}

TEST_CASE("channel model reproduces the hand-computed compositions") {
    LatencyParams p;
    const auto& profiles = channel_profiles();
    const double expected[] = {1.587, 0.422, 2.273, 1.116,
                               2.273, 4.546, 3.348};
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        CAPTURE(i);
        CHECK(channel_model_ms(profiles[i], p) ==
              doctest::Approx(expected[i]).epsilon(1e-9));
    }
    // The instrumented channels land within 20% of the reference timings.
    for (int id : {2, 3, 4, 6}) {
        const auto& prof = profiles[static_cast<std::size_t>(id - 1)];
        double model = channel_model_ms(prof, p);
        CHECK(std::abs(model - prof.reference_ms) / prof.reference_ms <=
              0.20);
    }
}

TEST_CASE("channel bench measures real operations and formats the report") {
    auto report = run_channel_bench(2024, 5, 8);
    REQUIRE(report.rows.size() == 7);
    LatencyParams p;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        CHECK(row.profile.id == static_cast<int>(i + 1));
        CHECK(row.time_ms > 0.0);
        CHECK(row.baseline_ms >= 0.0);
        CHECK(row.model_ms ==
              doctest::Approx(channel_model_ms(row.profile, p)));
    }

    // The six-hop round trip does the most real work.
    double max_time = 0;
    for (const auto& row : report.rows) max_time = std::max(max_time, row.time_ms);
    CHECK(report.rows[6].time_ms == doctest::Approx(max_time));

    // Measured effort ranks like the reference timings.
    std::vector<double> measured, reference;
    for (const auto& row : report.rows) {
        measured.push_back(row.time_ms);
        reference.push_back(row.profile.reference_ms);
    }
    CHECK(spearman_rho(measured, reference) > 0.8);

    auto csv = report.to_csv();
    CHECK(csv.rfind("id,flows,pqc,qrng,qkd,time_ms,overhead_pct,model_ms,"
                    "reference_ms,model_delta_ms\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
}

TEST_CASE("weak-scaling sweep fits a line through modeled throughput") {
    auto report = run_scalability(7, 8, true);
    REQUIRE(report.rows.size() == 8);
    CHECK(report.r_squared >= 0.99);
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        CHECK(row.workers == static_cast<int>(i + 1));
        CHECK(row.tasks == row.workers * 4);
        CHECK(row.measured_ms > 0.0);
        if (i > 0) {
            CHECK(row.modeled_throughput >
                  report.rows[i - 1].modeled_throughput);
        }
    }
    auto csv = report.to_csv();
    CHECK(csv.rfind("workers,tasks,modeled_makespan_ms,modeled_throughput_tps,"
                    "measured_ms\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("rank correlation and linear fit behave on known series") {
    CHECK(spearman_rho({1, 2, 3, 4}, {10, 20, 30, 40}) ==
          doctest::Approx(1.0));
    CHECK(spearman_rho({1, 2, 3, 4}, {40, 30, 20, 10}) ==
          doctest::Approx(-1.0));
    // Ties get averaged ranks.
    CHECK(spearman_rho({1, 1, 2, 3}, {5, 5, 6, 7}) == doctest::Approx(1.0));
    CHECK(spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4}) ==
          doctest::Approx(0.8).epsilon(1e-9));
    CHECK_THROWS_AS((void)spearman_rho({1}, {1}), Error);

    CHECK(linear_fit_r2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(linear_fit_r2({1, 2, 3, 4}, {1, 2, 2, 1}) <
          0.5);  // no linear trend
    CHECK_THROWS_AS((void)linear_fit_r2({1, 2}, {1}), Error);
}
