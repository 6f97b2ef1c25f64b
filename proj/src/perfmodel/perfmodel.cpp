#include "qsc/perfmodel/perfmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "qsc/error.hpp"
#include "qsc/orchestrator/orchestrator.hpp"
#include "qsc/sha256.hpp"
#include "qsc/session/session.hpp"
#include "qsc/wire/wire.hpp"
#include "qsc/xor_kernel.hpp"

namespace qsc::perfmodel {

double link_latency(const LatencyParams& params, policy::PostureTier tier,
                    std::uint64_t messages) {
    auto i = static_cast<std::size_t>(tier);
    return params.handshake_ms[i] +
           static_cast<double>(messages) *
               (params.per_msg_ms[i] + params.network_baseline_ms);
}

double crypto_share(const LatencyParams& params, policy::PostureTier tier,
                    std::uint64_t messages) {
    LatencyParams crypto_only = params;
    crypto_only.network_baseline_ms = 0.0;
    double crypto = link_latency(crypto_only, tier, messages);
    double total = link_latency(params, tier, messages);
    return total == 0.0 ? 0.0 : crypto / total;
}

const std::array<ChannelProfile, 7>& channel_profiles() {
    static const std::array<ChannelProfile, 7> profiles = {{
        {1, "intake", true, true, false, 1, 1, 1.06},
        {2, "handshake", true, false, false, 0, 0, 0.41},
        {3, "assign-result", true, true, true, 2, 1, 2.26},
        {4, "assign-result-cached", true, false, true, 2, 0, 1.10},
        {5, "agent-relay", true, true, true, 2, 1, 3.38},
        {6, "merge-fanin", true, true, true, 4, 2, 4.53},
        {7, "full-roundtrip", true, false, true, 6, 0, 9.83},
    }};
    return profiles;
}

double channel_model_ms(const ChannelProfile& profile,
                        const LatencyParams& params) {
    if (profile.id == 2) {
        return params.kem_encap_ms + params.sign_ms;
    }
    double per_hop = params.sign_ms + params.verify_ms + params.encrypt_ms +
                     params.decrypt_ms +
                     (profile.qkd ? params.qkd_key_draw_ms : 0.0);
    return profile.hops * per_hop + profile.nonces * params.qrng_nonce_ms;
}

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    auto n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

using Clock = std::chrono::steady_clock;

double time_ms_of(const std::function<void()>& body, int samples, int iters) {
    std::vector<double> timings;
    timings.reserve(samples);
    for (int s = 0; s < samples; ++s) {
        auto t0 = Clock::now();
        for (int i = 0; i < iters; ++i) body();
        auto t1 = Clock::now();
        timings.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count() /
            iters);
    }
    return median(timings);
}

std::string format_ms(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << v;
    return out.str();
}

}  // namespace

std::string ChannelBenchReport::to_csv() const {
    std::string csv =
        "id,flows,pqc,qrng,qkd,time_ms,overhead_pct,model_ms,reference_ms,"
        "model_delta_ms\n";
    for (const auto& row : rows) {
        const auto& p = row.profile;
        csv += std::to_string(p.id) + "," + p.label + "," +
               (p.pqc ? "1" : "0") + "," + (p.qrng ? "1" : "0") + "," +
               (p.qkd ? "1" : "0") + "," + format_ms(row.time_ms) + ",";
        if (row.baseline_ms > 0.0) {
            csv += format_ms((row.time_ms - row.baseline_ms) /
                             row.baseline_ms * 100.0);
        } else {
            csv += "n/a";
        }
        csv += "," + format_ms(row.model_ms) + "," +
               format_ms(p.reference_ms) + "," +
               format_ms(row.model_ms - p.reference_ms) + "\n";
    }
    return csv;
}

ChannelBenchReport run_channel_bench(std::uint64_t seed, int samples,
                                     int iters) {
    namespace s = session;
    crypto::Suite suite =
        crypto::resolve_suite(crypto::register_simulation_suite());
    crypto::EntropySource entropy(crypto::EntropyKind::QRNG_SIM, seed);
    entropy.set_uniqueness_tracking(false);
    crypto::QkdLinkModel qkd(seed);
    s::CertificateAuthority ca(suite, entropy);
    audit::AuditLedger ledger(suite, ca.root_public());

    auto make_actor = [&](const std::string& id, s::ActorKind kind) {
        auto sig = suite.sig->keygen(entropy);
        auto kem = suite.kem->keygen(entropy);
        s::ActorRecord rec;
        rec.actor_id = id;
        rec.kind = kind;
        rec.region = "US";
        rec.cert = ca.issue(id, sig.public_key);
        rec.kem_public = kem.public_key;
        return std::pair{rec,
                         s::PrivateIdentity{sig.private_key, kem.private_key}};
    };
    auto [orch, orch_ident] = make_actor("orch", s::ActorKind::ORCHESTRATOR);
    s::SessionContext ctx(suite, s::SessionPolicy{}, entropy, qkd, ledger,
                          orch, orch_ident);
    for (auto [id, kind] :
         std::vector<std::pair<std::string, s::ActorKind>>{
             {"client", s::ActorKind::CLIENT},
             {"agent-a", s::ActorKind::AGENT},
             {"agent-b", s::ActorKind::AGENT}}) {
        auto [rec, ident] = make_actor(id, kind);
        ctx.bootstrap_actor(rec, ident);
    }

    Bytes payload = entropy.sample(256);
    Bytes zero_task(wire::kTaskIdBytes, 0);
    wire::ReplayRegistry replay;

    // Hop sequences per channel (channel 2 is the bare handshake).
    std::vector<std::vector<std::pair<std::string, std::string>>> paths = {
        {{"client", "orch"}},
        {},
        {{"orch", "agent-a"}, {"agent-a", "orch"}},
        {{"orch", "agent-a"}, {"agent-a", "orch"}},
        {{"agent-a", "orch"}, {"orch", "agent-b"}},
        {{"client", "orch"},
         {"orch", "agent-a"},
         {"agent-a", "orch"},
         {"orch", "client"}},
        {{"client", "orch"},
         {"orch", "agent-a"},
         {"agent-a", "orch"},
         {"orch", "agent-b"},
         {"agent-b", "orch"},
         {"orch", "client"}},
    };

    auto kem_pub = ctx.actor("agent-a").kem_public;
    const auto& sig_priv = ctx.identity("orch").sig_private;
    Bytes xor_key = entropy.sample(payload.size());

    ChannelBenchReport report;
    for (const auto& profile : channel_profiles()) {
        const auto& path = paths[static_cast<std::size_t>(profile.id - 1)];
        std::uint64_t ts = 0;

        auto secure_body = [&]() {
            if (profile.id == 2) {
                auto enc = suite.kem->encapsulate(kem_pub, entropy);
                (void)suite.sig->sign(sig_priv,
                                      hash_segments({enc.ciphertext}));
                return;
            }
            for (const auto& [u, v] : path) {
                auto frame = wire::seal(ctx, u, v, wire::MsgKind::CONTROL,
                                        zero_task, payload, ++ts);
                (void)wire::open(ctx, replay, frame);
            }
            for (int n = 0; n < profile.nonces; ++n) {
                (void)entropy.sample(32);
            }
        };
        // Classical baseline: the same traversal count with an unsigned,
        // unauthenticated XOR transform per hop.
        auto baseline_body = [&]() {
            if (profile.id == 2) {
                Bytes copy = payload;
                xor_bytes(copy.data(), copy.data(), xor_key.data(),
                          copy.size());
                return;
            }
            for (std::size_t h = 0; h < path.size(); ++h) {
                Bytes copy = payload;
                // Encrypt then decrypt: one XOR pass per direction.
                xor_bytes(copy.data(), copy.data(), xor_key.data(),
                          copy.size());
                xor_bytes(copy.data(), copy.data(), xor_key.data(),
                          copy.size());
            }
        };

        ChannelBenchRow row;
        row.profile = profile;
        row.time_ms = time_ms_of(secure_body, samples, iters);
        replay.clear();
        row.baseline_ms = time_ms_of(baseline_body, samples, iters);
        row.model_ms = channel_model_ms(profile, LatencyParams{});
        report.rows.push_back(std::move(row));
        replay.clear();
    }
    return report;
}

std::string ScaleReport::to_csv() const {
    std::string csv =
        "workers,tasks,modeled_makespan_ms,modeled_throughput_tps,"
        "measured_ms\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.workers) + "," + std::to_string(row.tasks) +
               "," + format_ms(row.modeled_makespan_ms) + "," +
               format_ms(row.modeled_throughput) + "," +
               format_ms(row.measured_ms) + "\n";
    }
    return csv;
}

ScaleReport run_scalability(std::uint64_t seed, int max_workers,
                            bool measure) {
    namespace s = session;
    LatencyParams params;
    ScaleReport report;

    constexpr int kTasksPerWorker = 4;
    constexpr auto kTier = policy::PostureTier::PQC_QRNG;
    auto tier_i = static_cast<std::size_t>(kTier);

    std::vector<double> xs, ys;
    for (int workers = 1; workers <= max_workers; ++workers) {
        ScaleRow row;
        row.workers = workers;
        row.tasks = workers * kTasksPerWorker;
        // Weak scaling: each worker handshakes once, then runs its fixed
        // share of tasks; each task is one assignment and one result frame.
        row.modeled_makespan_ms =
            params.handshake_ms[tier_i] +
            kTasksPerWorker *
                2.0 * (params.per_msg_ms[tier_i] + params.network_baseline_ms);
        row.modeled_throughput =
            row.tasks / (row.modeled_makespan_ms / 1000.0);

        if (measure) {
            crypto::Suite suite =
                crypto::resolve_suite(crypto::register_simulation_suite());
            crypto::EntropySource entropy(crypto::EntropyKind::QRNG_SIM,
                                          seed + workers);
            entropy.set_uniqueness_tracking(false);
            crypto::QkdLinkModel qkd(seed);
            s::CertificateAuthority ca(suite, entropy);
            audit::AuditLedger ledger(suite, ca.root_public());

            auto make_actor = [&](const std::string& id, s::ActorKind kind) {
                auto sig = suite.sig->keygen(entropy);
                auto kem = suite.kem->keygen(entropy);
                s::ActorRecord rec;
                rec.actor_id = id;
                rec.kind = kind;
                rec.region = "US";
                rec.cert = ca.issue(id, sig.public_key);
                rec.kem_public = kem.public_key;
                return std::pair{
                    rec, s::PrivateIdentity{sig.private_key, kem.private_key}};
            };
            auto [orch, orch_ident] =
                make_actor("orch", s::ActorKind::ORCHESTRATOR);
            s::SessionContext ctx(suite, s::SessionPolicy{}, entropy, qkd,
                                  ledger, orch, orch_ident);
            auto [client, client_ident] =
                make_actor("client-1", s::ActorKind::CLIENT);
            ctx.bootstrap_actor(client, client_ident);
            for (int i = 0; i < workers; ++i) {
                auto [rec, ident] = make_actor("agent-" + std::to_string(i),
                                               s::ActorKind::AGENT);
                ctx.bootstrap_actor(rec, ident);
            }

            nlohmann::json request = {
                {"request_id", "scale-" + std::to_string(workers)},
                {"client", "client-1"},
                {"reducer", "concat"},
                {"subtasks", nlohmann::json::array()},
            };
            for (int t = 0; t < row.tasks; ++t) {
                request["subtasks"].push_back(
                    {{"name", "t" + std::to_string(t)},
                     {"op", "echo"},
                     {"params", {{"text", "x" + std::to_string(t)}}}});
            }

            orchestrator::PipelineEnv env(ctx);
            auto t0 = Clock::now();
            (void)orchestrator::handle_request(env, "client-1",
                                               request.dump());
            auto t1 = Clock::now();
            row.measured_ms =
                std::chrono::duration<double, std::milli>(t1 - t0).count();
        }

        xs.push_back(static_cast<double>(workers));
        ys.push_back(row.modeled_throughput);
        report.rows.push_back(row);
    }
    report.r_squared = linear_fit_r2(xs, ys);
    return report;
}

namespace {

std::vector<double> tie_ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 +
                     1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    auto n = static_cast<double>(a.size());
    double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

}  // namespace

double spearman_rho(const std::vector<double>& a,
                    const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorCode::ConfigError,
                    "rank correlation needs two equal-length series");
    }
    return pearson(tie_ranks(a), tie_ranks(b));
}

double linear_fit_r2(const std::vector<double>& x,
                     const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::ConfigError,
                    "fit needs two equal-length series");
    }
    auto n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) return 0.0;
    double slope = sxy / sxx;
    double intercept = my - slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double fit = intercept + slope * x[i];
        ss_res += (y[i] - fit) * (y[i] - fit);
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    if (ss_tot == 0.0) return 1.0;
    return 1.0 - ss_res / ss_tot;
}

}  // namespace qsc::perfmodel
