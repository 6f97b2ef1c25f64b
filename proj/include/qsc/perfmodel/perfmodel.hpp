#pragma once

// Latency accounting model plus the measurement harness. The model costs
// are per-primitive constants composed into per-tier handshake and
// per-message figures; the harness runs the same sealed-frame operations
// for real and reports measured medians next to the modeled and reference
// values.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsc/policy/policy.hpp"

namespace qsc::perfmodel {

struct LatencyParams {
    // Per-tier handshake and per-message costs, indexed by
    // policy::PostureTier. The hybrid-tier handshake is pinned to the QKD
    // establishment budget.
    std::array<double, 3> handshake_ms = {0.422, 1.579, 10.0};
    std::array<double, 3> per_msg_ms = {0.425, 1.582, 0.553};
    double network_baseline_ms = 0.0;

    // Primitive costs the tiers compose from.
    double sign_ms = 0.34;
    double verify_ms = 0.08;
    double encrypt_ms = 0.005;
    double decrypt_ms = 0.005;
    double kem_encap_ms = 0.082;
    double qrng_nonce_ms = 1.157;
    double qkd_establish_ms = 10.0;
    double qkd_key_draw_ms = 0.128;
};

// handshake + n * (per-message + network baseline) for one link.
double link_latency(const LatencyParams& params, policy::PostureTier tier,
                    std::uint64_t messages);

// Crypto share of the total for one link: crypto-only latency divided by
// latency including the network baseline.
double crypto_share(const LatencyParams& params, policy::PostureTier tier,
                    std::uint64_t messages);

struct ChannelProfile {
    int id = 0;
    std::string label;
    bool pqc = true;
    bool qrng = false;
    bool qkd = false;
    int hops = 0;    // sealed frame traversals (seal + open each)
    int nonces = 0;  // extra QRNG nonce requests on the path
    double reference_ms = 0.0;
};

// The seven benchmark channels with their protection flags, path shape and
// reference timings.
const std::array<ChannelProfile, 7>& channel_profiles();

// Composition: per hop a signature, a verification, an encryption, a
// decryption and (on QKD channels) a key draw; plus the extra nonce
// requests. Channel 2 is the bare handshake (encapsulation + signature).
double channel_model_ms(const ChannelProfile& profile,
                        const LatencyParams& params);

struct ChannelBenchRow {
    ChannelProfile profile;
    double time_ms = 0.0;      // measured median per iteration
    double baseline_ms = 0.0;  // classical (unsigned, XOR) channel median
    double model_ms = 0.0;
};

struct ChannelBenchReport {
    std::vector<ChannelBenchRow> rows;
    std::string to_csv() const;
};

// Runs every channel with real sealed-frame operations. samples medians of
// `samples` timings, each averaging `iters` iterations.
ChannelBenchReport run_channel_bench(std::uint64_t seed, int samples = 9,
                                     int iters = 32);

struct ScaleRow {
    int workers = 0;
    int tasks = 0;
    double modeled_makespan_ms = 0.0;
    double modeled_throughput = 0.0;  // tasks per modeled second
    double measured_ms = 0.0;         // full pipeline wall time
};

struct ScaleReport {
    std::vector<ScaleRow> rows;
    double r_squared = 0.0;  // linear fit of modeled throughput vs workers
    std::string to_csv() const;
};

// Weak-scaling sweep: N workers run 4N single-wave tasks; the model keeps
// per-worker load fixed, so modeled throughput grows linearly and the
// measured column tracks real pipeline runs.
ScaleReport run_scalability(std::uint64_t seed, int max_workers,
                            bool measure = true);

// Spearman rank correlation with tie-averaged ranks.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

// Coefficient of determination of the least-squares line through (x, y).
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qsc::perfmodel
