// Command-line front end. Exit codes: 0 success, 1 verification failure
// (broken ledger, campaign with misses or false alarms), 2 configuration
// error, 3 policy rejection, 4 cryptographic failure, 5 internal error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "qsc/adversary/adversary.hpp"
#include "qsc/audit/ledger.hpp"
#include "qsc/crypto/provider.hpp"
#include "qsc/error.hpp"
#include "qsc/perfmodel/perfmodel.hpp"
#include "qsc/policy/policy.hpp"
#include "qsc/scenario/scenario.hpp"

namespace {

int exit_code_for(qsc::ErrorCode c) {
    using EC = qsc::ErrorCode;
    switch (c) {
        case EC::ConfigError:
        case EC::MalformedRequest:
        case EC::CyclicDependency:
        case EC::NoCapableAgent:
            return 2;
        case EC::UnknownRegion:
        case EC::NoCompliantPosture:
        case EC::PolicyViolationError:
            return 3;
        case EC::UnknownAlgorithm:
        case EC::DecapsulationFailure:
        case EC::AuthenticationFailure:
        case EC::EmptyInput:
        case EC::CertificateInvalid:
        case EC::TeeAttestationFailed:
        case EC::UnknownLink:
        case EC::SignatureInvalid:
        case EC::ReplayDetected:
        case EC::MalformedFrame:
        case EC::SignatureMismatchError:
        case EC::EntropyReplayDetected:
        case EC::LedgerSealed:
        case EC::UnknownReplicaSite:
            return 4;
        case EC::MissingDependency:
        case EC::HandlerFailure:
        case EC::IncompleteResults:
        case EC::InternalError:
            return 5;
    }
    return 5;
}

// Seed precedence: --seed flag, then the QSC_SEED environment variable,
// then `base` (the scenario seed or the built-in default).
std::uint64_t effective_seed(const CLI::Option* opt, std::uint64_t flag_value,
                             std::uint64_t base) {
    if (opt != nullptr && opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("QSC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw qsc::Error(qsc::ErrorCode::ConfigError,
                             "QSC_SEED must be an unsigned integer");
        }
    }
    return base;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw qsc::Error(qsc::ErrorCode::ConfigError, "cannot write " + path);
    }
    out << content;
}

int do_run(const std::string& scenario_path, const CLI::Option* seed_opt,
           std::uint64_t seed_flag, const std::string& ledger_out) {
    auto sc = qsc::scenario::Scenario::load(scenario_path);
    sc.seed = effective_seed(seed_opt, seed_flag, sc.seed);
    auto outcome = qsc::scenario::run_scenario(sc, ledger_out);
    std::cout << outcome.response << "\n";
    std::cout << "graph_hash: " << outcome.graph_hash << "\n";
    std::cout << "ledger: " << outcome.ledger_records << " records, "
              << (outcome.ledger_ok ? "verified" : "BROKEN") << "\n";
    for (const auto& [type, count] : outcome.event_counts) {
        std::cout << "event " << type << ": " << count << "\n";
    }
    if (outcome.replica_records > 0) {
        std::cout << "replicated " << outcome.replica_records << " records"
                  << (outcome.replication_degraded ? " (degraded QKD)" : "")
                  << "\n";
    }
    if (!ledger_out.empty()) {
        std::cout << "ledger written to " << ledger_out << "\n";
    }
    return outcome.ledger_ok ? 0 : 1;
}

int do_bench_channels(std::uint64_t seed, int samples, int iters,
                      const std::string& out_path) {
    auto report = qsc::perfmodel::run_channel_bench(seed, samples, iters);
    auto csv = report.to_csv();
    std::vector<double> measured, reference;
    for (const auto& row : report.rows) {
        measured.push_back(row.time_ms);
        reference.push_back(row.profile.reference_ms);
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
        std::cout << "report written to " << out_path << "\n";
    }
    std::cout << "spearman(measured, reference) = "
              << qsc::perfmodel::spearman_rho(measured, reference) << "\n";
    return 0;
}

int do_bench_scale(std::uint64_t seed, int max_workers,
                   const std::string& out_path) {
    auto report = qsc::perfmodel::run_scalability(seed, max_workers, true);
    auto csv = report.to_csv();
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
        std::cout << "report written to " << out_path << "\n";
    }
    std::cout << "r_squared = " << report.r_squared << "\n";
    return 0;
}

int do_adversary(std::uint64_t seed, std::uint64_t tamper,
                 std::uint64_t replay, const std::string& out_path) {
    auto report = qsc::adversary::run_campaign(seed, tamper, replay);
    if (out_path.empty()) {
        std::cout << report.to_csv();
    } else {
        write_file(out_path, report.to_csv());
        std::cout << "campaign: " << report.tamper_total << " tamper + "
                  << report.replay_total << " replay, detection "
                  << report.detection_rate() * 100.0 << "%, "
                  << report.false_positives << " false positives; report "
                  << "written to " << out_path << "\n";
    }
    bool clean = report.security_failures == 0 &&
                 report.false_positives == 0 &&
                 report.detection_rate() == 1.0;
    return clean ? 0 : 1;
}

int do_audit_verify(const std::string& path) {
    auto suite =
        qsc::crypto::resolve_suite(qsc::crypto::register_simulation_suite());
    auto ledger = qsc::audit::AuditLedger::load(path, suite);
    auto report = ledger.verify();
    if (report.ok) {
        std::cout << "ok: " << ledger.size() << " records, chain intact\n";
        return 0;
    }
    std::cout << "BROKEN at record " << report.broken_at << ": "
              << report.reason << "\n";
    return 1;
}

int do_policy_check(const std::string& scenario_path) {
    auto sc = qsc::scenario::Scenario::load(scenario_path);
    sc.policy.weights.validate();
    sc.policy.matrix.validate();
    const auto& orch = sc.orchestrator();
    auto fiber = [&](const std::string& id) {
        for (const auto& [u, v] : sc.qkd_links) {
            if ((u == orch.id && v == id) || (u == id && v == orch.id)) {
                return true;
            }
        }
        return false;
    };
    for (const auto& actor : sc.actors) {
        if (actor.kind == qsc::session::ActorKind::ORCHESTRATOR) continue;
        bool qkd_available =
            orch.qkd_support && actor.qkd_support && fiber(actor.id);
        auto tier = qsc::policy::select_posture(
            sc.policy.weights, sc.policy.scores, sc.policy.matrix,
            orch.region, actor.region, qkd_available, sc.policy.min_tier);
        std::cout << orch.id << "<->" << actor.id << ": "
                  << qsc::policy::tier_name(tier) << "\n";
    }
    std::cout << "policy: all links compliant\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-secure multi-agent communication stack"};
    app.require_subcommand(1);

    std::string scenario_path = "data/scenario_basic.json";
    std::string ledger_out;
    std::uint64_t seed_flag = 7;

    auto* run_cmd = app.add_subcommand("run", "execute a scenario end to end");
    run_cmd->add_option("scenario", scenario_path, "scenario file")
        ->capture_default_str();
    auto* run_seed =
        run_cmd->add_option("--seed", seed_flag, "override the scenario seed");
    run_cmd->add_option("--ledger", ledger_out,
                        "write the sealed audit ledger to this file");

    auto* bench = app.add_subcommand("bench", "performance harness");
    bench->require_subcommand(1);

    int samples = 9;
    int iters = 32;
    std::string bench_out;
    auto* channels =
        bench->add_subcommand("channels", "time the seven channel profiles");
    auto* channels_seed =
        channels->add_option("--seed", seed_flag, "run seed");
    channels->add_option("--samples", samples, "timing samples per channel")
        ->capture_default_str();
    channels->add_option("--iters", iters, "iterations per sample")
        ->capture_default_str();
    channels->add_option("--out", bench_out, "write the CSV report here");

    int max_workers = 8;
    auto* scale = bench->add_subcommand(
        "scale", "weak-scaling sweep over worker counts");
    scale->add_option("--max-workers", max_workers, "largest worker count")
        ->required();
    auto* scale_seed = scale->add_option("--seed", seed_flag, "run seed");
    scale->add_option("--out", bench_out, "write the CSV report here");

    auto* adv = app.add_subcommand("adversary", "adversarial campaign");
    adv->require_subcommand(1);
    std::uint64_t tamper = 1000;
    std::uint64_t replay = 1000;
    std::string adv_out;
    auto* adv_run = adv->add_subcommand(
        "run", "flood a live session with tampered and replayed frames");
    adv_run->add_option("--tamper", tamper, "tampered frame count")
        ->capture_default_str();
    adv_run->add_option("--replay", replay, "replayed frame count")
        ->capture_default_str();
    auto* adv_seed = adv_run->add_option("--seed", seed_flag, "campaign seed");
    adv_run->add_option("--out", adv_out, "write the CSV report here");

    auto* audit_cmd = app.add_subcommand("audit", "audit ledger tools");
    audit_cmd->require_subcommand(1);
    std::string ledger_path;
    auto* verify = audit_cmd->add_subcommand(
        "verify", "verify a saved ledger's chain and signatures");
    verify->add_option("file", ledger_path, "ledger file")->required();

    auto* policy_cmd = app.add_subcommand("policy", "posture policy tools");
    policy_cmd->require_subcommand(1);
    std::string policy_scenario = "data/scenario_basic.json";
    auto* check = policy_cmd->add_subcommand(
        "check", "evaluate posture selection for every scenario link");
    check->add_option("scenario", policy_scenario, "scenario file")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) {
            return do_run(scenario_path, run_seed, seed_flag, ledger_out);
        }
        if (channels->parsed()) {
            return do_bench_channels(
                effective_seed(channels_seed, seed_flag, 7), samples, iters,
                bench_out);
        }
        if (scale->parsed()) {
            return do_bench_scale(effective_seed(scale_seed, seed_flag, 7),
                                  max_workers, bench_out);
        }
        if (adv_run->parsed()) {
            return do_adversary(effective_seed(adv_seed, seed_flag, 7),
                                tamper, replay, adv_out);
        }
        if (verify->parsed()) {
            return do_audit_verify(ledger_path);
        }
        if (check->parsed()) {
            return do_policy_check(policy_scenario);
        }
    } catch (const qsc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}
