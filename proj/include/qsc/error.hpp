#pragma once

// Typed error vocabulary for the whole stack. Every failure path throws
// qsc::Error carrying one of these codes; the CLI maps code classes onto
// process exit codes and the adversarial campaign uses code_name() as the
// classification key.

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsc {

enum class ErrorCode {
    // crypto primitives
    UnknownAlgorithm,
    DecapsulationFailure,
    AuthenticationFailure,
    EmptyInput,
    // policy
    UnknownRegion,
    NoCompliantPosture,
    // session establishment
    CertificateInvalid,
    TeeAttestationFailed,
    UnknownLink,
    // sealed messaging
    SignatureInvalid,
    ReplayDetected,
    MalformedFrame,
    // task graph
    CyclicDependency,
    NoCapableAgent,
    MalformedRequest,
    // orchestration
    MissingDependency,
    HandlerFailure,
    SignatureMismatchError,
    EntropyReplayDetected,
    IncompleteResults,
    PolicyViolationError,
    // audit
    LedgerSealed,
    UnknownReplicaSite,
    // configuration / catch-all
    ConfigError,
    InternalError,
};

constexpr std::string_view code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::UnknownAlgorithm: return "UnknownAlgorithm";
        case ErrorCode::DecapsulationFailure: return "DecapsulationFailure";
        case ErrorCode::AuthenticationFailure: return "AuthenticationFailure";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::UnknownRegion: return "UnknownRegion";
        case ErrorCode::NoCompliantPosture: return "NoCompliantPosture";
        case ErrorCode::CertificateInvalid: return "CertificateInvalid";
        case ErrorCode::TeeAttestationFailed: return "TeeAttestationFailed";
        case ErrorCode::UnknownLink: return "UnknownLink";
        case ErrorCode::SignatureInvalid: return "SignatureInvalid";
        case ErrorCode::ReplayDetected: return "ReplayDetected";
        case ErrorCode::MalformedFrame: return "MalformedFrame";
        case ErrorCode::CyclicDependency: return "CyclicDependency";
        case ErrorCode::NoCapableAgent: return "NoCapableAgent";
        case ErrorCode::MalformedRequest: return "MalformedRequest";
        case ErrorCode::MissingDependency: return "MissingDependency";
        case ErrorCode::HandlerFailure: return "HandlerFailure";
        case ErrorCode::SignatureMismatchError: return "SignatureMismatchError";
        case ErrorCode::EntropyReplayDetected: return "EntropyReplayDetected";
        case ErrorCode::IncompleteResults: return "IncompleteResults";
        case ErrorCode::PolicyViolationError: return "PolicyViolationError";
        case ErrorCode::LedgerSealed: return "LedgerSealed";
        case ErrorCode::UnknownReplicaSite: return "UnknownReplicaSite";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::InternalError: return "InternalError";
    }
    return "InternalError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(code_name(code)) + ": " + what),
          code_(code) {}

    ErrorCode code() const { return code_; }
    std::string_view name() const { return code_name(code_); }

private:
    ErrorCode code_;
};

}  // namespace qsc
