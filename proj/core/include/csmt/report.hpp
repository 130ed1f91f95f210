#pragma once

#include "csmt/exclusivity.hpp"
#include "csmt/json_io.hpp"
#include "csmt/stats.hpp"
#include "csmt/verifier.hpp"

#include <string>

namespace csmt {

/// Machine-readable verification report printed by the CLI. Contains only
/// run-independent fields so online and offline verification of the same
/// study produce byte-identical output.
struct VerificationReport {
    std::string command;
    std::string study_id;
    std::string tree_label;
    std::string user_id;
    std::string verdict;
    std::vector<StageOutcome> stages;
    std::string detail;
    int exit_code = 1; // 0 verified, 1 verification failure
};

io::json report_to_json(const VerificationReport& report);

VerificationReport make_membership_report(const std::string& command, const std::string& study_id,
                                          const std::string& tree_label, const std::string& user_id,
                                          const MembershipReport& membership,
                                          MembershipVerdict expected);

VerificationReport make_stat_report(const std::string& study_id, const std::string& user_id,
                                    const StatVerifyReport& stat);

VerificationReport make_audit_report(const std::string& study_id, const std::string& tree_label,
                                     const AuditOutcome& outcome);

} // namespace csmt
