#include "csmt/report.hpp"

namespace csmt {

io::json report_to_json(const VerificationReport& report) {
    io::json stages = io::json::array();
    for (const StageOutcome& s : report.stages) {
        stages.push_back(io::json{{"stage", s.name}, {"ok", s.ok}});
    }
    return io::json{{"command", report.command}, {"study_id", report.study_id},
                    {"tree", report.tree_label}, {"user_id", report.user_id},
                    {"verdict", report.verdict}, {"stages", stages},
                    {"detail", report.detail},   {"exit_code", report.exit_code}};
}

VerificationReport make_membership_report(const std::string& command, const std::string& study_id,
                                          const std::string& tree_label, const std::string& user_id,
                                          const MembershipReport& membership,
                                          MembershipVerdict expected) {
    VerificationReport report;
    report.command = command;
    report.study_id = study_id;
    report.tree_label = tree_label;
    report.user_id = user_id;
    report.stages = membership.stages;
    report.verdict = membership_verdict_name(membership.verdict);
    report.detail = membership.detail;
    report.exit_code = membership.verdict == expected ? 0 : 1;
    return report;
}

VerificationReport make_stat_report(const std::string& study_id, const std::string& user_id,
                                    const StatVerifyReport& stat) {
    VerificationReport report;
    report.command = "verify-stat";
    report.study_id = study_id;
    report.user_id = user_id;
    report.stages = stat.stages;
    report.verdict = stat.ok ? "verified" : "failed";
    report.detail = stat.detail;
    report.exit_code = stat.ok ? 0 : 1;
    return report;
}

VerificationReport make_audit_report(const std::string& study_id, const std::string& tree_label,
                                     const AuditOutcome& outcome) {
    VerificationReport report;
    report.command = "audit-exclusivity";
    report.study_id = study_id;
    report.tree_label = tree_label;
    report.stages.push_back({"data-exclusivity", outcome.ok()});
    report.verdict = audit_status_name(outcome.status);
    report.detail = outcome.detail;
    report.exit_code = outcome.ok() ? 0 : 1;
    return report;
}

} // namespace csmt
