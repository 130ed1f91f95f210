// csmtkit: command-line front end for the verifiable-statistics toolkit.
//
// Exit codes: 0 verified / succeeded, 1 verification failure, 2 operational
// error (usage problems, I/O, transport).

#include "csmt/client.hpp"
#include "csmt/errors.hpp"
#include "csmt/report.hpp"
#include "csmt/server.hpp"
#include "csmt/workspace.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace {

using csmt::io::json;

struct GlobalOptions {
    std::string home = "./csmtkit-home";
    unsigned scale = 8;
    unsigned height = 16;
    std::string api_token;
    std::string transforms_config;
};

csmt::WorkspaceConfig workspace_config(const GlobalOptions& global) {
    csmt::WorkspaceConfig config;
    config.home = global.home;
    config.scale = global.scale;
    config.tree_height = global.height;
    config.transforms_config = global.transforms_config;
    if (const char* key = std::getenv("CSMT_WITNESS_KEY")) {
        config.witness_key = csmt::from_hex(key);
    }
    return config;
}

csmt::Workspace open_workspace(const GlobalOptions& global) {
    return csmt::Workspace(workspace_config(global));
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (c == ',') {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const std::string& item : split_csv(text)) out.push_back(std::stod(item));
    return out;
}

std::vector<std::string> users_by_prefix(csmt::Workspace& ws, const std::string& prefix) {
    std::vector<std::string> out;
    for (const std::string& user : ws.phr().user_ids()) {
        if (user.rfind(prefix, 0) == 0) out.push_back(user);
    }
    return out;
}

std::vector<std::string> resolve_group(csmt::Workspace& ws, const std::string& list,
                                       const std::string& prefix) {
    if (!list.empty()) return split_csv(list);
    if (!prefix.empty()) return users_by_prefix(ws, prefix);
    csmt::raise(csmt::errc::bad_request, "either an explicit user list or a prefix is required");
}

void print_json(const json& j) { std::cout << j.dump(2) << std::endl; }

int print_report(const csmt::VerificationReport& report) {
    print_json(csmt::report_to_json(report));
    return report.exit_code;
}

/// Source of the study bundle for verification commands.
struct BundleSource {
    std::string server;
    std::string bundle_dir;

    bool remote() const { return !server.empty(); }
    bool offline() const { return !bundle_dir.empty(); }
};

csmt::StudyBundle load_bundle(const BundleSource& source, const GlobalOptions& global,
                              const std::string& study_id,
                              std::optional<csmt::Workspace>& workspace) {
    if (source.offline()) {
        return csmt::StudyStore::read_bundle_dir(source.bundle_dir);
    }
    if (source.remote()) {
        csmt::HttpServiceClient client(source.server, global.api_token);
        return csmt::StudyStore::bundle_from_files(client.download_artifacts(study_id));
    }
    workspace.emplace(workspace_config(global));
    return workspace->studies().read_bundle(study_id);
}

csmt::MembershipReport check_membership(const BundleSource& source, const GlobalOptions& global,
                                        const csmt::StudyBundle& bundle,
                                        std::optional<csmt::Workspace>& workspace,
                                        const std::string& study_id, const std::string& tree_label,
                                        const std::string& user_id) {
    const csmt::MembershipContext ctx = bundle.membership_context(user_id, tree_label);
    if (source.offline()) {
        const csmt::BundleTree& tree = bundle.tree(tree_label);
        auto stored = tree.proof_sets.find(user_id);
        if (stored == tree.proof_sets.end()) {
            csmt::raise(csmt::errc::not_found, "bundle has no stored proof set for '" + user_id + "'");
        }
        return csmt::verify_stored_proof_set(ctx, stored->second, tree.eta);
    }
    const csmt::Bytes eta = csmt::random_bytes(16);
    if (source.remote()) {
        csmt::HttpServiceClient client(source.server, global.api_token);
        csmt::HttpProverClient prover(client, study_id, tree_label);
        return csmt::run_membership_check(ctx, prover, eta);
    }
    const csmt::BundleTree& tree = bundle.tree(tree_label);
    csmt::LocalProverClient prover(workspace->prover(), ctx.vk_ltr, ctx.vk_mrp, tree.root,
                                   ctx.tree_height);
    return csmt::run_membership_check(ctx, prover, eta);
}

std::atomic<bool> g_stop{false};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse computational Merkle trees with inclusion/exclusion proofs "
                 "for verifiable cohort statistics"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--home", global.home, "State directory")->envname("CSMT_HOME");
    app.add_option("--scale", global.scale, "Fixed-point scale (2^-scale resolution)")
        ->envname("ZKP_SCALER");
    app.add_option("--height", global.height, "Tree height K")->envname("TREE_HEIGHT");
    app.add_option("--api-token", global.api_token, "Static service API token")
        ->envname("CSMT_API_TOKEN");
    app.add_option("--transforms-config", global.transforms_config,
                   "Declarative transform/aggregator config file (JSON)");

    int exit_code = 0;

    // --- phr ---------------------------------------------------------------
    auto* phr = app.add_subcommand("phr", "Personal-health-record store operations");
    phr->require_subcommand(1);

    std::string reg_user, reg_data;
    auto* phr_register = phr->add_subcommand("register", "Register a record with fresh salts");
    phr_register->add_option("--user", reg_user, "User id")->required();
    phr_register->add_option("--data", reg_data, "Comma-separated datum values")->required();
    phr_register->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        const csmt::PhrEntry entry = ws.phr().register_record(reg_user, parse_doubles(reg_data));
        ws.save();
        print_json(json{{"user_id", entry.user_id},
                        {"h_raw", entry.h_raw.hex()},
                        {"h_tau", entry.h_tau.hex()},
                        {"phr_root", ws.phr().root().hex()}});
    });

    std::string prove_user, prove_h_raw, prove_h_tau;
    auto* phr_prove = phr->add_subcommand("prove", "Produce a PHR membership audit path");
    phr_prove->add_option("--user", prove_user, "Registered user id");
    phr_prove->add_option("--h-raw", prove_h_raw, "Record digest (hex)");
    phr_prove->add_option("--h-tau", prove_h_tau, "Transform-salt digest (hex)");
    phr_prove->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        csmt::Digest256 h_raw, h_tau;
        if (!prove_user.empty()) {
            const csmt::PhrEntry& entry = ws.phr().entry(prove_user);
            h_raw = entry.h_raw;
            h_tau = entry.h_tau;
        } else if (!prove_h_raw.empty() && !prove_h_tau.empty()) {
            h_raw = csmt::Digest256::from_hex(prove_h_raw);
            h_tau = csmt::Digest256::from_hex(prove_h_tau);
        } else {
            csmt::raise(csmt::errc::bad_request, "pass --user or both --h-raw and --h-tau");
        }
        print_json(csmt::io::audit_path_to_json(ws.phr().prove_membership(h_raw, h_tau)));
    });

    // --- gen ----------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Synthetic data generation");
    gen->require_subcommand(1);

    std::uint64_t gen_seed = 7;
    std::string gen_out = ".";
    bool gen_register = false;
    auto* gen_hd = gen->add_subcommand("hd-cohorts", "Two 50-person CAG-repeat cohorts");
    gen_hd->add_option("--seed", gen_seed, "Deterministic cohort seed");
    gen_hd->add_option("--out", gen_out, "Output directory for CSV files");
    gen_hd->add_flag("--register", gen_register, "Also register everyone in the PHR store");
    gen_hd->callback([&] {
        const csmt::HdCohorts cohorts = csmt::generate_hd_cohorts(gen_seed);
        std::filesystem::create_directories(gen_out);
        auto write_csv = [&](const std::string& name, const std::vector<csmt::CohortRecord>& rows) {
            std::ofstream out(std::filesystem::path(gen_out) / name, std::ios::trunc);
            out << "user_id,cag\n";
            for (const csmt::CohortRecord& r : rows) out << r.user_id << "," << r.value << "\n";
        };
        write_csv("healthy.csv", cohorts.healthy);
        write_csv("hd.csv", cohorts.hd);
        if (gen_register) {
            csmt::Workspace ws = open_workspace(global);
            for (const auto* group : {&cohorts.healthy, &cohorts.hd}) {
                for (const csmt::CohortRecord& r : *group) {
                    if (!ws.phr().has_user(r.user_id)) {
                        ws.phr().register_record(r.user_id, {r.value});
                    }
                }
            }
            ws.save();
        }
        print_json(json{{"seed", gen_seed},
                        {"healthy", cohorts.healthy.size()},
                        {"hd", cohorts.hd.size()},
                        {"registered", gen_register}});
    });

    // --- study build ---------------------------------------------------------
    auto* study = app.add_subcommand("study", "Study construction");
    study->require_subcommand(1);

    std::string sb_study, sb_tree = "main", sb_kind, sb_params, sb_include, sb_include_prefix,
                sb_users;
    unsigned sb_input_dim = 1;
    auto* study_build = study->add_subcommand("build", "Build and publish a single-tree study");
    study_build->add_option("--study", sb_study, "Study id")->required();
    study_build->add_option("--tree", sb_tree, "Tree label");
    study_build->add_option("--transform-kind", sb_kind,
                            "identity|bincount|loglik|classassess|count_one")->required();
    study_build->add_option("--params", sb_params, "Transform parameters (bin edges, coefficients)");
    study_build->add_option("--input-dim", sb_input_dim, "Record dimension");
    study_build->add_option("--include", sb_include, "Included users (comma list)");
    study_build->add_option("--include-prefix", sb_include_prefix, "Included users by id prefix");
    study_build->add_option("--users", sb_users, "Cohort user set (default: every PHR user)");
    study_build->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        json request{{"study_id", sb_study},
                     {"tree", sb_tree},
                     {"scale", global.scale},
                     {"height", global.height},
                     {"include", resolve_group(ws, sb_include, sb_include_prefix)}};
        json transform{{"kind", sb_kind}, {"input_dim", sb_input_dim}};
        if (!sb_params.empty()) transform["params"] = parse_doubles(sb_params);
        request["transform"] = transform;
        if (!sb_users.empty()) request["users"] = split_csv(sb_users);
        print_json(ws.build_generic_study(request));
    });

    // --- prove ---------------------------------------------------------------
    auto* prove = app.add_subcommand("prove", "CRO-side proof generation");
    prove->require_subcommand(1);

    std::string pl_study, pl_tree = "main", pl_h_raw, pl_h_tau;
    auto* prove_ltr = prove->add_subcommand("ltr", "Leaf-transform proof");
    prove_ltr->add_option("--study", pl_study, "Study id")->required();
    prove_ltr->add_option("--tree", pl_tree, "Tree label");
    prove_ltr->add_option("--h-raw", pl_h_raw, "Record digest (hex)")->required();
    prove_ltr->add_option("--h-tau", pl_h_tau, "Transform-salt digest (hex)")->required();
    prove_ltr->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        print_json(ws.execute(csmt::JobKind::ltr, json{{"study_id", pl_study},
                                                       {"tree", pl_tree},
                                                       {"h_raw", pl_h_raw},
                                                       {"h_tau", pl_h_tau}}));
    });

    std::string pm_study, pm_tree = "main", pm_h_leaf, pm_nonce;
    std::uint64_t pm_index = 0;
    auto* prove_mrp = prove->add_subcommand("mrp", "Per-hop Merkle path proofs");
    prove_mrp->add_option("--study", pm_study, "Study id")->required();
    prove_mrp->add_option("--tree", pm_tree, "Tree label");
    prove_mrp->add_option("--h-leaf", pm_h_leaf, "Leaf digest (hex)")->required();
    prove_mrp->add_option("--index", pm_index, "Derived leaf index")->required();
    prove_mrp->add_option("--nonce", pm_nonce, "Verifier session nonce (16-byte hex)")->required();
    prove_mrp->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        print_json(ws.execute(csmt::JobKind::mrp, json{{"study_id", pm_study},
                                                       {"tree", pm_tree},
                                                       {"h_leaf", pm_h_leaf},
                                                       {"index", pm_index},
                                                       {"eta", pm_nonce}}));
    });

    // --- pipeline ------------------------------------------------------------
    auto* pipeline = app.add_subcommand("pipeline", "End-to-end statistical pipelines");
    pipeline->require_subcommand(1);

    // precedence for pipeline parameters: explicit flags, then the config
    // file, then global defaults
    auto base_request = [&](const std::string& config_file, const std::string& study) {
        json request = config_file.empty() ? json::object()
                                           : csmt::io::read_json_file(config_file);
        if (!study.empty()) request["study_id"] = study;
        if (app.count("--scale") || !request.contains("scale")) request["scale"] = global.scale;
        if (app.count("--height") || !request.contains("height")) request["height"] = global.height;
        if (!request.contains("study_id")) {
            csmt::raise(csmt::errc::bad_request, "a study id is required (--study or config file)");
        }
        return request;
    };

    std::string ks_study, ks_bins, ks_a, ks_a_prefix, ks_b, ks_b_prefix, ks_config;
    auto* pipe_ks = pipeline->add_subcommand("ks", "Two-sample KS max-gap study");
    pipe_ks->add_option("--study", ks_study, "Study id");
    pipe_ks->add_option("--config", ks_config, "Pipeline config file (JSON)");
    pipe_ks->add_option("--bins", ks_bins, "Bin edges (default: 12 bins over [0,132])");
    pipe_ks->add_option("--group-a", ks_a, "Group A users (comma list)");
    pipe_ks->add_option("--group-a-prefix", ks_a_prefix, "Group A by user-id prefix");
    pipe_ks->add_option("--group-b", ks_b, "Group B users (comma list)");
    pipe_ks->add_option("--group-b-prefix", ks_b_prefix, "Group B by user-id prefix");
    pipe_ks->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        json request = base_request(ks_config, ks_study);
        if (!ks_bins.empty()) request["bins"] = parse_doubles(ks_bins);
        if (!ks_a.empty() || !ks_a_prefix.empty()) {
            request["group_a"] = resolve_group(ws, ks_a, ks_a_prefix);
        }
        if (!ks_b.empty() || !ks_b_prefix.empty()) {
            request["group_b"] = resolve_group(ws, ks_b, ks_b_prefix);
        }
        print_json(ws.execute(csmt::JobKind::pipeline_ks, request));
    });

    std::string lrt_study, lrt_full, lrt_reduced, lrt_cohort, lrt_prefix, lrt_config;
    auto* pipe_lrt = pipeline->add_subcommand("lrt", "Logistic likelihood-ratio study");
    pipe_lrt->add_option("--study", lrt_study, "Study id");
    pipe_lrt->add_option("--config", lrt_config, "Pipeline config file (JSON)");
    pipe_lrt->add_option("--beta-full", lrt_full, "Full-model coefficients (intercept first)");
    pipe_lrt->add_option("--beta-reduced", lrt_reduced,
                         "Reduced-model coefficients (dropped terms zero)");
    pipe_lrt->add_option("--cohort", lrt_cohort, "Cohort users (comma list)");
    pipe_lrt->add_option("--cohort-prefix", lrt_prefix, "Cohort by user-id prefix");
    pipe_lrt->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        json request = base_request(lrt_config, lrt_study);
        if (!lrt_full.empty()) request["beta_full"] = parse_doubles(lrt_full);
        if (!lrt_reduced.empty()) request["beta_reduced"] = parse_doubles(lrt_reduced);
        if (!lrt_cohort.empty() || !lrt_prefix.empty()) {
            request["cohort"] = resolve_group(ws, lrt_cohort, lrt_prefix);
        }
        print_json(ws.execute(csmt::JobKind::pipeline_lrt, request));
    });

    std::string acc_study, acc_beta, acc_cohort, acc_prefix, acc_config;
    auto* pipe_acc = pipeline->add_subcommand("acc", "Logistic accuracy study");
    pipe_acc->add_option("--study", acc_study, "Study id");
    pipe_acc->add_option("--config", acc_config, "Pipeline config file (JSON)");
    pipe_acc->add_option("--beta", acc_beta, "Model coefficients (intercept first)");
    pipe_acc->add_option("--cohort", acc_cohort, "Test cohort users (comma list)");
    pipe_acc->add_option("--cohort-prefix", acc_prefix, "Test cohort by user-id prefix");
    pipe_acc->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        json request = base_request(acc_config, acc_study);
        if (!acc_beta.empty()) request["beta"] = parse_doubles(acc_beta);
        if (!acc_cohort.empty() || !acc_prefix.empty()) {
            request["cohort"] = resolve_group(ws, acc_cohort, acc_prefix);
        }
        print_json(ws.execute(csmt::JobKind::pipeline_acc, request));
    });

    // --- verify ---------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "Public verification");
    verify->require_subcommand(1);

    BundleSource v_source;
    std::string v_study, v_tree, v_user;
    auto add_verify_common = [&](CLI::App* cmd, bool need_tree) {
        cmd->add_option("--study", v_study, "Study id")->required();
        if (need_tree) cmd->add_option("--tree", v_tree, "Tree label")->required();
        cmd->add_option("--server", v_source.server, "Verify against a running service");
        cmd->add_option("--bundle", v_source.bundle_dir, "Verify offline from a downloaded bundle");
    };

    auto* verify_include = verify->add_subcommand("include", "Verify a user's inclusion proof");
    add_verify_common(verify_include, true);
    verify_include->add_option("--user", v_user, "User id")->required();
    verify_include->callback([&] {
        std::optional<csmt::Workspace> ws;
        const csmt::StudyBundle bundle = load_bundle(v_source, global, v_study, ws);
        const csmt::MembershipReport membership =
            check_membership(v_source, global, bundle, ws, v_study, v_tree, v_user);
        exit_code = print_report(csmt::make_membership_report(
            "verify-include", v_study, v_tree, v_user, membership, csmt::MembershipVerdict::included));
    });

    auto* verify_exclude = verify->add_subcommand("exclude", "Verify a user's exclusion proof");
    add_verify_common(verify_exclude, true);
    verify_exclude->add_option("--user", v_user, "User id")->required();
    verify_exclude->callback([&] {
        std::optional<csmt::Workspace> ws;
        const csmt::StudyBundle bundle = load_bundle(v_source, global, v_study, ws);
        const csmt::MembershipReport membership =
            check_membership(v_source, global, bundle, ws, v_study, v_tree, v_user);
        exit_code = print_report(csmt::make_membership_report(
            "verify-exclude", v_study, v_tree, v_user, membership, csmt::MembershipVerdict::excluded));
    });

    auto* verify_stat = verify->add_subcommand("stat", "Verify a published statistic");
    add_verify_common(verify_stat, false);
    verify_stat->add_option("--user", v_user, "Sampled user (default: first included)");
    verify_stat->callback([&] {
        std::optional<csmt::Workspace> ws;
        const csmt::StudyBundle bundle = load_bundle(v_source, global, v_study, ws);
        if (!bundle.result) {
            csmt::raise(csmt::errc::not_found, "study '" + v_study + "' has no statistic result");
        }

        // published record: ask the live bulletin when online, otherwise the
        // bundle's copy
        csmt::BulletinRecord published = bundle.bulletin;
        if (v_source.remote()) {
            csmt::HttpServiceClient client(v_source.server, global.api_token);
            for (const json& r : client.bulletin().at("records")) {
                const csmt::BulletinRecord rec = csmt::io::bulletin_record_from_json(r);
                if (rec.study_id == v_study) published = rec;
            }
        }
        const std::string sample_tree = bundle.trees.front().label;
        const std::string sample_user =
            v_user.empty() ? bundle.tree(sample_tree).included_users.front() : v_user;
        const csmt::MembershipReport membership =
            check_membership(v_source, global, bundle, ws, v_study, sample_tree, sample_user);
        const csmt::StatVerifyReport stat =
            csmt::stat_verify(*bundle.result, published, bundle.vk("post"), membership);
        exit_code = print_report(csmt::make_stat_report(v_study, sample_user, stat));
    });

    // --- audit -----------------------------------------------------------------
    auto* audit = app.add_subcommand("audit", "Regulatory audits");
    audit->require_subcommand(1);

    BundleSource a_source;
    std::string a_study, a_tree;
    auto* audit_ex = audit->add_subcommand("exclusivity", "Data-exclusivity audit of one tree");
    audit_ex->add_option("--study", a_study, "Study id")->required();
    audit_ex->add_option("--tree", a_tree, "Tree label")->required();
    audit_ex->add_option("--server", a_source.server, "Audit a study hosted by a running service");
    audit_ex->add_option("--bundle", a_source.bundle_dir, "Audit offline from a downloaded bundle");
    audit_ex->callback([&] {
        std::optional<csmt::Workspace> ws;
        const csmt::StudyBundle bundle = load_bundle(a_source, global, a_study, ws);
        const csmt::AuditBundle audit_bundle = csmt::audit_bundle_from_study(bundle, a_tree);
        const csmt::Registry registry = bundle.build_registry();
        const csmt::TreeConfig config{bundle.height(), bundle.tree(a_tree).transform_id,
                                      csmt::kSumAggregatorId, bundle.scale()};
        const csmt::AuditOutcome outcome = csmt::verify_data_exclusivity(
            audit_bundle, bundle.vk("ltr-" + a_tree), bundle.vk("mrp"),
            csmt::default_level_digests(registry, config));
        exit_code = print_report(csmt::make_audit_report(a_study, a_tree, outcome));
    });

    // --- download ----------------------------------------------------------------
    std::string dl_study, dl_server, dl_out;
    auto* download = app.add_subcommand("download", "Download a study's artifact bundle");
    download->add_option("--study", dl_study, "Study id")->required();
    download->add_option("--server", dl_server, "Service base URL")->required();
    download->add_option("--out", dl_out, "Target directory")->required();
    download->callback([&] {
        csmt::HttpServiceClient client(dl_server, global.api_token);
        const auto files = client.download_artifacts(dl_study);
        for (const auto& [rel, content] : files) {
            const std::filesystem::path target = std::filesystem::path(dl_out) / rel;
            std::filesystem::create_directories(target.parent_path());
            csmt::io::write_json_file(target, content);
        }
        print_json(json{{"study_id", dl_study}, {"files", files.size()}, {"out", dl_out}});
    });

    // --- serve ----------------------------------------------------------------
    std::string serve_host = "127.0.0.1";
    int serve_port = 5012;
    unsigned serve_workers = 4;
    auto* serve = app.add_subcommand("serve", "Run the job-based prover service");
    serve->add_option("--host", serve_host, "Bind address");
    serve->add_option("--port", serve_port, "Port (0 = ephemeral)");
    serve->add_option("--workers", serve_workers, "Worker pool size");
    serve->callback([&] {
        csmt::Workspace ws = open_workspace(global);
        csmt::ServiceConfig config;
        config.host = serve_host;
        config.port = serve_port;
        config.workers = serve_workers;
        config.api_token = global.api_token;
        csmt::Service service(ws, config);
        service.start();
        std::cout << json{{"listening", service.base_url()}}.dump() << std::endl;
        std::signal(SIGINT, [](int) { g_stop = true; });
        std::signal(SIGTERM, [](int) { g_stop = true; });
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage errors are operational errors
    } catch (const csmt::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return exit_code;
}
