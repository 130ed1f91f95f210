#include "csmt/client.hpp"
#include "csmt/errors.hpp"
#include "csmt/server.hpp"
#include "csmt/workspace.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <thread>

using namespace csmt;
using io::json;

namespace {

std::filesystem::path fresh_home(const std::string& tag) {
    const auto home = std::filesystem::temp_directory_path() /
                      ("csmt_test_" + tag + "_" + to_hex(random_bytes(6)));
    std::filesystem::create_directories(home);
    return home;
}

void register_demo_cohorts(Workspace& ws, int per_group) {
    for (int i = 0; i < per_group; ++i) {
        ws.phr().register_record("a" + std::to_string(i), {double(3 + i % 7)});
        ws.phr().register_record("b" + std::to_string(i), {double(31 + i % 7)});
    }
    ws.save();
}

json ks_request(int per_group) {
    std::vector<std::string> a, b;
    for (int i = 0; i < per_group; ++i) {
        a.push_back("a" + std::to_string(i));
        b.push_back("b" + std::to_string(i));
    }
    return json{{"study_id", "svc-ks"},
                {"scale", 8},
                {"height", 12},
                {"bins", json::array({0, 10, 20, 30, 40, 50})},
                {"group_a", a},
                {"group_b", b}};
}

} // namespace

TEST_SUITE_BEGIN("service");

TEST_CASE("job queue runs work and reports monotone status transitions") {
    JobQueue queue(2, [](JobKind kind, const json& request) {
        if (kind == JobKind::audit) throw Error(errc::not_built, "nothing to audit");
        json out = request;
        out["done"] = true;
        return out;
    });
    const std::string ok_id = queue.submit(JobKind::ltr, json{{"x", 1}});
    const ProofJob ok = queue.wait(ok_id);
    CHECK(ok.status == JobStatus::done);
    CHECK(ok.result.at("done").get<bool>());

    const std::string bad_id = queue.submit(JobKind::audit, json::object());
    const ProofJob bad = queue.wait(bad_id);
    CHECK(bad.status == JobStatus::failed);
    CHECK(bad.error.find("not-built") != std::string::npos);

    CHECK_THROWS_AS(queue.status("definitely-not-a-job"), Error);
}

TEST_CASE("workspace persists state across reopen") {
    const auto home = fresh_home("persist");
    {
        WorkspaceConfig config;
        config.home = home;
        Workspace ws(config);
        register_demo_cohorts(ws, 4);
        ws.execute(JobKind::pipeline_ks, ks_request(4));
    }
    {
        WorkspaceConfig config;
        config.home = home;
        Workspace ws(config);
        CHECK(ws.phr().size() == 8);
        CHECK(ws.bulletin().find("svc-ks") != nullptr);
        CHECK(ws.studies().has_study("svc-ks"));

        // proving still works after reload (keys and witnesses persisted)
        const StudyBundle bundle = ws.studies().read_bundle("svc-ks");
        const DeliveryRecord& d = bundle.tree("group-a").deliveries.front();
        const json reply = ws.execute(
            JobKind::ltr, json{{"study_id", "svc-ks"}, {"tree", "group-a"},
                               {"h_raw", d.h_raw.hex()}, {"h_tau", d.h_tau.hex()}});
        CHECK(reply.contains("artifact"));
    }
    std::filesystem::remove_all(home);
}

TEST_CASE("mrp submission before any build fails with not-built") {
    const auto home = fresh_home("notbuilt");
    WorkspaceConfig config;
    config.home = home;
    Workspace ws(config);
    register_demo_cohorts(ws, 2);

    Service service(ws, ServiceConfig{"127.0.0.1", 0, 2, ""});
    service.start();
    HttpServiceClient client(service.base_url());

    const json submitted = client.post_json(
        "/jobs", json{{"kind", "mrp"},
                      {"payload", json{{"study_id", "ghost"},
                                       {"tree", "main"},
                                       {"h_leaf", std::string(64, 'a')},
                                       {"index", 0},
                                       {"eta", std::string(32, 'b')}}}});
    const std::string job_id = submitted.at("job_id").get<std::string>();
    json status;
    do {
        status = client.get_json("/jobs/" + job_id);
    } while (status.at("status") == "queued" || status.at("status") == "running");
    CHECK(status.at("status") == "failed");

    service.stop();
    std::filesystem::remove_all(home);
}

TEST_CASE("HTTP round trip: pipeline job, bulletin, artifact download, idempotent fetch") {
    const auto home = fresh_home("http");
    WorkspaceConfig config;
    config.home = home;
    Workspace ws(config);
    register_demo_cohorts(ws, 4);

    Service service(ws, ServiceConfig{"127.0.0.1", 0, 3, ""});
    service.start();
    HttpServiceClient client(service.base_url());

    const json result = client.submit_and_wait("pipeline_ks", ks_request(4));
    CHECK(result.at("study_id") == "svc-ks");
    CHECK(result.at("decoded").get<double>() == 1.0); // disjoint cohorts

    const json bulletin = client.bulletin();
    REQUIRE(bulletin.at("records").size() == 1);
    CHECK(bulletin.at("records")[0].at("study_id") == "svc-ks");

    const auto files = client.download_artifacts("svc-ks");
    CHECK(files.count("bulletin.json") == 1);
    CHECK(files.count("settings.json") == 1);
    CHECK(files.count("result.json") == 1);
    CHECK(files.count("keys/vk-mrp.json") == 1);

    // re-download is byte-identical
    const auto files2 = client.download_artifacts("svc-ks");
    CHECK(files == files2);

    // unknown study
    CHECK_THROWS_AS(client.download_artifacts("nope"), Error);

    service.stop();
    std::filesystem::remove_all(home);
}

TEST_CASE("16 concurrent proof jobs match sequential execution") {
    const auto home = fresh_home("conc");
    WorkspaceConfig config;
    config.home = home;
    Workspace ws(config);
    register_demo_cohorts(ws, 8);
    ws.execute(JobKind::pipeline_ks, ks_request(8));

    const StudyBundle bundle = ws.studies().read_bundle("svc-ks");
    const BundleTree& tree = bundle.tree("group-a");

    // sequential references
    std::vector<json> expected;
    for (int i = 0; i < 16; ++i) {
        const DeliveryRecord& d = tree.deliveries[std::size_t(i) % tree.deliveries.size()];
        expected.push_back(ws.execute(
            JobKind::ltr, json{{"study_id", "svc-ks"}, {"tree", "group-a"},
                               {"h_raw", d.h_raw.hex()}, {"h_tau", d.h_tau.hex()}}));
    }

    Service service(ws, ServiceConfig{"127.0.0.1", 0, 4, ""});
    service.start();
    HttpServiceClient client(service.base_url());

    std::vector<std::string> job_ids(16);
    std::vector<std::thread> submitters;
    for (int i = 0; i < 16; ++i) {
        submitters.emplace_back([&, i] {
            const DeliveryRecord& d = tree.deliveries[std::size_t(i) % tree.deliveries.size()];
            const json submitted = client.post_json(
                "/jobs",
                json{{"kind", "ltr"},
                     {"payload", json{{"study_id", "svc-ks"}, {"tree", "group-a"},
                                      {"h_raw", d.h_raw.hex()}, {"h_tau", d.h_tau.hex()}}}});
            job_ids[std::size_t(i)] = submitted.at("job_id").get<std::string>();
        });
    }
    for (std::thread& t : submitters) t.join();

    for (int i = 0; i < 16; ++i) {
        json status;
        do {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            status = client.get_json("/jobs/" + job_ids[std::size_t(i)]);
        } while (status.at("status") == "queued" || status.at("status") == "running");
        REQUIRE(status.at("status") == "done");
        json result = client.get_json("/jobs/" + job_ids[std::size_t(i)] + "/result");
        result.erase("_status");
        CHECK(result == expected[std::size_t(i)]);
    }

    service.stop();
    std::filesystem::remove_all(home);
}

TEST_CASE("bulletin records are signed, append-only, and tamper-evident") {
    const BulletinSigner signer = BulletinSigner::generate();
    BulletinRecord record;
    record.study_id = "sig-test";
    record.roots = {{"main", hash_node(Bytes{1})}};
    record.vk_fingerprints = {{"mrp", hash_node(Bytes{2})}};
    record.phr_root = hash_node(Bytes{3});
    record.timestamp = "2026-01-01T00:00:00Z";
    sign_bulletin_record(record, signer);
    CHECK(verify_bulletin_record(record));

    BulletinRecord tampered = record;
    tampered.study_id = "sig-test-2";
    CHECK(!verify_bulletin_record(tampered));
    tampered = record;
    tampered.signature[10] ^= 0x01;
    CHECK(!verify_bulletin_record(tampered));

    BulletinLog log;
    log.publish(record);
    CHECK_THROWS_AS(log.publish(record), Error); // immutable once published

    const auto path = std::filesystem::temp_directory_path() /
                      ("csmt_bulletin_" + to_hex(random_bytes(4)) + ".jsonl");
    log.save(path);
    const BulletinLog loaded = BulletinLog::load(path);
    REQUIRE(loaded.records().size() == 1);
    CHECK(loaded.records()[0] == record);
    CHECK(verify_bulletin_record(loaded.records()[0]));
    std::filesystem::remove(path);
}

TEST_CASE("static API token gates every endpoint when configured") {
    const auto home = fresh_home("token");
    WorkspaceConfig config;
    config.home = home;
    Workspace ws(config);

    ServiceConfig svc;
    svc.port = 0;
    svc.api_token = "sekrit";
    Service service(ws, svc);
    service.start();

    HttpServiceClient anonymous(service.base_url());
    CHECK_THROWS_AS(anonymous.bulletin(), Error);
    HttpServiceClient authed(service.base_url(), "sekrit");
    CHECK(authed.bulletin().contains("records"));

    service.stop();
    std::filesystem::remove_all(home);
}

TEST_SUITE_END();
