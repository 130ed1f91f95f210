#include "csmt/server.hpp"

#include "csmt/errors.hpp"

#include <httplib.h>

namespace csmt {

using io::json;

struct Service::Impl {
    httplib::Server server;
};

Service::Service(Workspace& workspace, ServiceConfig config)
    : workspace_(workspace), config_(std::move(config)), impl_(std::make_unique<Impl>()) {
    queue_ = std::make_unique<JobQueue>(config_.workers,
                                        [this](JobKind kind, const json& request) {
                                            return run_job(kind, request);
                                        });
}

Service::~Service() { stop(); }

std::string Service::base_url() const {
    return "http://" + config_.host + ":" + std::to_string(bound_port_);
}

io::json Service::run_job(JobKind kind, const io::json& request) {
    // pipelines, builds and audits mutate workspace state; proof generation
    // only reads the immutable built trees
    if (kind == JobKind::ltr || kind == JobKind::mrp) {
        std::shared_lock lock(workspace_.state_mutex());
        return workspace_.execute(kind, request);
    }
    std::unique_lock lock(workspace_.state_mutex());
    return workspace_.execute(kind, request);
}

void Service::start() {
    httplib::Server& server = impl_->server;

    auto authorized = [this](const httplib::Request& req, httplib::Response& res) {
        if (config_.api_token.empty()) return true;
        if (req.get_header_value("X-Api-Token") == config_.api_token) return true;
        res.status = 401;
        res.set_content(json{{"error", "missing or invalid API token"}}.dump(), "application/json");
        return false;
    };
    auto send = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(2) + "\n", "application/json");
    };

    server.Post("/jobs", [=, this](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        try {
            const json body = json::parse(req.body);
            const JobKind kind = job_kind_from_name(body.at("kind").get<std::string>());
            const std::string id = queue_->submit(kind, body.value("payload", json::object()));
            send(res, 202, json{{"job_id", id}});
        } catch (const std::exception& e) {
            send(res, 400, json{{"error", e.what()}});
        }
    });

    server.Get(R"(/jobs/([0-9a-f]+))", [=, this](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        try {
            const ProofJob job = queue_->status(req.matches[1].str());
            send(res, 200,
                 json{{"job_id", job.id},
                      {"kind", job_kind_name(job.kind)},
                      {"status", job_status_name(job.status)},
                      {"error", job.error}});
        } catch (const Error& e) {
            send(res, 404, json{{"error", e.what()}});
        }
    });

    server.Get(R"(/jobs/([0-9a-f]+)/result)",
               [=, this](const httplib::Request& req, httplib::Response& res) {
                   if (!authorized(req, res)) return;
                   try {
                       const ProofJob job = queue_->status(req.matches[1].str());
                       switch (job.status) {
                           case JobStatus::done: send(res, 200, job.result); break;
                           case JobStatus::failed: send(res, 500, json{{"error", job.error}}); break;
                           default:
                               send(res, 202, json{{"status", job_status_name(job.status)}});
                               break;
                       }
                   } catch (const Error& e) {
                       send(res, 404, json{{"error", e.what()}});
                   }
               });

    server.Get(R"(/studies/([^/]+)/artifacts)",
               [=, this](const httplib::Request& req, httplib::Response& res) {
                   if (!authorized(req, res)) return;
                   const std::string study_id = req.matches[1].str();
                   try {
                       std::shared_lock lock(workspace_.state_mutex());
                       if (!workspace_.studies().has_study(study_id)) {
                           send(res, 404, json{{"error", "unknown study '" + study_id + "'"}});
                           return;
                       }
                       const StudyBundle bundle = workspace_.studies().read_bundle(study_id);
                       json files = json::object();
                       for (const auto& [path, content] : StudyStore::bundle_files(bundle)) {
                           files[path] = content;
                       }
                       send(res, 200, json{{"study_id", study_id}, {"files", files}});
                   } catch (const std::exception& e) {
                       send(res, 500, json{{"error", e.what()}});
                   }
               });

    server.Get("/bulletin", [=, this](const httplib::Request& req, httplib::Response& res) {
        if (!authorized(req, res)) return;
        std::shared_lock lock(workspace_.state_mutex());
        json records = json::array();
        for (const BulletinRecord& r : workspace_.bulletin().records()) {
            records.push_back(io::bulletin_record_to_json(r));
        }
        send(res, 200, json{{"records", records}});
    });

    if (config_.port == 0) {
        bound_port_ = server.bind_to_any_port(config_.host);
        if (bound_port_ <= 0) raise(errc::transport_failure, "cannot bind an ephemeral port");
    } else {
        if (!server.bind_to_port(config_.host, config_.port)) {
            raise(errc::transport_failure,
                  "cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
        bound_port_ = config_.port;
    }
    listener_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void Service::stop() {
    if (listener_.joinable()) {
        impl_->server.stop();
        listener_.join();
    }
}

} // namespace csmt
