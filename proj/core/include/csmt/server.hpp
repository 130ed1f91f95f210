#pragma once

#include "csmt/workspace.hpp"

#include <memory>
#include <string>
#include <thread>

namespace csmt {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 5012; // 0 binds an ephemeral port
    unsigned workers = 4;
    std::string api_token; // when set, requests must carry X-Api-Token
};

/// Job-based prover service over HTTP/1.1 with JSON bodies:
///   POST /jobs                     submit {kind, payload}
///   GET  /jobs/{id}                job status
///   GET  /jobs/{id}/result        result once done (idempotent)
///   GET  /studies/{id}/artifacts  downloadable bundle files
///   GET  /bulletin                 published records
class Service {
public:
    Service(Workspace& workspace, ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void start();
    void stop();
    int port() const { return bound_port_; }
    std::string base_url() const;

private:
    io::json run_job(JobKind kind, const io::json& request);

    Workspace& workspace_;
    ServiceConfig config_;
    std::unique_ptr<JobQueue> queue_;
    struct Impl; // hides httplib from the public header
    std::unique_ptr<Impl> impl_;
    std::thread listener_;
    int bound_port_ = 0;
};

} // namespace csmt
