#pragma once

#include "csmt/json_io.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace csmt {

enum class JobKind { ltr, mrp, pipeline_ks, pipeline_lrt, pipeline_acc, audit };
enum class JobStatus { queued, running, done, failed };

const char* job_kind_name(JobKind kind) noexcept;
const char* job_status_name(JobStatus status) noexcept;
JobKind job_kind_from_name(const std::string& name);

struct ProofJob {
    std::string id;
    JobKind kind = JobKind::ltr;
    JobStatus status = JobStatus::queued;
    io::json request;
    io::json result;
    std::string error;
};

/// Bounded worker pool with monotone job state transitions
/// (queued -> running -> done|failed). Results are write-once; fetching is
/// idempotent.
class JobQueue {
public:
    using Executor = std::function<io::json(JobKind, const io::json&)>;

    JobQueue(unsigned workers, Executor executor);
    ~JobQueue();

    JobQueue(const JobQueue&) = delete;
    JobQueue& operator=(const JobQueue&) = delete;

    std::string submit(JobKind kind, io::json request);
    ProofJob status(const std::string& job_id) const;

    /// Blocks until the job leaves the queue (test convenience).
    ProofJob wait(const std::string& job_id);

private:
    void worker_loop();

    Executor executor_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    std::deque<std::string> pending_;
    std::map<std::string, ProofJob> jobs_;
    std::vector<std::thread> workers_;
    bool stopping_ = false;
};

} // namespace csmt
