#include "csmt/jobs.hpp"

#include "csmt/errors.hpp"

namespace csmt {

const char* job_kind_name(JobKind kind) noexcept {
    switch (kind) {
        case JobKind::ltr: return "ltr";
        case JobKind::mrp: return "mrp";
        case JobKind::pipeline_ks: return "pipeline_ks";
        case JobKind::pipeline_lrt: return "pipeline_lrt";
        case JobKind::pipeline_acc: return "pipeline_acc";
        case JobKind::audit: return "audit";
    }
    return "unknown";
}

const char* job_status_name(JobStatus status) noexcept {
    switch (status) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "unknown";
}

JobKind job_kind_from_name(const std::string& name) {
    for (JobKind k : {JobKind::ltr, JobKind::mrp, JobKind::pipeline_ks, JobKind::pipeline_lrt,
                      JobKind::pipeline_acc, JobKind::audit}) {
        if (name == job_kind_name(k)) return k;
    }
    raise(errc::bad_request, "unknown job kind '" + name + "'");
}

JobQueue::JobQueue(unsigned workers, Executor executor) : executor_(std::move(executor)) {
    if (workers == 0) workers = 1;
    workers_.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

JobQueue::~JobQueue() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    for (std::thread& t : workers_) t.join();
}

std::string JobQueue::submit(JobKind kind, io::json request) {
    ProofJob job;
    job.id = to_hex(random_bytes(16));
    job.kind = kind;
    job.status = JobStatus::queued;
    job.request = std::move(request);
    const std::string id = job.id;
    {
        std::lock_guard lock(mutex_);
        pending_.push_back(id);
        jobs_.emplace(id, std::move(job));
    }
    cv_.notify_one();
    return id;
}

ProofJob JobQueue::status(const std::string& job_id) const {
    std::lock_guard lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) raise(errc::not_found, "job '" + job_id + "' unknown");
    return it->second;
}

ProofJob JobQueue::wait(const std::string& job_id) {
    std::unique_lock lock(mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) raise(errc::not_found, "job '" + job_id + "' unknown");
    done_cv_.wait(lock, [&] {
        const JobStatus s = jobs_.at(job_id).status;
        return s == JobStatus::done || s == JobStatus::failed;
    });
    return jobs_.at(job_id);
}

void JobQueue::worker_loop() {
    while (true) {
        std::string job_id;
        JobKind kind;
        io::json request;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
            if (stopping_ && pending_.empty()) return;
            job_id = pending_.front();
            pending_.pop_front();
            ProofJob& job = jobs_.at(job_id);
            job.status = JobStatus::running;
            kind = job.kind;
            request = job.request;
        }
        io::json result;
        std::string error;
        try {
            result = executor_(kind, request);
        } catch (const std::exception& e) {
            error = e.what();
        }
        {
            std::lock_guard lock(mutex_);
            ProofJob& job = jobs_.at(job_id);
            if (error.empty()) {
                job.status = JobStatus::done;
                job.result = std::move(result);
            } else {
                job.status = JobStatus::failed;
                job.error = std::move(error);
            }
        }
        done_cv_.notify_all();
    }
}

} // namespace csmt
