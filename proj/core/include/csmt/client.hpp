#pragma once

#include "csmt/json_io.hpp"
#include "csmt/prover.hpp"
#include "csmt/verifier.hpp"

#include <map>
#include <memory>
#include <string>

namespace csmt {

/// HTTP client for the job service. Transient transport errors are retried
/// a bounded number of times before surfacing as transport failures.
class HttpServiceClient {
public:
    explicit HttpServiceClient(std::string base_url, std::string api_token = "");
    ~HttpServiceClient();

    io::json get_json(const std::string& path) const;
    io::json post_json(const std::string& path, const io::json& body) const;

    /// Submit a job and poll until it finishes; failed jobs raise the
    /// server-reported error.
    io::json submit_and_wait(const std::string& kind, const io::json& payload,
                             int timeout_ms = 120000) const;

    io::json bulletin() const;
    std::map<std::string, io::json> download_artifacts(const std::string& study_id) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Remote prover bound to one (study, tree) pair.
class HttpProverClient : public ProverClient {
public:
    HttpProverClient(const HttpServiceClient& service, std::string study_id, std::string tree_label);

    LtrProveReply ltr_prove(const Digest256& h_raw, const Digest256& h_tau) override;
    MrpProveReply mrp_prove(const Digest256& h_leaf, std::uint64_t index, const Bytes& eta) override;

private:
    const HttpServiceClient& service_;
    std::string study_id_;
    std::string tree_label_;
};

/// In-process prover, used by tests and the CLI's local verification mode.
class LocalProverClient : public ProverClient {
public:
    LocalProverClient(const StudyProver& prover, VerificationKey vk_ltr, VerificationKey vk_mrp,
                      Digest256 root_digest, unsigned tree_height);

    LtrProveReply ltr_prove(const Digest256& h_raw, const Digest256& h_tau) override;
    MrpProveReply mrp_prove(const Digest256& h_leaf, std::uint64_t index, const Bytes& eta) override;

private:
    const StudyProver& prover_;
    VerificationKey vk_ltr_;
    VerificationKey vk_mrp_;
    Digest256 root_;
    unsigned height_;
};

} // namespace csmt
