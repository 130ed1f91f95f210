#include "csmt/client.hpp"

#include "csmt/errors.hpp"

#include <httplib.h>

#include <chrono>
#include <thread>

namespace csmt {

using io::json;

struct HttpServiceClient::Impl {
    std::string base_url;
    std::string api_token;

    httplib::Headers headers() const {
        httplib::Headers h;
        if (!api_token.empty()) h.emplace("X-Api-Token", api_token);
        return h;
    }

    json request(const std::string& method, const std::string& path, const json* body) const {
        constexpr int kAttempts = 3;
        std::string last_error;
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
            httplib::Client client(base_url);
            client.set_connection_timeout(5, 0);
            client.set_read_timeout(120, 0);
            httplib::Result result =
                method == "GET"
                    ? client.Get(path, headers())
                    : client.Post(path, headers(), body->dump(), "application/json");
            if (!result) {
                last_error = httplib::to_string(result.error());
                std::this_thread::sleep_for(std::chrono::milliseconds(50 * (attempt + 1)));
                continue;
            }
            if (result->status == 401) raise(errc::transport_failure, "unauthorized (API token)");
            json parsed;
            try {
                parsed = json::parse(result->body);
            } catch (const std::exception&) {
                raise(errc::transport_failure, "malformed response from " + path);
            }
            if (result->status >= 400) {
                raise(errc::transport_failure,
                      path + " -> " + std::to_string(result->status) + ": " +
                          parsed.value("error", result->body));
            }
            parsed["_status"] = result->status;
            return parsed;
        }
        raise(errc::transport_failure, "cannot reach " + base_url + path + ": " + last_error);
    }
};

HttpServiceClient::HttpServiceClient(std::string base_url, std::string api_token)
    : impl_(std::make_unique<Impl>()) {
    impl_->base_url = std::move(base_url);
    impl_->api_token = std::move(api_token);
}

HttpServiceClient::~HttpServiceClient() = default;

json HttpServiceClient::get_json(const std::string& path) const {
    return impl_->request("GET", path, nullptr);
}

json HttpServiceClient::post_json(const std::string& path, const json& body) const {
    return impl_->request("POST", path, &body);
}

json HttpServiceClient::submit_and_wait(const std::string& kind, const json& payload,
                                        int timeout_ms) const {
    const json submitted = post_json("/jobs", json{{"kind", kind}, {"payload", payload}});
    const std::string job_id = submitted.at("job_id").get<std::string>();

    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
        const json status = get_json("/jobs/" + job_id);
        const std::string state = status.at("status").get<std::string>();
        if (state == "done") {
            json result = get_json("/jobs/" + job_id + "/result");
            result.erase("_status");
            return result;
        }
        if (state == "failed") {
            raise(errc::transport_failure,
                  "job " + job_id + " failed: " + status.value("error", std::string{}));
        }
        if (std::chrono::steady_clock::now() > deadline) {
            raise(errc::transport_failure, "job " + job_id + " timed out");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(15));
    }
}

json HttpServiceClient::bulletin() const {
    json b = get_json("/bulletin");
    b.erase("_status");
    return b;
}

std::map<std::string, json> HttpServiceClient::download_artifacts(const std::string& study_id) const {
    const json reply = get_json("/studies/" + study_id + "/artifacts");
    std::map<std::string, json> files;
    for (const auto& [path, content] : reply.at("files").items()) {
        files[path] = content;
    }
    return files;
}

HttpProverClient::HttpProverClient(const HttpServiceClient& service, std::string study_id,
                                   std::string tree_label)
    : service_(service), study_id_(std::move(study_id)), tree_label_(std::move(tree_label)) {}

LtrProveReply HttpProverClient::ltr_prove(const Digest256& h_raw, const Digest256& h_tau) {
    const json result = service_.submit_and_wait(
        "ltr", json{{"study_id", study_id_},
                    {"tree", tree_label_},
                    {"h_raw", h_raw.hex()},
                    {"h_tau", h_tau.hex()}});
    LtrProveReply reply;
    reply.leaf_digest = Digest256::from_hex(result.at("h_leaf").get<std::string>());
    reply.index = result.at("index").get<std::uint64_t>();
    reply.artifact = io::artifact_from_json(result.at("artifact"));
    return reply;
}

MrpProveReply HttpProverClient::mrp_prove(const Digest256& h_leaf, std::uint64_t index,
                                          const Bytes& eta) {
    const json result = service_.submit_and_wait(
        "mrp", json{{"study_id", study_id_},
                    {"tree", tree_label_},
                    {"h_leaf", h_leaf.hex()},
                    {"index", index},
                    {"eta", to_hex(std::span<const std::uint8_t>(eta.data(), eta.size()))}});
    MrpProveReply reply;
    reply.root_digest = Digest256::from_hex(result.at("root").get<std::string>());
    for (const json& hop : result.at("hops")) reply.hops.push_back(io::artifact_from_json(hop));
    for (const json& bit : result.at("path")) reply.path.bits.push_back(bit.get<std::uint8_t>());
    return reply;
}

LocalProverClient::LocalProverClient(const StudyProver& prover, VerificationKey vk_ltr,
                                     VerificationKey vk_mrp, Digest256 root_digest,
                                     unsigned tree_height)
    : prover_(prover), vk_ltr_(std::move(vk_ltr)), vk_mrp_(std::move(vk_mrp)),
      root_(root_digest), height_(tree_height) {}

LtrProveReply LocalProverClient::ltr_prove(const Digest256& h_raw, const Digest256& h_tau) {
    const LtrProveOutcome out = prover_.ltr_prove(h_raw, h_tau, vk_ltr_, height_);
    return LtrProveReply{out.leaf_digest, out.index.value(), out.artifact};
}

MrpProveReply LocalProverClient::mrp_prove(const Digest256& h_leaf, std::uint64_t index,
                                           const Bytes& eta) {
    const MrpProveOutcome out = prover_.mrp_prove(
        h_leaf, LeafIndex::from_value(index, height_), eta, vk_mrp_, root_);
    return MrpProveReply{out.root_digest, out.hops, out.path};
}

} // namespace csmt
