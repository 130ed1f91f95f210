#include "csmt/study_store.hpp"

#include "csmt/errors.hpp"
#include "csmt/tree.hpp"

#include <algorithm>

namespace csmt {

namespace fs = std::filesystem;
using io::json;

const BundleTree& StudyBundle::tree(const std::string& label) const {
    for (const BundleTree& t : trees) {
        if (t.label == label) return t;
    }
    raise(errc::not_found, "bundle has no tree '" + label + "'");
}

const VerificationKey& StudyBundle::vk(const std::string& name) const {
    auto it = vks.find(name);
    if (it == vks.end()) raise(errc::not_found, "bundle has no verification key '" + name + "'");
    return it->second;
}

Registry StudyBundle::build_registry() const {
    Registry registry;
    for (const json& t : settings.at("transforms")) {
        TransformSpec spec = io::transform_spec_from_json(t);
        if (!registry.has_transform(spec.id)) registry.add_transform(std::move(spec));
    }
    return registry;
}

unsigned StudyBundle::height() const { return settings.at("height").get<unsigned>(); }
unsigned StudyBundle::scale() const { return settings.at("scale").get<unsigned>(); }

MembershipContext StudyBundle::membership_context(const std::string& user_id,
                                                  const std::string& tree_label) const {
    const BundleTree& t = tree(tree_label);
    MembershipContext ctx;
    ctx.user_id = user_id;
    bool found = false;
    for (const DeliveryRecord& d : t.deliveries) {
        if (d.user_id == user_id) {
            ctx.h_raw = d.h_raw;
            ctx.h_tau = d.h_tau;
            found = true;
            break;
        }
    }
    if (!found) raise(errc::not_found, "user '" + user_id + "' was not part of the study");
    ctx.h_root = t.root;
    ctx.vk_ltr = vk("ltr-" + tree_label);
    ctx.vk_mrp = vk("mrp");
    ctx.tree_height = height();

    const Registry registry = build_registry();
    ctx.default_leaf_digest = leaf_digest(default_element(registry.transform(t.transform_id)));
    return ctx;
}

json statistic_result_to_json(const StatisticResult& result) {
    json roots = json::array();
    for (const Digest256& d : result.root_digests) roots.push_back(d.hex());
    return json{{"format_version", io::kFileFormatVersion},
                {"kind", stat_kind_name(result.kind)},
                {"zeta", io::fixed_to_json(result.zeta)},
                {"decoded", result.decoded},
                {"scale", result.scale},
                {"root_digests", roots},
                {"post_proof", io::artifact_to_json(result.post_proof)}};
}

StatisticResult statistic_result_from_json(const json& j) {
    StatisticResult result;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ks_max_gap") {
        result.kind = StatKind::ks_max_gap;
    } else if (kind == "lrt") {
        result.kind = StatKind::lrt;
    } else if (kind == "accuracy") {
        result.kind = StatKind::accuracy;
    } else {
        raise(errc::bad_request, "unknown statistic kind '" + kind + "'");
    }
    result.zeta = io::fixed_from_json(j.at("zeta"));
    result.decoded = j.at("decoded").get<double>();
    result.scale = j.at("scale").get<unsigned>();
    for (const json& d : j.at("root_digests")) {
        result.root_digests.push_back(Digest256::from_hex(d.get<std::string>()));
    }
    result.post_proof = io::artifact_from_json(j.at("post_proof"));
    return result;
}

namespace {

json delivery_to_json(const DeliveryRecord& d) {
    return json{{"user_id", d.user_id}, {"h_raw", d.h_raw.hex()}, {"h_tau", d.h_tau.hex()}};
}

DeliveryRecord delivery_from_json(const json& j) {
    return DeliveryRecord{j.at("user_id").get<std::string>(),
                          Digest256::from_hex(j.at("h_raw").get<std::string>()),
                          Digest256::from_hex(j.at("h_tau").get<std::string>())};
}

json tree_meta_to_json(const BundleTree& t) {
    json users = json::array();
    for (const std::string& u : t.included_users) users.push_back(u);
    json claimed = json::array();
    for (const Digest256& d : t.claimed_leaves) claimed.push_back(d.hex());
    return json{{"label", t.label},
                {"transform_id", t.transform_id},
                {"root", t.root.hex()},
                {"eta", to_hex(std::span<const std::uint8_t>(t.eta.data(), t.eta.size()))},
                {"included_users", users},
                {"claimed_leaves", claimed}};
}

} // namespace

std::map<std::string, json> StudyStore::bundle_files(const StudyBundle& bundle) {
    std::map<std::string, json> files;
    files["bulletin.json"] = io::bulletin_record_to_json(bundle.bulletin);
    files["settings.json"] = bundle.settings;
    for (const auto& [name, vk] : bundle.vks) {
        files["keys/vk-" + name + ".json"] = io::vk_to_json(vk);
    }
    if (bundle.result) files["result.json"] = statistic_result_to_json(*bundle.result);
    for (const BundleTree& t : bundle.trees) {
        const std::string base = "trees/" + t.label + "/";
        files[base + "meta.json"] = tree_meta_to_json(t);
        json deliveries = json::array();
        for (const DeliveryRecord& d : t.deliveries) deliveries.push_back(delivery_to_json(d));
        files[base + "deliveries.json"] = deliveries;
        for (const auto& [user, set] : t.proof_sets) {
            files[base + "proofsets/" + user + ".json"] = io::proof_set_to_json(set);
        }
        for (const auto& [user, path] : t.phr_paths) {
            files[base + "phr/" + user + ".json"] = io::audit_path_to_json(path);
        }
    }
    return files;
}

StudyBundle StudyStore::bundle_from_files(const std::map<std::string, json>& files) {
    StudyBundle bundle;
    bundle.bulletin = io::bulletin_record_from_json(files.at("bulletin.json"));
    bundle.settings = files.at("settings.json");
    auto result_it = files.find("result.json");
    if (result_it != files.end()) bundle.result = statistic_result_from_json(result_it->second);

    for (const auto& [path, content] : files) {
        if (path.rfind("keys/vk-", 0) == 0) {
            const std::string name = path.substr(8, path.size() - 8 - 5); // strip prefix and .json
            bundle.vks[name] = io::vk_from_json(content);
        }
    }
    // tree sections, keyed by their meta files
    for (const auto& [path, content] : files) {
        if (path.rfind("trees/", 0) != 0 || path.find("/meta.json") == std::string::npos) continue;
        BundleTree t;
        t.label = content.at("label").get<std::string>();
        t.transform_id = content.at("transform_id").get<std::string>();
        t.root = Digest256::from_hex(content.at("root").get<std::string>());
        t.eta = from_hex(content.at("eta").get<std::string>());
        for (const json& u : content.at("included_users")) t.included_users.push_back(u.get<std::string>());
        for (const json& d : content.at("claimed_leaves")) {
            t.claimed_leaves.push_back(Digest256::from_hex(d.get<std::string>()));
        }
        const std::string base = "trees/" + t.label + "/";
        auto deliveries = files.find(base + "deliveries.json");
        if (deliveries != files.end()) {
            for (const json& d : deliveries->second) t.deliveries.push_back(delivery_from_json(d));
        }
        for (const auto& [p, c] : files) {
            if (p.rfind(base + "proofsets/", 0) == 0) {
                const std::string user = fs::path(p).stem().string();
                t.proof_sets[user] = io::proof_set_from_json(c);
            } else if (p.rfind(base + "phr/", 0) == 0) {
                const std::string user = fs::path(p).stem().string();
                t.phr_paths[user] = io::audit_path_from_json(c);
            }
        }
        bundle.trees.push_back(std::move(t));
    }
    std::sort(bundle.trees.begin(), bundle.trees.end(),
              [](const BundleTree& a, const BundleTree& b) { return a.label < b.label; });
    return bundle;
}

StudyStore::StudyStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

bool StudyStore::has_study(const std::string& study_id) const {
    return fs::exists(root_ / study_id / "bulletin.json");
}

fs::path StudyStore::study_dir(const std::string& study_id) const { return root_ / study_id; }

std::vector<std::string> StudyStore::study_ids() const {
    std::vector<std::string> out;
    if (!fs::exists(root_)) return out;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.is_directory() && fs::exists(entry.path() / "bulletin.json")) {
            out.push_back(entry.path().filename().string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void StudyStore::write_bundle_dir(const fs::path& dir, const StudyBundle& bundle) {
    for (const auto& [rel, content] : bundle_files(bundle)) {
        const fs::path target = dir / rel;
        fs::create_directories(target.parent_path());
        io::write_json_file(target, content);
    }
}

void StudyStore::write_bundle(const StudyBundle& bundle) const {
    const std::string& id = bundle.bulletin.study_id;
    if (has_study(id)) raise(errc::duplicate_entry, "study '" + id + "' already stored");
    write_bundle_dir(study_dir(id), bundle);
}

StudyBundle StudyStore::read_bundle_dir(const fs::path& dir) {
    if (!fs::exists(dir / "bulletin.json")) {
        raise(errc::not_found, "no study bundle at '" + dir.string() + "'");
    }
    std::map<std::string, json> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        files[fs::relative(entry.path(), dir).generic_string()] = io::read_json_file(entry.path());
    }
    return bundle_from_files(files);
}

StudyBundle StudyStore::read_bundle(const std::string& study_id) const {
    return read_bundle_dir(study_dir(study_id));
}

} // namespace csmt
