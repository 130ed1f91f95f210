#include "csmt/transform.hpp"

#include "csmt/errors.hpp"
#include "csmt/serialize.hpp"

#include <cmath>
#include <string>

namespace csmt {

const char* transform_kind_name(TransformKind kind) noexcept {
    switch (kind) {
        case TransformKind::identity: return "identity";
        case TransformKind::bincount: return "bincount";
        case TransformKind::loglik: return "loglik";
        case TransformKind::classassess: return "classassess";
        case TransformKind::count_one: return "count_one";
    }
    return "unknown";
}

std::optional<TransformKind> transform_kind_from_name(const std::string& name) {
    for (TransformKind k : {TransformKind::identity, TransformKind::bincount, TransformKind::loglik,
                            TransformKind::classassess, TransformKind::count_one}) {
        if (name == transform_kind_name(k)) return k;
    }
    return std::nullopt;
}

std::vector<double> TransformSpec::decoded_params() const {
    std::vector<double> out;
    out.reserve(params.size());
    for (const FixedPoint& f : params) out.push_back(decode_fixed(f));
    return out;
}

Bytes serialize_leaf(const LeafValue& leaf) {
    CanonicalWriter w;
    for (const FixedPoint& f : leaf.payload) w.add_fixed(f);
    w.add_bytes(std::span<const std::uint8_t>(leaf.tau.bytes.data(), leaf.tau.bytes.size()));
    return w.take();
}

Digest256 leaf_digest(const LeafValue& leaf) { return hash_node(serialize_leaf(leaf)); }

Digest256 payload_digest(std::span<const FixedPoint> payload) {
    return hash_node(serialize_payload(payload));
}

NodeValue leaf_as_node(const LeafValue& leaf) { return NodeValue{leaf.payload, leaf_digest(leaf)}; }

std::vector<double> bincount_transform(double value, std::span<const double> edges) {
    if (edges.size() < 2) raise(errc::shape_mismatch, "bincount needs at least two edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i] < edges[i + 1])) raise(errc::shape_mismatch, "bin edges must be strictly ascending");
    }
    if (!(value >= edges.front() && value < edges.back())) {
        raise(errc::out_of_range, "value " + std::to_string(value) + " outside [" +
                                      std::to_string(edges.front()) + ", " +
                                      std::to_string(edges.back()) + ")");
    }
    std::vector<double> out(edges.size() - 1, 0.0);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        if (value >= edges[j] && value < edges[j + 1]) {
            out[j] = 1.0;
            break;
        }
    }
    return out;
}

static double logistic_z(std::span<const double> x, std::span<const double> beta) {
    if (x.size() + 1 != beta.size()) raise(errc::shape_mismatch, "len(x)+1 must equal len(beta)");
    double z = beta[0];
    for (std::size_t i = 0; i < x.size(); ++i) z += beta[i + 1] * x[i];
    return z;
}

static double clamped_sigmoid(double z) {
    constexpr double eps = 1.0 / (1024.0 * 1024.0 * 1024.0); // 2^-30
    double s = 1.0 / (1.0 + std::exp(-z));
    if (s < eps) s = eps;
    if (s > 1.0 - eps) s = 1.0 - eps;
    return s;
}

double loglik_transform(std::span<const double> x, double y, std::span<const double> beta) {
    if (y != 0.0 && y != 1.0) raise(errc::shape_mismatch, "label must be 0 or 1");
    const double s = clamped_sigmoid(logistic_z(x, beta));
    return y * std::log(s) + (1.0 - y) * std::log(1.0 - s);
}

double classassess_transform(std::span<const double> x, double y, std::span<const double> beta) {
    if (y != 0.0 && y != 1.0) raise(errc::shape_mismatch, "label must be 0 or 1");
    const double predicted = logistic_z(x, beta) >= 0.0 ? 1.0 : 0.0;
    return predicted == y ? 1.0 : 0.0;
}

static std::vector<FixedPoint> quantize_all(std::span<const double> values, unsigned scale) {
    std::vector<FixedPoint> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(encode_fixed(v, scale));
    return out;
}

std::vector<FixedPoint> apply_unsalted_transform(const TransformSpec& spec,
                                                 std::span<const double> datum) {
    if (datum.size() != spec.input_dim) {
        raise(errc::shape_mismatch, "datum has " + std::to_string(datum.size()) +
                                        " components, transform '" + spec.id + "' expects " +
                                        std::to_string(spec.input_dim));
    }
    const std::vector<double> params = spec.decoded_params();
    std::vector<double> raw;
    switch (spec.kind) {
        case TransformKind::identity:
            raw.assign(datum.begin(), datum.end());
            break;
        case TransformKind::bincount:
            raw = bincount_transform(datum[0], params);
            break;
        case TransformKind::loglik:
            raw = {loglik_transform(datum.first(datum.size() - 1), datum.back(), params)};
            break;
        case TransformKind::classassess:
            raw = {classassess_transform(datum.first(datum.size() - 1), datum.back(), params)};
            break;
        case TransformKind::count_one:
            raw = {1.0};
            break;
    }
    std::vector<FixedPoint> payload = quantize_all(raw, spec.scale);
    if (payload.size() != spec.output_dim) {
        raise(errc::shape_mismatch, "transform '" + spec.id + "' produced " +
                                        std::to_string(payload.size()) + " components, declared " +
                                        std::to_string(spec.output_dim));
    }
    return payload;
}

LeafValue apply_salted_transform(const TransformSpec& spec, std::span<const double> datum,
                                 const UserSalt& mu, const TransformSalt& tau) {
    (void)mu; // binds identity via the record digest; not used arithmetically
    return LeafValue{apply_unsalted_transform(spec, datum), tau};
}

LeafValue default_element(const TransformSpec& spec) {
    LeafValue leaf;
    leaf.payload.assign(spec.output_dim, FixedPoint{0, std::uint8_t(spec.scale)});
    leaf.tau = TransformSalt{}; // fixed all-zero tag
    return leaf;
}

NodeValue aggregate_pair(const AggregatorSpec& spec, const NodeValue& left, const NodeValue& right) {
    if (spec.arity != 2) raise(errc::shape_mismatch, "aggregator arity must be 2");
    if (left.payload.size() != right.payload.size()) {
        raise(errc::shape_mismatch, "aggregating payloads of different lengths");
    }
    NodeValue out;
    out.payload.reserve(left.payload.size());
    for (std::size_t i = 0; i < left.payload.size(); ++i) {
        out.payload.push_back(fp_add(left.payload[i], right.payload[i]));
    }
    out.digest = payload_digest(out.payload);
    return out;
}

Digest256 transform_params_digest(const TransformSpec& spec) {
    CanonicalWriter w;
    w.add_u8(std::uint8_t(spec.kind));
    w.add_u32(spec.input_dim);
    w.add_u32(spec.output_dim);
    for (const FixedPoint& f : spec.params) w.add_fixed(f);
    return hash_node(w.bytes());
}

Digest256 aggregator_params_digest(const AggregatorSpec& spec) {
    CanonicalWriter w;
    w.add_string(spec.id);
    w.add_u8(spec.default_absorbing ? 1 : 0);
    w.add_u8(std::uint8_t(spec.arity));
    return hash_node(w.bytes());
}

Registry::Registry() {
    add_aggregator(AggregatorSpec{kSumAggregatorId, /*default_absorbing=*/true, /*arity=*/2});
}

void Registry::add_transform(TransformSpec spec) {
    if (spec.id.empty()) raise(errc::bad_request, "transform id must be non-empty");
    if (transforms_.count(spec.id)) raise(errc::duplicate_entry, "transform '" + spec.id + "'");
    switch (spec.kind) {
        case TransformKind::bincount:
            if (spec.params.size() < 2) raise(errc::shape_mismatch, "bincount needs >= 2 edges");
            if (spec.input_dim != 1 || spec.output_dim != spec.params.size() - 1) {
                raise(errc::shape_mismatch, "bincount dims inconsistent with edges");
            }
            break;
        case TransformKind::loglik:
        case TransformKind::classassess:
            if (spec.params.size() != spec.input_dim) {
                raise(errc::shape_mismatch, "coefficient count must equal feature count + 1");
            }
            if (spec.output_dim != 1) raise(errc::shape_mismatch, "scalar transform output_dim must be 1");
            break;
        case TransformKind::identity:
            if (spec.input_dim != spec.output_dim) raise(errc::shape_mismatch, "identity dims must match");
            break;
        case TransformKind::count_one:
            if (spec.output_dim != 1) raise(errc::shape_mismatch, "count_one output_dim must be 1");
            break;
    }
    if (spec.scale > unsigned(kMaxScale)) raise(errc::out_of_range, "scale must be in [0, 62]");
    transforms_.emplace(spec.id, std::move(spec));
}

void Registry::add_aggregator(AggregatorSpec spec) {
    if (spec.id.empty()) raise(errc::bad_request, "aggregator id must be non-empty");
    if (aggregators_.count(spec.id)) raise(errc::duplicate_entry, "aggregator '" + spec.id + "'");
    if (!spec.default_absorbing) {
        raise(errc::bad_request, "v1 aggregators must declare default_absorbing");
    }
    aggregators_.emplace(spec.id, std::move(spec));
}

const TransformSpec& Registry::transform(const std::string& id) const {
    auto it = transforms_.find(id);
    if (it == transforms_.end()) raise(errc::not_found, "transform '" + id + "' not registered");
    return it->second;
}

const AggregatorSpec& Registry::aggregator(const std::string& id) const {
    auto it = aggregators_.find(id);
    if (it == aggregators_.end()) raise(errc::not_found, "aggregator '" + id + "' not registered");
    return it->second;
}

std::vector<std::string> Registry::transform_ids() const {
    std::vector<std::string> out;
    out.reserve(transforms_.size());
    for (const auto& [id, spec] : transforms_) out.push_back(id);
    return out;
}

} // namespace csmt
