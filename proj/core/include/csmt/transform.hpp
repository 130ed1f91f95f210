#pragma once

#include "csmt/digest.hpp"
#include "csmt/fixed_point.hpp"
#include "csmt/salt.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csmt {

enum class TransformKind : std::uint8_t {
    identity = 0,
    bincount = 1,
    loglik = 2,
    classassess = 3,
    count_one = 4,
};

const char* transform_kind_name(TransformKind kind) noexcept;
std::optional<TransformKind> transform_kind_from_name(const std::string& name);

/// A registered leaf transform instance: kind plus its parameter vector
/// (bin edges or regression coefficients), dimensions and working scale.
struct TransformSpec {
    std::string id;
    TransformKind kind = TransformKind::identity;
    std::vector<FixedPoint> params;
    unsigned input_dim = 1;
    unsigned output_dim = 1;
    unsigned scale = 8;

    std::vector<double> decoded_params() const;
};

/// v1 aggregators are element-wise sums: commutative, associative, and
/// absorbing on the all-zero default element.
struct AggregatorSpec {
    std::string id;
    bool default_absorbing = true;
    unsigned arity = 2;
};

/// Transform output carried at a leaf: quantized payload plus the
/// transform-salt tag appended by the salted transform.
struct LeafValue {
    std::vector<FixedPoint> payload;
    TransformSalt tau;

    bool operator==(const LeafValue&) const = default;
};

/// Aggregated value at a tree node. For internal nodes the digest covers
/// the payload serialization only; leaf-level nodes keep the salted leaf
/// digest (payload plus tau tag).
struct NodeValue {
    std::vector<FixedPoint> payload;
    Digest256 digest;

    bool operator==(const NodeValue&) const = default;
};

Bytes serialize_leaf(const LeafValue& leaf);
Digest256 leaf_digest(const LeafValue& leaf);
Digest256 payload_digest(std::span<const FixedPoint> payload);
NodeValue leaf_as_node(const LeafValue& leaf);

/// One-hot bin assignment over strictly ascending edges; half-open bins
/// [edges[j], edges[j+1]). Requires edges[0] <= value < edges.back().
std::vector<double> bincount_transform(double value, std::span<const double> edges);

/// Logistic log-likelihood of (x, y) under coefficients beta
/// (intercept first); sigma is clamped to [2^-30, 1 - 2^-30].
double loglik_transform(std::span<const double> x, double y, std::span<const double> beta);

/// 1 iff the predicted class (sigma(z) >= 0.5 maps to 1) equals y.
double classassess_transform(std::span<const double> x, double y, std::span<const double> beta);

/// Unsalted transform output, computed in double precision and quantized
/// at the spec scale.
std::vector<FixedPoint> apply_unsalted_transform(const TransformSpec& spec,
                                                 std::span<const double> datum);

LeafValue apply_salted_transform(const TransformSpec& spec, std::span<const double> datum,
                                 const UserSalt& mu, const TransformSalt& tau);

/// L^s of the empty record: all-zero payload with an all-zero tau tag.
LeafValue default_element(const TransformSpec& spec);

NodeValue aggregate_pair(const AggregatorSpec& spec, const NodeValue& left, const NodeValue& right);

Digest256 transform_params_digest(const TransformSpec& spec);
Digest256 aggregator_params_digest(const AggregatorSpec& spec);

/// Append-only registry of transform and aggregator specs. Populated at
/// startup (programmatically or from a JSON config file); reads are safe
/// concurrently once populated.
class Registry {
public:
    Registry();

    void add_transform(TransformSpec spec);
    void add_aggregator(AggregatorSpec spec);

    const TransformSpec& transform(const std::string& id) const;
    const AggregatorSpec& aggregator(const std::string& id) const;
    bool has_transform(const std::string& id) const { return transforms_.count(id) != 0; }
    bool has_aggregator(const std::string& id) const { return aggregators_.count(id) != 0; }

    std::vector<std::string> transform_ids() const;

private:
    std::map<std::string, TransformSpec> transforms_;
    std::map<std::string, AggregatorSpec> aggregators_;
};

/// Built-in element-wise sum aggregator id.
inline constexpr const char* kSumAggregatorId = "sum";

} // namespace csmt
