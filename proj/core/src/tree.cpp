#include "csmt/tree.hpp"

#include "csmt/errors.hpp"

#include <set>
#include <string>

namespace csmt {

std::vector<NodeValue> Tree::compute_default_chain(const Registry& registry,
                                                   const TreeConfig& config) {
    const TransformSpec& transform = registry.transform(config.transform_id);
    const AggregatorSpec& aggregator = registry.aggregator(config.aggregator_id);
    std::vector<NodeValue> chain;
    chain.reserve(config.height + 1);
    chain.push_back(leaf_as_node(default_element(transform)));
    for (unsigned k = 0; k < config.height; ++k) {
        chain.push_back(aggregate_pair(aggregator, chain.back(), chain.back()));
    }
    return chain;
}

Tree Tree::build(const Registry& registry, TreeConfig config,
                 const std::vector<std::pair<std::uint64_t, LeafValue>>& leaves) {
    if (config.height < 1 || config.height > 32) {
        raise(errc::out_of_range, "materialized tree height must be in [1, 32]");
    }
    const TransformSpec& transform = registry.transform(config.transform_id);
    const AggregatorSpec& aggregator = registry.aggregator(config.aggregator_id);
    if (transform.scale != config.scale) {
        raise(errc::scale_mismatch, "tree scale differs from transform scale");
    }

    Tree tree;
    tree.config_ = std::move(config);
    const unsigned K = tree.config_.height;
    const std::uint64_t slots = (K == 64) ? 0 : (std::uint64_t(1) << K);

    for (const auto& [index, leaf] : leaves) {
        if (index >= slots) {
            raise(errc::out_of_range, "leaf index " + std::to_string(index) + " >= 2^" + std::to_string(K));
        }
        if (leaf.payload.size() != transform.output_dim) {
            raise(errc::shape_mismatch, "leaf payload length differs from transform output_dim");
        }
        auto [it, inserted] = tree.occupied_.emplace(index, leaf);
        if (!inserted && !(it->second == leaf)) {
            raise(errc::leaf_collision, "index " + std::to_string(index) + " claimed by differing leaves");
        }
    }

    tree.default_chain_ = compute_default_chain(registry, tree.config_);
    tree.levels_.assign(K + 1, {});

    for (const auto& [index, leaf] : tree.occupied_) {
        tree.levels_[0].emplace(index, leaf_as_node(leaf));
    }
    for (unsigned k = 0; k < K; ++k) {
        std::set<std::uint64_t> parents;
        for (const auto& [pos, node] : tree.levels_[k]) parents.insert(pos >> 1);
        for (std::uint64_t j : parents) {
            tree.levels_[k + 1].emplace(
                j, aggregate_pair(aggregator, tree.node_at(k, 2 * j), tree.node_at(k, 2 * j + 1)));
        }
    }
    tree.root_ = tree.node_at(K, 0);
    return tree;
}

const NodeValue& Tree::node_at(unsigned level, std::uint64_t position) const {
    const unsigned K = config_.height;
    if (level > K) raise(errc::out_of_range, "level " + std::to_string(level) + " > height");
    const unsigned span_bits = K - level;
    if (span_bits < 64 && position >= (std::uint64_t(1) << span_bits)) {
        raise(errc::out_of_range, "position " + std::to_string(position) + " out of range at level " +
                                      std::to_string(level));
    }
    const auto& lvl = levels_[level];
    auto it = lvl.find(position);
    if (it != lvl.end()) return it->second;
    return default_chain_[level];
}

std::vector<NodeValue> Tree::siblings_along_path(const LeafIndex& index) const {
    if (index.height() != config_.height) {
        raise(errc::shape_mismatch, "index height differs from tree height");
    }
    const std::uint64_t value = index.value();
    std::vector<NodeValue> siblings;
    siblings.reserve(config_.height);
    for (unsigned k = 0; k < config_.height; ++k) {
        siblings.push_back(node_at(k, (value >> k) ^ 1));
    }
    return siblings;
}

} // namespace csmt
