#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

/// Id-free description of a node: class type, sorted literal inputs, and
/// number of incoming links. Structurally identical nodes get equal signatures
/// whatever their NodeIds are.
struct NodeSignature {
    std::string class_type;
    std::vector<std::pair<std::string, std::string>> literal_inputs;  // (name, canonical literal text)
    std::size_t in_degree = 0;

    std::string key() const;

    friend bool operator==(const NodeSignature&, const NodeSignature&) = default;
};

NodeSignature node_signature(const Node& node);

/// Multiset of node-signature keys and edge keys (source signature, target
/// signature, input name), stored sorted for merge-based comparison.
class SignatureBag {
public:
    explicit SignatureBag(const WorkflowGraph& graph);

    const std::vector<std::pair<std::string, std::size_t>>& items() const noexcept { return items_; }
    std::size_t total() const noexcept { return total_; }

private:
    std::vector<std::pair<std::string, std::size_t>> items_;
    std::size_t total_ = 0;
};

/// Multiset Jaccard |A ∩ B| / |A ∪ B| over the two bags.
double bag_similarity(const SignatureBag& a, const SignatureBag& b);

/// Symmetric, in [0, 1], 1 for structurally equal graphs.
double flow_similarity(const WorkflowGraph& a, const WorkflowGraph& b);

struct NearestMatch {
    FlowId id;
    double similarity = 0.0;
};

/// Precomputed bags for a corpus, so repeated nearest-neighbour queries only
/// build the query bag.
class SimilarityIndex {
public:
    explicit SimilarityIndex(const Corpus& corpus);

    std::size_t size() const noexcept { return ids_.size(); }

    /// OpenMP scan over the corpus. Ties go to the smallest FlowId.
    NearestMatch nearest(const WorkflowGraph& query) const;
    NearestMatch nearest_serial(const WorkflowGraph& query) const;

    /// Scores of `query` against every entry, in corpus order.
    std::vector<double> scores(const WorkflowGraph& query) const;

private:
    std::vector<FlowId> ids_;
    std::vector<SignatureBag> bags_;
};

NearestMatch nearest_neighbor(const WorkflowGraph& query, const Corpus& corpus);

namespace serial {
NearestMatch nearest_neighbor(const WorkflowGraph& query, const Corpus& corpus);
}

}  // namespace flowpick
