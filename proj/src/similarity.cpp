#include "flowpick/similarity.hpp"

#include <algorithm>
#include <map>

#include "flowpick/error.hpp"

namespace flowpick {

std::string NodeSignature::key() const {
    Json lits = Json::array();
    for (const auto& [name, text] : literal_inputs) lits.push_back(Json::array({name, text}));
    return Json::array({class_type, std::move(lits), in_degree}).dump();
}

NodeSignature node_signature(const Node& node) {
    NodeSignature sig;
    sig.class_type = node.class_type;
    for (const auto& [name, value] : node.inputs) {
        if (auto lit = as_literal(value)) {
            sig.literal_inputs.emplace_back(name, literal_text(*lit));
        } else {
            ++sig.in_degree;
        }
    }
    // std::map iteration already yields names in order.
    return sig;
}

SignatureBag::SignatureBag(const WorkflowGraph& graph) {
    std::map<NodeId, std::string> sig_of;
    for (const auto& [id, node] : graph.nodes()) sig_of.emplace(id, node_signature(node).key());

    std::map<std::string, std::size_t> counts;
    for (const auto& [id, node] : graph.nodes()) {
        ++counts["N" + sig_of.at(id)];
        for (const auto& [name, value] : node.inputs) {
            if (auto link = as_link(value)) {
                ++counts["E" + Json::array({sig_of.at(link->node), sig_of.at(id), name}).dump()];
            }
        }
    }
    items_.assign(counts.begin(), counts.end());
    for (const auto& [_, c] : items_) total_ += c;
}

double bag_similarity(const SignatureBag& a, const SignatureBag& b) {
    const auto& x = a.items();
    const auto& y = b.items();
    std::size_t inter = 0;
    std::size_t uni = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (i->first < j->first) {
            uni += (i++)->second;
        } else if (j->first < i->first) {
            uni += (j++)->second;
        } else {
            inter += std::min(i->second, j->second);
            uni += std::max(i->second, j->second);
            ++i;
            ++j;
        }
    }
    for (; i != x.end(); ++i) uni += i->second;
    for (; j != y.end(); ++j) uni += j->second;
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double flow_similarity(const WorkflowGraph& a, const WorkflowGraph& b) {
    return bag_similarity(SignatureBag(a), SignatureBag(b));
}

SimilarityIndex::SimilarityIndex(const Corpus& corpus) {
    ids_.reserve(corpus.size());
    bags_.reserve(corpus.size());
    for (const auto& entry : corpus) {
        ids_.push_back(entry.id);
        bags_.emplace_back(entry.graph);
    }
}

namespace {

NearestMatch pick_best(const std::vector<FlowId>& ids, const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < ids.size(); ++k) {
        if (scores[k] > scores[best] || (scores[k] == scores[best] && ids[k] < ids[best])) best = k;
    }
    return {ids[best], scores[best]};
}

}  // namespace

std::vector<double> SimilarityIndex::scores(const WorkflowGraph& query) const {
    const SignatureBag q(query);
    std::vector<double> out(bags_.size());
    const auto n = static_cast<std::ptrdiff_t>(bags_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = bag_similarity(q, bags_[k]);
    return out;
}

NearestMatch SimilarityIndex::nearest(const WorkflowGraph& query) const {
    if (ids_.empty()) throw Error(Errc::EmptyCorpus, "nearest neighbour over an empty corpus");
    return pick_best(ids_, scores(query));
}

NearestMatch SimilarityIndex::nearest_serial(const WorkflowGraph& query) const {
    if (ids_.empty()) throw Error(Errc::EmptyCorpus, "nearest neighbour over an empty corpus");
    const SignatureBag q(query);
    std::vector<double> out;
    out.reserve(bags_.size());
    for (const auto& bag : bags_) out.push_back(bag_similarity(q, bag));
    return pick_best(ids_, out);
}

NearestMatch nearest_neighbor(const WorkflowGraph& query, const Corpus& corpus) {
    if (corpus.empty()) throw Error(Errc::EmptyCorpus, "nearest neighbour over an empty corpus");
    return SimilarityIndex(corpus).nearest(query);
}

namespace serial {

NearestMatch nearest_neighbor(const WorkflowGraph& query, const Corpus& corpus) {
    if (corpus.empty()) throw Error(Errc::EmptyCorpus, "nearest neighbour over an empty corpus");
    NearestMatch best{corpus.front().id, -1.0};
    for (const auto& entry : corpus) {
        double s = flow_similarity(query, entry.graph);
        if (s > best.similarity || (s == best.similarity && entry.id < best.id)) best = {entry.id, s};
    }
    return best;
}

}  // namespace serial

}  // namespace flowpick
