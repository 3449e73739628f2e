#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace flowpick {

using Json = nlohmann::json;
using NodeId = std::string;

/// Identifier of a flow inside a corpus (template name plus augmentation
/// suffix, or a content hash).
struct FlowId {
    std::string value;

    FlowId() = default;
    explicit FlowId(std::string v) : value(std::move(v)) {}

    const std::string& str() const noexcept { return value; }
    bool empty() const noexcept { return value.empty(); }

    friend auto operator<=>(const FlowId&, const FlowId&) = default;
    friend bool operator==(const FlowId&, const FlowId&) = default;
};

/// Scalar input. Integers that fit in int64 are always stored as int64; the
/// uint64 alternative only carries values above INT64_MAX (ComfyUI seeds).
using Literal = std::variant<bool, std::int64_t, std::uint64_t, double, std::string>;

struct LinkRef {
    NodeId node;
    std::uint64_t output = 0;

    friend bool operator==(const LinkRef&, const LinkRef&) = default;
};

using InputValue = std::variant<Literal, LinkRef>;

/// Doubles compare by bit pattern so that equality agrees with the
/// serialized text (0.0 and -0.0 are distinct configurations).
bool literal_equal(const Literal& a, const Literal& b) noexcept;
bool input_equal(const InputValue& a, const InputValue& b) noexcept;

/// Canonical JSON text of a literal ("7.5", "\"euler\"", "true").
std::string literal_text(const Literal& value);

inline bool is_link(const InputValue& v) noexcept { return std::holds_alternative<LinkRef>(v); }
inline const LinkRef* as_link(const InputValue& v) noexcept { return std::get_if<LinkRef>(&v); }
inline const Literal* as_literal(const InputValue& v) noexcept { return std::get_if<Literal>(&v); }
inline const std::string* as_string(const InputValue& v) noexcept {
    auto lit = as_literal(v);
    return lit ? std::get_if<std::string>(lit) : nullptr;
}

struct Node {
    std::string class_type;
    std::map<std::string, InputValue> inputs;
    /// Per-node fields other than class_type/inputs (e.g. "_meta"), kept verbatim.
    Json extras = Json::object();

    friend bool operator==(const Node& a, const Node& b);
};

/// A validated, immutable ComfyUI API-format flow.
///
/// Construction always checks: at least one node, non-empty class types,
/// every link resolves, and the link graph is acyclic.
class WorkflowGraph {
public:
    using NodeMap = std::map<NodeId, Node>;

    static WorkflowGraph from_nodes(NodeMap nodes);

    const NodeMap& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept;
    bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }
    const Node& node(const NodeId& id) const;

    /// Node ids in dependency order (sources first, ties by id).
    std::vector<NodeId> topological_order() const;

    /// Copy with one literal input replaced. Topology is untouched.
    WorkflowGraph with_literal(const NodeId& id, const std::string& input, Literal value) const;

    friend bool operator==(const WorkflowGraph&, const WorkflowGraph&) = default;

private:
    explicit WorkflowGraph(NodeMap nodes) : nodes_(std::move(nodes)) {}
    NodeMap nodes_;
};

WorkflowGraph parse_flow(std::string_view json_text);
WorkflowGraph flow_from_json(const Json& doc);

/// Canonical form: compact JSON, node and input keys in byte-lexicographic
/// order, floats in shortest round-trip decimal.
std::string serialize_flow(const WorkflowGraph& graph);
Json flow_to_json(const WorkflowGraph& graph);

/// Reference cycle check that enumerates every simple path. Exponential; for
/// small graphs only.
bool has_cycle_by_path_enumeration(const WorkflowGraph::NodeMap& nodes);

struct FlowLineage {
    FlowId template_id;
    std::vector<std::string> mutations;

    friend bool operator==(const FlowLineage&, const FlowLineage&) = default;
};

struct CorpusEntry {
    FlowId id;
    WorkflowGraph graph;
    FlowLineage lineage;
};

using Corpus = std::vector<CorpusEntry>;

const CorpusEntry* find_flow(const Corpus& corpus, const FlowId& id);

}  // namespace flowpick

template <>
struct std::hash<flowpick::FlowId> {
    std::size_t operator()(const flowpick::FlowId& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
