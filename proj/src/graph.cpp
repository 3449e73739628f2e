#include "flowpick/graph.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <set>

#include "flowpick/error.hpp"

namespace flowpick {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedJson: return "MalformedJson";
        case Errc::UnknownLinkTarget: return "UnknownLinkTarget";
        case Errc::CycleDetected: return "CycleDetected";
        case Errc::EmptyGraph: return "EmptyGraph";
        case Errc::BadLinkShape: return "BadLinkShape";
        case Errc::NoPromptSlot: return "NoPromptSlot";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::RegistryInvariant: return "RegistryInvariant";
        case Errc::NoMatchingSlot: return "NoMatchingSlot";
        case Errc::TemplateInvalid: return "TemplateInvalid";
        case Errc::ExecutorUnavailable: return "ExecutorUnavailable";
        case Errc::ExecutionFailed: return "ExecutionFailed";
        case Errc::Timeout: return "Timeout";
        case Errc::ScorerUnavailable: return "ScorerUnavailable";
        case Errc::DegenerateScorer: return "DegenerateScorer";
        case Errc::MissingScorer: return "MissingScorer";
        case Errc::StoreCorrupt: return "StoreCorrupt";
        case Errc::NoLabelsAssigned: return "NoLabelsAssigned";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::LlmUnavailable: return "LlmUnavailable";
        case Errc::NoValidFlowId: return "NoValidFlowId";
        case Errc::MissingFlow: return "MissingFlow";
        case Errc::NoJsonFound: return "NoJsonFound";
        case Errc::InvalidFlow: return "InvalidFlow";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::Config: return "Config";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

bool literal_equal(const Literal& a, const Literal& b) noexcept {
    if (a.index() != b.index()) return false;
    if (auto da = std::get_if<double>(&a)) {
        return std::bit_cast<std::uint64_t>(*da) == std::bit_cast<std::uint64_t>(std::get<double>(b));
    }
    return a == b;
}

bool input_equal(const InputValue& a, const InputValue& b) noexcept {
    if (a.index() != b.index()) return false;
    if (auto la = as_literal(a)) return literal_equal(*la, *as_literal(b));
    return *as_link(a) == *as_link(b);
}

bool operator==(const Node& a, const Node& b) {
    if (a.class_type != b.class_type || a.extras != b.extras) return false;
    return std::equal(a.inputs.begin(), a.inputs.end(), b.inputs.begin(), b.inputs.end(),
                      [](const auto& x, const auto& y) {
                          return x.first == y.first && input_equal(x.second, y.second);
                      });
}

namespace {

Json literal_to_json(const Literal& value) {
    return std::visit([](const auto& v) { return Json(v); }, value);
}

Json input_to_json(const InputValue& value) {
    if (auto link = as_link(value)) return Json::array({link->node, link->output});
    return literal_to_json(*as_literal(value));
}

Literal normalize_unsigned(std::uint64_t v) {
    if (v <= static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        return static_cast<std::int64_t>(v);
    }
    return v;
}

InputValue input_from_json(const NodeId& node, const std::string& name, const Json& value) {
    switch (value.type()) {
        case Json::value_t::string: return Literal(value.get<std::string>());
        case Json::value_t::boolean: return Literal(value.get<bool>());
        case Json::value_t::number_integer: return Literal(value.get<std::int64_t>());
        case Json::value_t::number_unsigned: return normalize_unsigned(value.get<std::uint64_t>());
        case Json::value_t::number_float: return Literal(value.get<double>());
        case Json::value_t::array: {
            if (value.size() != 2 || !value[0].is_string() || !value[1].is_number_unsigned()) {
                throw Error(Errc::BadLinkShape,
                            "input '" + name + "' of node '" + node +
                                "' must be [node_id, output_index], got " + value.dump(),
                            node);
            }
            return LinkRef{value[0].get<std::string>(), value[1].get<std::uint64_t>()};
        }
        default:
            throw Error(Errc::MalformedJson,
                        "input '" + name + "' of node '" + node + "' has unsupported value " +
                            value.dump(),
                        node);
    }
}

Node node_from_json(const NodeId& id, const Json& body) {
    if (!body.is_object()) {
        throw Error(Errc::MalformedJson, "node '" + id + "' is not an object", id);
    }
    Node node;
    auto ct = body.find("class_type");
    if (ct == body.end() || !ct->is_string()) {
        throw Error(Errc::MalformedJson, "node '" + id + "' has no string class_type", id);
    }
    node.class_type = ct->get<std::string>();
    if (auto in = body.find("inputs"); in != body.end()) {
        if (!in->is_object()) {
            throw Error(Errc::MalformedJson, "node '" + id + "' inputs is not an object", id);
        }
        for (const auto& [name, value] : in->items()) {
            node.inputs.emplace(name, input_from_json(id, name, value));
        }
    }
    for (const auto& [key, value] : body.items()) {
        if (key != "class_type" && key != "inputs") node.extras[key] = value;
    }
    return node;
}

void validate(const WorkflowGraph::NodeMap& nodes) {
    if (nodes.empty()) throw Error(Errc::EmptyGraph, "flow has no nodes");
    for (const auto& [id, node] : nodes) {
        if (node.class_type.empty()) {
            throw Error(Errc::MalformedJson, "node '" + id + "' has empty class_type", id);
        }
        for (const auto& [name, value] : node.inputs) {
            if (auto link = as_link(value); link && !nodes.count(link->node)) {
                throw Error(Errc::UnknownLinkTarget,
                            "input '" + name + "' of node '" + id + "' links to missing node '" +
                                link->node + "'",
                            link->node);
            }
        }
    }

    // Iterative three-colour DFS along link edges.
    enum class Mark { White, Grey, Black };
    std::map<NodeId, Mark> mark;
    for (const auto& [id, _] : nodes) mark[id] = Mark::White;

    struct Frame {
        const NodeId* id;
        std::map<std::string, InputValue>::const_iterator next;
    };
    for (const auto& [root, _] : nodes) {
        if (mark[root] != Mark::White) continue;
        std::vector<Frame> stack{{&root, nodes.at(root).inputs.begin()}};
        mark[root] = Mark::Grey;
        while (!stack.empty()) {
            auto& top = stack.back();
            const auto& inputs = nodes.at(*top.id).inputs;
            if (top.next == inputs.end()) {
                mark[*top.id] = Mark::Black;
                stack.pop_back();
                continue;
            }
            const auto* link = as_link((top.next++)->second);
            if (!link) continue;
            auto& m = mark[link->node];
            if (m == Mark::Grey) {
                std::string path;
                auto it = std::find_if(stack.begin(), stack.end(),
                                       [&](const Frame& f) { return *f.id == link->node; });
                for (; it != stack.end(); ++it) path += *it->id + " -> ";
                path += link->node;
                throw Error(Errc::CycleDetected, "cycle " + path, path);
            }
            if (m == Mark::White) {
                m = Mark::Grey;
                const auto& target = nodes.find(link->node);
                stack.push_back({&target->first, target->second.inputs.begin()});
            }
        }
    }
}

}  // namespace

std::string literal_text(const Literal& value) { return literal_to_json(value).dump(); }

WorkflowGraph WorkflowGraph::from_nodes(NodeMap nodes) {
    validate(nodes);
    return WorkflowGraph(std::move(nodes));
}

const Node& WorkflowGraph::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::InvalidArgument, "no node '" + id + "'", id);
    return it->second;
}

std::size_t WorkflowGraph::edge_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, node] : nodes_) {
        for (const auto& [__, v] : node.inputs) n += is_link(v) ? 1 : 0;
    }
    return n;
}

std::vector<NodeId> WorkflowGraph::topological_order() const {
    std::map<NodeId, std::size_t> pending;
    std::map<NodeId, std::vector<NodeId>> consumers;
    for (const auto& [id, node] : nodes_) {
        auto& count = pending[id];
        for (const auto& [_, v] : node.inputs) {
            if (auto link = as_link(v)) {
                ++count;
                consumers[link->node].push_back(id);
            }
        }
    }
    std::set<NodeId> ready;
    for (const auto& [id, count] : pending) {
        if (count == 0) ready.insert(id);
    }
    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        NodeId id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (const auto& c : consumers[id]) {
            if (--pending[c] == 0) ready.insert(c);
        }
    }
    return order;
}

WorkflowGraph WorkflowGraph::with_literal(const NodeId& id, const std::string& input,
                                          Literal value) const {
    NodeMap copy = nodes_;
    auto node = copy.find(id);
    if (node == copy.end()) throw Error(Errc::InvalidArgument, "no node '" + id + "'", id);
    auto slot = node->second.inputs.find(input);
    if (slot != node->second.inputs.end() && is_link(slot->second)) {
        throw Error(Errc::InvalidArgument, "input '" + input + "' of node '" + id + "' is a link",
                    id);
    }
    node->second.inputs[input] = std::move(value);
    return WorkflowGraph(std::move(copy));
}

WorkflowGraph flow_from_json(const Json& doc) {
    if (!doc.is_object()) throw Error(Errc::MalformedJson, "flow is not a JSON object");
    WorkflowGraph::NodeMap nodes;
    for (const auto& [id, body] : doc.items()) nodes.emplace(id, node_from_json(id, body));
    return WorkflowGraph::from_nodes(std::move(nodes));
}

WorkflowGraph parse_flow(std::string_view json_text) {
    // nlohmann keeps the last of duplicate keys silently; track keys per open
    // object to reject them instead.
    std::vector<std::set<std::string>> open_keys;
    std::string duplicate;
    auto on_event = [&](int, Json::parse_event_t event, Json& parsed) {
        switch (event) {
            case Json::parse_event_t::object_start: open_keys.emplace_back(); break;
            case Json::parse_event_t::object_end: open_keys.pop_back(); break;
            case Json::parse_event_t::key:
                if (!open_keys.back().insert(parsed.get<std::string>()).second && duplicate.empty()) {
                    duplicate = parsed.get<std::string>();
                }
                break;
            default: break;
        }
        return true;
    };
    Json doc;
    try {
        doc = Json::parse(json_text.begin(), json_text.end(), on_event);
    } catch (const Json::exception& e) {
        throw Error(Errc::MalformedJson, e.what());
    }
    if (!duplicate.empty()) {
        throw Error(Errc::MalformedJson, "duplicate key '" + duplicate + "'", duplicate);
    }
    return flow_from_json(doc);
}

Json flow_to_json(const WorkflowGraph& graph) {
    Json doc = Json::object();
    for (const auto& [id, node] : graph.nodes()) {
        Json body = node.extras.is_object() ? node.extras : Json::object();
        body["class_type"] = node.class_type;
        Json inputs = Json::object();
        for (const auto& [name, value] : node.inputs) inputs[name] = input_to_json(value);
        body["inputs"] = std::move(inputs);
        doc[id] = std::move(body);
    }
    return doc;
}

std::string serialize_flow(const WorkflowGraph& graph) {
    return flow_to_json(graph).dump(-1, ' ', false, Json::error_handler_t::strict);
}

bool has_cycle_by_path_enumeration(const WorkflowGraph::NodeMap& nodes) {
    std::map<NodeId, std::vector<NodeId>> next;
    for (const auto& [id, node] : nodes) {
        for (const auto& [_, v] : node.inputs) {
            if (auto link = as_link(v); link && nodes.count(link->node)) next[id].push_back(link->node);
        }
    }
    // Walk every simple path from every start; a cycle exists iff some path
    // can step back onto its own start.
    std::vector<NodeId> path;
    std::set<NodeId> on_path;
    std::function<bool(const NodeId&)> walk = [&](const NodeId& at) {
        for (const auto& n : next[at]) {
            if (n == path.front()) return true;
            if (on_path.count(n)) continue;
            path.push_back(n);
            on_path.insert(n);
            bool found = walk(n);
            on_path.erase(n);
            path.pop_back();
            if (found) return true;
        }
        return false;
    };
    for (const auto& [start, _] : nodes) {
        path = {start};
        on_path = {start};
        if (walk(start)) return true;
    }
    return false;
}

const CorpusEntry* find_flow(const Corpus& corpus, const FlowId& id) {
    auto it = std::find_if(corpus.begin(), corpus.end(),
                           [&](const CorpusEntry& e) { return e.id == id; });
    return it == corpus.end() ? nullptr : &*it;
}

}  // namespace flowpick
