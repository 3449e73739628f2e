#include "flowpick/http_clients.hpp"

#include <thread>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"
#include "httplib.h"

namespace flowpick {

Endpoint Endpoint::parse(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(Errc::Config, "URL needs a scheme: " + url, url);
    auto path = url.find('/', scheme + 3);
    Endpoint e;
    e.origin = url.substr(0, path);
    e.prefix = path == std::string::npos ? "" : url.substr(path);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

namespace {

httplib::Client make_client(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
    httplib::Client cli(endpoint.origin);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count() + 1);
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count() + 1);
    return cli;
}

httplib::Headers auth_headers(const std::string& token) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return h;
}

Json parse_body(const std::string& body, Errc code, const std::string& what) {
    try {
        return Json::parse(body);
    } catch (const Json::exception& e) {
        throw Error(code, what + " returned invalid JSON: " + e.what());
    }
}

/// First node id mentioned by a ComfyUI error payload, if any.
std::string failing_node(const Json& body) {
    if (auto ne = body.find("node_errors"); ne != body.end() && ne->is_object() && !ne->empty()) {
        return ne->begin().key();
    }
    if (auto status = body.find("status"); status != body.end()) {
        for (const auto& msg : status->value("messages", Json::array())) {
            if (msg.is_array() && msg.size() == 2 && msg[0] == "execution_error") {
                const auto& detail = msg[1];
                if (detail.contains("node_id")) return detail["node_id"].is_string() ? detail["node_id"].get<std::string>()
                                                                                     : detail["node_id"].dump();
            }
        }
    }
    return {};
}

}  // namespace

HttpExecutor::HttpExecutor(Options options) : options_(std::move(options)), endpoint_(Endpoint::parse(options_.base_url)) {}

ImageHandle HttpExecutor::submit(const GenerationJob& job) {
    auto cli = make_client(endpoint_, options_.timeout);
    const auto headers = auth_headers(options_.auth_token);
    const Json payload = {{"prompt", flow_to_json(job.resolved_graph)}, {"client_id", "flowpick"}};

    httplib::Result res;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
        res = cli.Post(endpoint_.prefix + "/prompt", headers, payload.dump(), "application/json");
        if (res) break;
    }
    if (!res) {
        throw Error(Errc::ExecutorUnavailable, "POST /prompt to " + endpoint_.origin + " failed: " + httplib::to_string(res.error()));
    }
    Json body = parse_body(res->body, Errc::ExecutionFailed, "executor");
    if (res->status != 200 || body.contains("error")) {
        auto node = failing_node(body);
        throw Error(Errc::ExecutionFailed, "executor rejected flow " + job.flow_id.str() + ": " + res->body, node);
    }
    const auto prompt_id = body.at("prompt_id").get<std::string>();

    const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
    Json entry;
    for (;;) {
        auto h = cli.Get(endpoint_.prefix + "/history/" + prompt_id, headers);
        if (h && h->status == 200) {
            Json hist = parse_body(h->body, Errc::ExecutionFailed, "history");
            if (hist.contains(prompt_id)) {
                entry = hist[prompt_id];
                break;
            }
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            throw Error(Errc::Timeout,
                        "generation " + prompt_id + " did not finish within " +
                            std::to_string(std::chrono::duration_cast<std::chrono::seconds>(options_.timeout).count()) +
                            " seconds");
        }
        std::this_thread::sleep_for(options_.poll_interval);
    }

    if (auto status = entry.find("status"); status != entry.end() && status->value("status_str", "") == "error") {
        throw Error(Errc::ExecutionFailed, "generation " + prompt_id + " failed", failing_node(entry));
    }

    // Outputs are keyed by node id; nlohmann iterates them in sorted order.
    const Json outputs = entry.value("outputs", Json::object());
    const Json* image = nullptr;
    for (const auto& [node, out] : outputs.items()) {
        if (out.contains("images") && !out["images"].empty()) {
            image = &out["images"][0];
            break;
        }
    }
    if (!image) throw Error(Errc::ExecutionFailed, "generation " + prompt_id + " produced no image");

    httplib::Params params{{"filename", image->value("filename", "")},
                           {"subfolder", image->value("subfolder", "")},
                           {"type", image->value("type", "output")}};
    auto view = cli.Get(endpoint_.prefix + "/view", params, headers);
    if (!view || view->status != 200) {
        throw Error(Errc::ExecutorUnavailable, "could not fetch image for generation " + prompt_id);
    }
    auto path = options_.image_dir / (job.prompt_id + "__" + job.flow_id.str() + "__" + std::to_string(job.seed) + ".png");
    write_text_file(path, view->body);
    return {path.string(), job.prompt_id, job.flow_id, job.seed};
}

HttpScorer::HttpScorer(std::string name, std::string url, std::chrono::milliseconds timeout)
    : name_(std::move(name)), endpoint_(Endpoint::parse(url)), timeout_(timeout) {}

double HttpScorer::score(const ImageHandle& image, std::string_view prompt_text) {
    std::string bytes;
    try {
        bytes = read_text_file(image.ref);
    } catch (const Error& e) {
        throw Error(Errc::ScorerUnavailable, name_ + ": " + e.what(), name_);
    }
    const Json payload = {{"image", httplib::detail::base64_encode(bytes)}, {"prompt", prompt_text}};
    auto cli = make_client(endpoint_, timeout_);
    auto res = cli.Post(endpoint_.prefix.empty() ? "/" : endpoint_.prefix, payload.dump(), "application/json");
    if (!res || res->status != 200) {
        throw Error(Errc::ScorerUnavailable,
                    "scorer " + name_ + " failed" + (res ? " with HTTP " + std::to_string(res->status) : ""), name_);
    }
    try {
        double v = Json::parse(res->body).at("score").get<double>();
        if (!std::isfinite(v)) throw Error(Errc::ScorerUnavailable, "scorer " + name_ + " returned a non-finite score", name_);
        return v;
    } catch (const Json::exception& e) {
        throw Error(Errc::ScorerUnavailable, "scorer " + name_ + " returned " + res->body, name_);
    }
}

HttpLlm::HttpLlm(std::string url, std::string api_key, std::chrono::milliseconds timeout)
    : endpoint_(Endpoint::parse(url)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::string HttpLlm::complete(const LlmRequest& request) {
    Json payload = {{"user", request.user}, {"max_tokens", request.max_tokens}, {"temperature", request.temperature}};
    if (request.system) payload["system"] = *request.system;
    auto cli = make_client(endpoint_, timeout_);
    auto res = cli.Post(endpoint_.prefix.empty() ? "/" : endpoint_.prefix, auth_headers(api_key_), payload.dump(),
                        "application/json");
    if (!res || res->status != 200) {
        throw Error(Errc::LlmUnavailable,
                    "LLM endpoint " + endpoint_.origin + " failed" + (res ? " with HTTP " + std::to_string(res->status) : ""));
    }
    try {
        return Json::parse(res->body).at("text").get<std::string>();
    } catch (const Json::exception& e) {
        throw Error(Errc::LlmUnavailable, std::string("LLM response has no text field: ") + e.what());
    }
}

}  // namespace flowpick
