#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "flowpick/clients.hpp"

namespace flowpick {

/// "http://host:port/prefix" split into the origin and path prefix.
struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // "" or "/something", no trailing slash

    static Endpoint parse(const std::string& url);
};

/// ComfyUI-compatible executor: POST {prefix}/prompt, poll
/// {prefix}/history/<id>, then GET {prefix}/view for the first output image,
/// which is saved under `image_dir`.
class HttpExecutor final : public ExecutorClient {
public:
    struct Options {
        std::string base_url;
        std::string auth_token;  // sent as a bearer token when set
        std::filesystem::path image_dir = "images";
        std::chrono::milliseconds timeout{std::chrono::minutes(5)};
        std::chrono::milliseconds poll_interval{500};
        int retries = 2;  // fixed retries on transport errors
    };

    explicit HttpExecutor(Options options);
    ImageHandle submit(const GenerationJob& job) override;

private:
    Options options_;
    Endpoint endpoint_;
};

/// POST {image: base64, prompt} -> {score}. The image is read from the
/// handle's local path.
class HttpScorer final : public ScorerClient {
public:
    HttpScorer(std::string name, std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(60));
    const std::string& name() const override { return name_; }
    double score(const ImageHandle& image, std::string_view prompt_text) override;

private:
    std::string name_;
    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
};

/// Chat-completion style endpoint: POST {system?, user, max_tokens,
/// temperature} -> {text}.
class HttpLlm final : public LlmClient {
public:
    HttpLlm(std::string url, std::string api_key = {}, std::chrono::milliseconds timeout = std::chrono::minutes(2));
    std::string complete(const LlmRequest& request) override;

private:
    Endpoint endpoint_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

}  // namespace flowpick
