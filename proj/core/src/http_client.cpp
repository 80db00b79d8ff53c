#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "geosynth/qa.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

namespace geosynth {

HttpLlmClient::HttpLlmClient(LlmEndpointConfig config)
    : config_(std::move(config))
{
    if (auto p = config_.problems(); !p.empty()) {
        throw std::invalid_argument("invalid endpoint config: " + p.front());
    }
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key) {
            throw QaError(QaErrorCode::AuthMissing, "environment variable " + config_.api_key_env + " is not set");
        }
        api_key_ = key;
    }
    const auto scheme_end = config_.base_url.find("://") + 3;
    const auto path_start = config_.base_url.find('/', scheme_end);
    origin_ = config_.base_url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
        path_prefix_.pop_back();
    }
    slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_concurrent);
}

std::string HttpLlmClient::complete(const std::string& model, const std::vector<ChatMessage>& messages)
{
    nlohmann::json body = { { "model", model }, { "temperature", 0 }, { "messages", nlohmann::json::array() } };
    for (const auto& m : messages) {
        body["messages"].push_back({ { "role", m.role }, { "content", m.content } });
    }
    const std::string payload = body.dump();

    slots_->acquire();
    struct Release {
        std::counting_semaphore<>* s;
        ~Release() { s->release(); }
    } release { slots_.get() };

    httplib::Client cli(origin_);
    const auto secs = static_cast<time_t>(config_.timeout_s);
    const auto usecs = static_cast<time_t>((config_.timeout_s - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
        }
        auto res = cli.Post(path_prefix_ + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw QaError(QaErrorCode::AuthMissing, "HTTP " + std::to_string(res->status));
        }
        if (res->status != 200) {
            throw QaError(QaErrorCode::EndpointUnavailable, "HTTP " + std::to_string(res->status));
        }
        try {
            return nlohmann::json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw QaError(QaErrorCode::ResponseUnparseable, e.what());
        }
    }
    throw QaError(QaErrorCode::EndpointUnavailable,
        "gave up after " + std::to_string(config_.max_attempts) + " attempts, last: " + last_error);
}

} // namespace geosynth
