#include <cstdlib>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "topogen/runtime.hpp"

namespace topogen {

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ConfigError("remote backend: base_url is empty");
    if (cfg_.max_retries < 0) throw ConfigError("remote backend: max_retries must be >= 0");
}

std::string RemoteBackend::complete(const Prompt& prompt, const AgentCall& call) {
    nlohmann::json request{
        {"model", cfg_.model},
        {"messages",
         {{{"role", "system"}, {"content", prompt.system_part}},
          {{"role", "user"}, {"content", prompt.user_part}}}},
        {"temperature", cfg_.temperature}};
    const std::string body = request.dump();

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key != nullptr && *key != '\0')
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_seconds, 0);
        client.set_read_timeout(cfg_.timeout_seconds, 0);
        auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) {
            last_error = "unparseable response body";
            continue;
        }
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            last_error = "response missing choices[0].message.content";
            continue;
        }
    }
    throw BackendError("remote backend gave up after " + std::to_string(cfg_.max_retries + 1) +
                       " attempts: " + last_error + " (agent " + std::to_string(call.node) +
                       ", round " + std::to_string(call.round) + ")");
}

}  // namespace topogen
