// SPDX-License-Identifier: Apache-2.0
#include "autoodd/chat_client.hpp"

#include "autoodd/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace autoodd {

ReplayChatClient::ReplayChatClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}

ReplayChatClient ReplayChatClient::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open replay transcript '" + path + "'");
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("replay transcript parse error: " + std::string(e.what()));
    }
    if (!doc.is_array()) {
        throw ConfigError("replay transcript must be a JSON array of reply strings");
    }
    std::vector<std::string> replies;
    replies.reserve(doc.size());
    for (const auto& r : doc) {
        if (!r.is_string()) {
            throw ConfigError("replay transcript entries must be strings");
        }
        replies.push_back(r.get<std::string>());
    }
    return ReplayChatClient(std::move(replies));
}

std::string ReplayChatClient::complete(const std::vector<ChatMessage>& messages) {
    (void)messages;
    if (next_ >= replies_.size()) {
        throw TransportError("replay transcript exhausted after " + std::to_string(next_) + " replies");
    }
    return replies_[next_++];
}

HttpChatClient::Options HttpChatClient::options_from_env() {
    Options opts;
    if (const char* v = std::getenv("AUTOODD_LLM_BASE_URL")) {
        opts.base_url = v;
    }
    if (const char* v = std::getenv("AUTOODD_LLM_API_KEY")) {
        opts.api_key = v;
    }
    if (const char* v = std::getenv("AUTOODD_LLM_MODEL")) {
        opts.model = v;
    }
    return opts;
}

HttpChatClient::HttpChatClient(Options options) : options_(std::move(options)) {
    if (options_.base_url.empty()) {
        throw ConfigError("llm transport: AUTOODD_LLM_BASE_URL is not set");
    }
    if (options_.model.empty()) {
        throw ConfigError("llm transport: AUTOODD_LLM_MODEL is not set");
    }
    if (options_.base_url.rfind("https://", 0) == 0) {
        throw ConfigError("llm transport: https endpoints are not supported, use an http proxy");
    }
    std::string url = options_.base_url;
    while (!url.empty() && url.back() == '/') {
        url.pop_back();
    }
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("llm transport: base url must include a scheme (http://...)");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_port_ = url;
        base_path_ = "";
    } else {
        host_port_ = url.substr(0, path_start);
        base_path_ = url.substr(path_start);
    }
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages) {
    nlohmann::json body;
    body["model"] = options_.model;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    }
    const std::string payload = body.dump();

    std::string last_error;
    auto backoff = std::chrono::milliseconds(500);
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
        httplib::Client client(host_port_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
        client.set_connection_timeout(static_cast<time_t>(secs.count()), 0);
        client.set_read_timeout(static_cast<time_t>(secs.count()), 0);
        client.set_write_timeout(static_cast<time_t>(secs.count()), 0);
        httplib::Headers headers;
        if (!options_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + options_.api_key);
        }
        const auto res = client.Post(base_path_ + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("llm transport: status " + std::to_string(res->status) + ": " + res->body);
        }
        try {
            const auto doc = nlohmann::json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError("llm transport: malformed completion response: " + std::string(e.what()));
        }
    }
    throw TransportError("llm transport: giving up after " + std::to_string(options_.max_attempts) +
                         " attempts: " + last_error);
}

} // namespace autoodd
