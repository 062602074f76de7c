// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace autoodd {

struct ChatMessage {
    std::string role; // system | user | assistant
    std::string content;
};

/// Chat-completion wire interface: a message array goes in, the assistant's
/// reply text comes out. Throws TransportError when the transport gives up.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
};

/// Serves recorded assistant replies in order, one per complete() call.
/// Lets the full LLM-agent path run deterministically offline.
class ReplayChatClient final : public ChatClient {
public:
    explicit ReplayChatClient(std::vector<std::string> replies);

    /// Loads a JSON array of reply strings.
    static ReplayChatClient from_file(const std::string& path);

    std::string complete(const std::vector<ChatMessage>& messages) override;

    std::size_t served() const { return next_; }
    std::size_t remaining() const { return replies_.size() - next_; }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

/// De-facto chat-completion HTTP client: POST {model, messages} to
/// <base_url>/chat/completions, read choices[0].message.content. Retries
/// transport failures with backoff before raising TransportError.
class HttpChatClient final : public ChatClient {
public:
    struct Options {
        std::string base_url;
        std::string api_key;
        std::string model;
        std::chrono::milliseconds timeout{60000};
        int max_attempts = 3;
    };

    /// Reads AUTOODD_LLM_BASE_URL, AUTOODD_LLM_API_KEY, AUTOODD_LLM_MODEL.
    static Options options_from_env();

    explicit HttpChatClient(Options options);

    std::string complete(const std::vector<ChatMessage>& messages) override;

private:
    Options options_;
    std::string host_port_;
    std::string base_path_;
};

} // namespace autoodd
