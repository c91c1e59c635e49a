// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <skillloop/backend.hpp>

#include <chrono>
#include <optional>
#include <string>

namespace skillloop
{

struct RemoteBackendConfig
{
    /// Full chat-completions URL, e.g. http://localhost:8080/v1/chat/completions
    std::string endpoint;
    /// Overrides the per-agent default model when set.
    std::optional<std::string> model;
    std::optional<ReasoningEffort> reasoning_effort;
    std::chrono::seconds timeout { 120 };
    /// Sent as a bearer token when non-empty. Defaults to $OPENAI_API_KEY.
    std::string api_key;
};

/// Chat-completion request body for one agent turn.
nlohmann::json build_chat_request(const BackendRequest& request, const RemoteBackendConfig& config);

/// Takes the first tool call of the first choice, or its content as final text.
BackendResponse parse_chat_response(const nlohmann::json& response);

class RemoteBackend final: public Backend
{
  public:
    explicit RemoteBackend(RemoteBackendConfig config);

    BackendResponse complete(const BackendRequest& request) override;
    std::string describe() const override;

  private:
    RemoteBackendConfig config_;
    std::string base_url_;
    std::string path_;
};

RemoteBackendConfig parse_remote_spec(const std::string& spec);

} // namespace skillloop
