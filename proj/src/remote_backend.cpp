// SPDX-License-Identifier: Apache-2.0
#include <skillloop/remote_backend.hpp>
#include <skillloop/scripted_backend.hpp>

#include <fmt/format.h>
#include <httplib.h>

#include <cstdlib>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

std::string trim(std::string text)
{
    const auto first = text.find_first_not_of(" \t");
    const auto last = text.find_last_not_of(" \t");
    if (first == std::string::npos)
        return {};
    return text.substr(first, last - first + 1);
}

} // namespace

json build_chat_request(const BackendRequest& request, const RemoteBackendConfig& config)
{
    const auto& agent = default_agent_config(request.agent);
    auto messages = json::array();
    if (!request.system_prompt.empty())
        messages.push_back({ { "role", "system" }, { "content", request.system_prompt } });

    auto call_counter = 0;
    auto last_call_id = std::string {};
    for (const auto& message: request.history)
    {
        if (message.role == "assistant" && message.tool_call)
        {
            last_call_id = fmt::format("call_{}", ++call_counter);
            messages.push_back({
                { "role", "assistant" },
                { "content", message.content.empty() ? json(nullptr) : json(message.content) },
                { "tool_calls",
                  json::array({ {
                      { "id", last_call_id },
                      { "type", "function" },
                      { "function", { { "name", message.tool_call->tool }, { "arguments", message.tool_call->arguments.dump() } } },
                  } }) },
            });
        }
        else if (message.role == "tool")
        {
            messages.push_back({ { "role", "tool" }, { "tool_call_id", last_call_id }, { "content", message.content } });
        }
        else
        {
            messages.push_back({ { "role", message.role }, { "content", message.content } });
        }
    }

    auto body = json {
        { "model", config.model.value_or(agent.model_id) },
        { "reasoning_effort", to_string(config.reasoning_effort.value_or(agent.reasoning_effort)) },
        { "messages", messages },
    };
    if (!request.tool_schemas.empty())
    {
        body["tools"] = request.tool_schemas;
        body["parallel_tool_calls"] = false;
    }
    if (agent.output_schema == OutputSchema::boolean)
    {
        body["response_format"] = {
            { "type", "json_schema" },
            { "json_schema",
              {
                  { "name", "route" },
                  { "strict", true },
                  { "schema",
                    {
                        { "type", "object" },
                        { "properties", { { "actionable", { { "type", "boolean" } } } } },
                        { "required", { "actionable" } },
                        { "additionalProperties", false },
                    } },
              } },
        };
    }
    return body;
}

BackendResponse parse_chat_response(const json& response)
{
    try
    {
        const auto& message = response.at("choices").at(0).at("message");
        if (message.contains("tool_calls") && message["tool_calls"].is_array() && !message["tool_calls"].empty())
        {
            const auto& function = message["tool_calls"][0].at("function");
            auto call = ToolCall { function.at("name").get<std::string>() };
            const auto& arguments = function.at("arguments");
            if (arguments.is_string())
            {
                // Unparseable arguments are passed through so schema validation reports them.
                call.arguments = json::parse(arguments.get<std::string>(), nullptr, false);
                if (call.arguments.is_discarded())
                    call.arguments = arguments;
            }
            else
                call.arguments = arguments;
            return call;
        }
        const auto& content = message.at("content");
        return FinalText { content.is_string() ? content.get<std::string>() : content.dump() };
    }
    catch (const json::exception& e)
    {
        throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config): config_(std::move(config))
{
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw BackendError("remote endpoint must be an absolute URL: " + config_.endpoint);
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    base_url_ = config_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : config_.endpoint.substr(path_start);
    if (config_.api_key.empty())
        if (const auto* key = std::getenv("OPENAI_API_KEY"))
            config_.api_key = key;
}

BackendResponse RemoteBackend::complete(const BackendRequest& request)
{
    auto client = httplib::Client(base_url_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto headers = httplib::Headers {};
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto body = build_chat_request(request, config_).dump();
    const auto result = client.Post(path_, headers, body, "application/json");
    if (!result)
        throw BackendError(fmt::format("request to {} failed: {}", config_.endpoint, httplib::to_string(result.error())));
    if (result->status != 200)
        throw BackendError(fmt::format("{} returned HTTP {}: {}", config_.endpoint, result->status, result->body));

    const auto parsed = json::parse(result->body, nullptr, false);
    if (parsed.is_discarded())
        throw BackendError("remote backend returned invalid JSON");
    return parse_chat_response(parsed);
}

std::string RemoteBackend::describe() const
{
    return "remote:" + config_.endpoint;
}

RemoteBackendConfig parse_remote_spec(const std::string& spec)
{
    auto parts = std::vector<std::string> {};
    auto start = std::size_t { 0 };
    while (true)
    {
        const auto comma = spec.find(',', start);
        parts.push_back(trim(spec.substr(start, comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    auto config = RemoteBackendConfig { .endpoint = parts.at(0) };
    if (parts.size() > 1 && !parts[1].empty())
        config.model = parts[1];
    if (parts.size() > 2 && !parts[2].empty())
        config.reasoning_effort = parse_reasoning_effort(parts[2]);
    return config;
}

std::unique_ptr<Backend> make_backend(const std::string& spec)
{
    if (spec.starts_with("scripted:"))
        return std::make_unique<ScriptedBackend>(ScriptedPolicy::load(spec.substr(9)));
    if (spec.starts_with("remote:"))
        return std::make_unique<RemoteBackend>(parse_remote_spec(spec.substr(7)));
    throw std::invalid_argument("backend must be 'scripted:<policy file>' or 'remote:<url>,<model>,<effort>', got '" + spec + "'");
}

} // namespace skillloop
