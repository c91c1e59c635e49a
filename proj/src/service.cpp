// SPDX-License-Identifier: Apache-2.0
#include <skillloop/remote_backend.hpp>
#include <skillloop/scripted_backend.hpp>
#include <skillloop/service.hpp>

#include <fmt/format.h>
#include <httplib.h>

#include <filesystem>

namespace skillloop
{

namespace
{

using json = nlohmann::json;

void reply(httplib::Response& res, int status, const json& body)
{
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message)
{
    reply(res, status, { { "error", message } });
}

/// Accepts {"text": ...} or a raw text body.
std::string text_field(const httplib::Request& req)
{
    const auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_object())
    {
        if (!doc.contains("text") || !doc["text"].is_string())
            throw std::invalid_argument("expected {\"text\": string}");
        return doc["text"].get<std::string>();
    }
    return req.body;
}

template <typename Fn>
void guarded(httplib::Response& res, int success_status, Fn fn)
{
    try
    {
        reply(res, success_status, fn());
    }
    catch (const UnknownSession& e)
    {
        reply_error(res, 404, e.what());
    }
    catch (const std::exception& e)
    {
        reply_error(res, 400, e.what());
    }
}

} // namespace

Service::Service(ServiceOptions options): options_(std::move(options)), server_(std::make_unique<httplib::Server>())
{
    install_routes();
}

Service::~Service()
{
    stop();
}

std::shared_ptr<Session> Service::session(const std::string& session_id) const
{
    const auto lock = std::scoped_lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end())
        throw UnknownSession("unknown session '" + session_id + "'");
    return it->second;
}

json Service::load_scenario(const std::string& scenario_text,
                            std::optional<std::string> policy_text,
                            std::optional<std::uint64_t> seed)
{
    auto scenario = parse_scenario(scenario_text, "<uploaded scenario>");
    auto backend = std::unique_ptr<Backend> {};
    auto recorded_policy = std::string {};
    if (policy_text)
    {
        backend = std::make_unique<ScriptedBackend>(ScriptedPolicy::parse(*policy_text, "<uploaded policy>"));
        recorded_policy = *policy_text;
    }
    else if (options_.remote_spec)
        backend = std::make_unique<RemoteBackend>(parse_remote_spec(*options_.remote_spec));
    else if (!options_.default_policy_text.empty())
    {
        backend = std::make_unique<ScriptedBackend>(ScriptedPolicy::parse(options_.default_policy_text, "<default policy>"));
        recorded_policy = options_.default_policy_text;
    }
    else
        throw std::invalid_argument("no policy uploaded and the service has no default backend");

    auto id = std::string {};
    {
        const auto lock = std::scoped_lock(mutex_);
        id = fmt::format("s{}", next_id_++);
    }
    auto session_options = SessionOptions {
        .seed = seed.value_or(scenario.seed),
        .max_critic_rounds = options_.max_critic_rounds,
        .budget = options_.budget,
        .policy_text = recorded_policy,
    };
    if (options_.log_dir)
    {
        std::filesystem::create_directories(*options_.log_dir);
        session_options.log_path = (std::filesystem::path(*options_.log_dir) / (id + ".log")).string();
    }
    auto created = std::make_shared<Session>(id, std::move(scenario), std::move(backend), std::move(session_options));
    {
        const auto lock = std::scoped_lock(mutex_);
        sessions_.emplace(id, created);
    }
    return handle(id);
}

json Service::submit_utterance(const std::string& session_id, const std::string& text)
{
    const auto target = session(session_id);
    if (text.empty())
        throw std::invalid_argument("utterance must be non-empty");
    const auto started = target->begin_or_redirect(text);
    return { { "accepted", true }, { "started", started }, { "delivered_as", started ? "utterance" : "event" } };
}

json Service::inject_event(const std::string& session_id, const std::string& text)
{
    const auto seq = session(session_id)->inject_event(text);
    return { { "accepted", true }, { "seq", seq } };
}

json Service::set_estop(const std::string& session_id, bool engaged)
{
    const auto target = session(session_id);
    target->request_estop(engaged);
    return { { "accepted", true }, { "engaged", engaged } };
}

json Service::handle(const std::string& session_id) const
{
    const auto target = session(session_id);
    const auto world = target->world();
    return {
        { "session", target->id() },
        { "scenario", target->scenario().id },
        { "platform", to_string(target->scenario().platform) },
        { "seed", target->options().seed },
        { "status", to_string(target->status()) },
        { "locations", world.locations.size() },
        { "objects", world.objects.size() },
    };
}

json Service::state(const std::string& session_id) const
{
    const auto target = session(session_id);
    auto body = json {
        { "session", session_id },
        { "status", to_string(target->status()) },
        { "world", json::parse(describe_state(target->world())) },
    };
    if (const auto report = target->last_report())
        body["report"] = report->to_json();
    return body;
}

json Service::snapshot(const std::string& session_id) const
{
    const auto snap = session(session_id)->snapshot();
    auto predicates = json::array();
    for (const auto& p: snap.predicates)
    {
        auto item = json { { "name", p.name }, { "args", p.args } };
        if (p.age)
            item["age"] = *p.age;
        predicates.push_back(std::move(item));
    }
    return { { "tick", snap.tick }, { "text", snap.rendered_text }, { "predicates", predicates } };
}

json Service::list() const
{
    auto ids = std::vector<std::string> {};
    {
        const auto lock = std::scoped_lock(mutex_);
        for (const auto& [id, _]: sessions_)
            ids.push_back(id);
    }
    auto out = json::array();
    for (const auto& id: ids)
        out.push_back(handle(id));
    return out;
}

void Service::install_routes()
{
    auto& server = *server_;
    server.set_default_headers({ { "Access-Control-Allow-Origin", "*" } });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });

    server.Post("/scenario", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 201, [&] {
            const auto doc = json::parse(req.body, nullptr, false);
            if (doc.is_object() && doc.contains("scenario"))
            {
                auto policy = doc.contains("policy") ? std::optional(doc["policy"].get<std::string>()) : std::nullopt;
                auto seed = doc.contains("seed") ? std::optional(doc["seed"].get<std::uint64_t>()) : std::nullopt;
                return load_scenario(doc["scenario"].get<std::string>(), std::move(policy), seed);
            }
            auto seed = std::optional<std::uint64_t> {};
            if (req.has_param("seed"))
                seed = std::stoull(req.get_param_value("seed"));
            return load_scenario(req.body, std::nullopt, seed);
        });
    });
    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, 200, [&] { return list(); });
    });
    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 200, [&] { return handle(req.matches[1]); });
    });
    server.Post(R"(/sessions/([^/]+)/utterance)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 202, [&] { return submit_utterance(req.matches[1], text_field(req)); });
    });
    server.Post(R"(/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 202, [&] {
            const auto id = std::string(req.matches[1]);
            session(id);
            return inject_event(id, text_field(req));
        });
    });
    server.Post(R"(/sessions/([^/]+)/estop)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 202, [&] {
            const auto id = std::string(req.matches[1]);
            session(id);
            const auto doc = json::parse(req.body, nullptr, false);
            if (!doc.is_object() || !doc.contains("engaged") || !doc["engaged"].is_boolean())
                throw std::invalid_argument("expected {\"engaged\": bool}");
            return set_estop(id, doc["engaged"].get<bool>());
        });
    });
    server.Get(R"(/sessions/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 200, [&] { return state(req.matches[1]); });
    });
    server.Get(R"(/sessions/([^/]+)/snapshot)", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, 200, [&] { return snapshot(req.matches[1]); });
    });
    server.Get(R"(/sessions/([^/]+)/log)", [this](const httplib::Request& req, httplib::Response& res) {
        auto target = std::shared_ptr<Session> {};
        try
        {
            target = session(req.matches[1]);
        }
        catch (const UnknownSession& e)
        {
            reply_error(res, 404, e.what());
            return;
        }
        const auto follow = !req.has_param("follow") || req.get_param_value("follow") != "false";
        auto next = std::make_shared<std::size_t>(0);
        res.set_chunked_content_provider(
            "application/x-ndjson",
            [this, target, follow, next](std::size_t, httplib::DataSink& sink) {
                const auto& log = target->log();
                auto batch = follow ? log.wait_for_more(*next, std::chrono::milliseconds(100)) : log.entries_from(*next);
                for (const auto& entry: batch)
                {
                    const auto line = entry.to_line() + "\n";
                    if (!sink.write(line.data(), line.size()))
                        return false;
                }
                *next += batch.size();
                const auto settled = target->status() == SessionStatus::finished && log.closed() && log.size() == *next;
                if (!follow || settled || stopping_)
                    sink.done();
                return true;
            });
    });
}

int Service::start(const std::string& host, int port)
{
    const auto bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw std::runtime_error(fmt::format("cannot bind {}:{}", host, port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void Service::serve(const std::string& host, int port)
{
    if (!server_->listen(host, port))
        throw std::runtime_error(fmt::format("cannot listen on {}:{}", host, port));
}

void Service::stop()
{
    stopping_ = true;
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
    auto sessions = std::map<std::string, std::shared_ptr<Session>> {};
    {
        const auto lock = std::scoped_lock(mutex_);
        sessions = sessions_;
    }
    for (const auto& [_, s]: sessions)
        s->wait();
}

} // namespace skillloop
