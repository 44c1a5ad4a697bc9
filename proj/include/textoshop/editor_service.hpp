#pragma once

// REST + server-sent-events front end over EditorService.

#include <atomic>
#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "textoshop/document_store.hpp"
#include "textoshop/errors.hpp"
#include "textoshop/wire.hpp"

namespace textoshop {

struct HttpError {
    int status;
    std::string type;
};

/// HTTP status and short type name for an exception thrown by the service.
inline HttpError classify(const std::exception& e)
{
    if (dynamic_cast<const NotFoundError*>(&e)) return {404, "not_found"};
    if (dynamic_cast<const UnknownLayerError*>(&e)) return {404, "unknown_layer"};
    if (dynamic_cast<const ConflictError*>(&e)) return {409, "conflict"};
    if (dynamic_cast<const TimeoutError*>(&e)) return {502, "backend_timeout"};
    if (dynamic_cast<const RemoteError*>(&e)) return {502, "backend_remote"};
    if (dynamic_cast<const BackendError*>(&e)) return {502, "backend"};
    if (dynamic_cast<const NoSplitPointError*>(&e)) return {422, "no_split_point"};
    if (dynamic_cast<const UnreachableTargetError*>(&e)) return {422, "unreachable_target"};
    if (dynamic_cast<const OverlapError*>(&e)) return {422, "overlap"};
    if (dynamic_cast<const HiddenLayerError*>(&e)) return {422, "hidden_layer"};
    if (dynamic_cast<const AnchorError*>(&e)) return {422, "anchor"};
    if (dynamic_cast<const ValidationError*>(&e)) return {422, "validation"};
    if (dynamic_cast<const IndexError*>(&e)) return {422, "index"};
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return {422, "validation"};
    return {500, "internal"};
}

class HttpApi {
public:
    explicit HttpApi(EditorService& service) : svc_(service) { routes(); }

    ~HttpApi() { stop(); }

    httplib::Server& server() noexcept { return server_; }

    /// Binds to an ephemeral port and returns it (or -1).
    int bind_any(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
    bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    bool listen(const std::string& host, int port) { return server_.listen(host, port); }
    void wait_until_ready() { server_.wait_until_ready(); }

    void stop()
    {
        if (stopping_.exchange(true)) return;
        svc_.close_all_subscriptions();
        server_.stop();
    }

    static nlohmann::json state_json(const DocumentRecord& d)
    {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : d.stack.layers) layers.push_back(layer_json(l));
        nlohmann::json frags = nlohmann::json::array();
        for (const auto& f : d.fragments) frags.push_back(to_json(f));
        nlohmann::json log = nlohmann::json::array();
        for (const auto& e : d.op_log) {
            log.push_back({{"tool", e.tool}, {"layer", e.layer}, {"timestamp_ms", e.timestamp_ms}, {"request_digest", e.request_digest}});
        }
        return {
            {"id", d.id},
            {"text", EditorService::text_of(d)},
            {"revision", d.revision},
            {"active_layer", d.stack.active_layer().ordinal},
            {"layers", layers},
            {"fragments", frags},
            {"current_tone", wire::to_json(d.current_tone)},
            {"op_log", log},
            {"created_ms", d.created_ms},
            {"modified_ms", d.modified_ms},
        };
    }

    static nlohmann::json layer_json(const Layer& l)
    {
        return {{"ordinal", l.ordinal}, {"name", l.name}, {"visible", l.visible}, {"edit_count", l.edits.size()}};
    }

    static nlohmann::json result_json(const TransformResult& r)
    {
        return {
            {"changeset", wire::to_json(r.outcome.changeset)},
            {"timeline", wire::to_json(r.timeline)},
            {"text", r.text},
            {"new_selection", wire::to_json(r.outcome.new_selection)},
            {"provenance", wire::to_json(r.outcome.provenance)},
            {"revision", r.revision},
        };
    }

private:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static void send(httplib::Response& res, int status, const nlohmann::json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static nlohmann::json body_of(const httplib::Request& req)
    {
        if (req.body.empty()) return nlohmann::json::object();
        try {
            auto j = nlohmann::json::parse(req.body);
            if (!j.is_object()) throw InvalidRequestError("request body must be a JSON object");
            return j;
        } catch (const nlohmann::json::parse_error&) {
            throw InvalidRequestError("request body is not valid JSON");
        }
    }

    static std::uint64_t parse_u64(const std::string& s, const char* what)
    {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw NotFoundError(std::string("no ") + what + " " + s);
        }
    }

    static SelectionRange selection_of(const nlohmann::json& b)
    {
        return {wire::detail::offset_field(b, "start"), wire::detail::offset_field(b, "end")};
    }

    Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn)
    {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const std::exception& e) {
                const auto [status, type] = classify(e);
                send(res, status, {{"error", {{"type", type}, {"message", e.what()}}}});
            }
        };
    }

    void routes()
    {
        server_.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
        server_.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server_.Post("/api/docs", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            const auto text = wire::detail::optional_field<std::string>(b, "text").value_or("");
            const auto id = svc_.create_document(text);
            send(res, 201, state_json(svc_.get(id)));
        }));

        server_.Get(R"(/api/docs/([^/]+))", guarded([this](const auto& req, auto& res) {
            send(res, 200, state_json(svc_.get(req.matches[1])));
        }));

        server_.Post(R"(/api/docs/([^/]+)/transform)", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const auto b = body_of(req);
            const auto op = wire::detail::field<std::string>(b, "op");
            const SelectionRange sel = selection_of(b);
            if (op == "estimate_tone") {
                const auto [tone, revision] = svc_.estimate_tone(id, sel);
                send(res, 200, {{"tone", wire::to_json(tone)}, {"revision", revision}});
                return;
            }
            const auto params = b.contains("params") ? b.at("params") : nlohmann::json::object();
            const auto request = wire::parse_transform(op, sel, params, svc_.get(id).current_tone);
            send(res, 200, result_json(svc_.apply_transform(id, request)));
        }));

        server_.Post(R"(/api/docs/([^/]+)/undo)", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            auto r = svc_.undo(id);
            auto state = state_json(svc_.get(id));
            state["changeset"] = wire::to_json(r.outcome.changeset);
            state["timeline"] = wire::to_json(r.timeline);
            send(res, 200, state);
        }));

        server_.Post(R"(/api/docs/([^/]+)/fragments)", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            const auto f = svc_.fragment_from_selection(req.matches[1], selection_of(b),
                                                        wire::detail::optional_field<double>(b, "x").value_or(0.0),
                                                        wire::detail::optional_field<double>(b, "y").value_or(0.0),
                                                        wire::detail::optional_field<double>(b, "width"));
            send(res, 201, to_json(f));
        }));

        server_.Patch(R"(/api/docs/([^/]+)/fragments/([^/]+))", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            FragmentPatch p;
            p.text = wire::detail::optional_field<std::string>(b, "text");
            p.x = wire::detail::optional_field<double>(b, "x");
            p.y = wire::detail::optional_field<double>(b, "y");
            p.width = wire::detail::optional_field<double>(b, "width");
            send(res, 200, to_json(svc_.update_fragment(req.matches[1], parse_u64(req.matches[2], "fragment"), p)));
        }));

        server_.Post(R"(/api/docs/([^/]+)/fragments/([^/]+)/drop)", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            const auto op_name = wire::detail::field<std::string>(b, "op");
            const auto op = wire::parse_boolean_op(op_name);
            if (!op) throw InvalidRequestError("unknown boolean op '" + op_name + "'");
            const auto r = svc_.drop_fragment(req.matches[1], parse_u64(req.matches[2], "fragment"), *op, selection_of(b));
            send(res, 200, result_json(r));
        }));

        server_.Post(R"(/api/docs/([^/]+)/layers)", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            const auto l = svc_.create_layer(req.matches[1], wire::detail::optional_field<std::string>(b, "name").value_or(""));
            send(res, 201, layer_json(l));
        }));

        server_.Patch(R"(/api/docs/([^/]+)/layers/([^/]+))", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const auto b = body_of(req);
            LayerPatch p;
            p.name = wire::detail::optional_field<std::string>(b, "name");
            p.visible = wire::detail::optional_field<bool>(b, "visible");
            if (b.contains("index")) p.index = wire::detail::offset_field(b, "index");
            p.active = wire::detail::optional_field<bool>(b, "active");
            svc_.patch_layer(id, parse_u64(req.matches[2], "layer"), p);
            send(res, 200, state_json(svc_.get(id)));
        }));

        server_.Delete(R"(/api/docs/([^/]+)/layers/([^/]+))", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            svc_.delete_layer(id, parse_u64(req.matches[2], "layer"));
            send(res, 200, state_json(svc_.get(id)));
        }));

        server_.Get(R"(/api/docs/([^/]+)/events)", guarded([this](const auto& req, auto& res) {
            auto sub = svc_.subscribe(req.matches[1]);
            res.set_header("Cache-Control", "no-cache");
            auto idle = std::make_shared<int>(0);
            auto greeted = std::make_shared<bool>(false);
            res.set_chunked_content_provider("text/event-stream", [this, sub, idle, greeted](std::size_t, httplib::DataSink& sink) {
                if (!*greeted) {
                    *greeted = true;
                    static constexpr char kHello[] = ": subscribed\n\n";
                    return sink.write(kHello, sizeof(kHello) - 1);
                }
                if (auto ev = sub->wait(std::chrono::milliseconds(250))) {
                    *idle = 0;
                    const std::string frame = "event: change\ndata: " + ev->data + "\n\n";
                    return sink.write(frame.data(), frame.size());
                }
                if (stopping_ || sub->closed()) {
                    sink.done();
                    return true;
                }
                if (++*idle >= 60) {
                    *idle = 0;
                    static constexpr char kPing[] = ": ping\n\n";
                    return sink.write(kPing, sizeof(kPing) - 1);
                }
                return sink.is_writable();
            }, [sub](bool) { sub->close(); });
        }));

        server_.Post("/api/tone/estimate", guarded([this](const auto& req, auto& res) {
            const auto b = body_of(req);
            const auto text = wire::detail::field<std::string>(b, "text");
            if (is_whitespace_only(text)) throw InvalidRequestError("text is empty");
            send(res, 200, wire::to_json(svc_.engine().estimate_tone_of(text)));
        }));
    }

    EditorService& svc_;
    httplib::Server server_;
    std::atomic<bool> stopping_{false};
};

}  // namespace textoshop
