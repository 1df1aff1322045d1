#pragma once

// HTTP+JSON facade over the pipeline with a file-backed session store.
//
//   GET  /api/scenes                       scene summaries
//   GET  /api/scenes/{id}                  scene document
//   POST /api/sessions {scene_id}          201 {id, ...}
//   GET  /api/sessions/{id}                session view (phase, status, question, ...)
//   POST /api/sessions/{id}/instruction    {text, token}
//   POST /api/sessions/{id}/answer         {text, token}
//   GET  /api/sessions/{id}/candidates     [{index, layout, objectives, feasible, recommended}]
//   POST /api/sessions/{id}/select         {index | "auto", token}
//   POST /api/sessions/{id}/adjust         {widget, position, token}
//   GET  /api/sessions/{id}/metrics
//
// Errors are {code, message, path}. Mutations of one session are serialized;
// a repeated request token returns the recorded response without re-running.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "autoopt/agents.hpp"
#include "autoopt/error.hpp"
#include "autoopt/pipeline.hpp"

namespace autoopt {

namespace fs = std::filesystem;

/// A session with its service bookkeeping.
struct StoredSession {
    Session session;
    std::string status = "idle";  ///< idle | running | error
    std::string last_error;
    std::map<std::string, json> responses;  ///< request token -> {status, body}

    bool operator==(const StoredSession&) const = default;
};

inline json stored_to_json(const StoredSession& s) {
    return {{"session", session_to_json(s.session)},
            {"status", s.status},
            {"last_error", s.last_error},
            {"responses", s.responses}};
}

inline StoredSession stored_from_json(const json& doc) {
    using namespace detail;
    StoredSession s;
    s.session = session_from_json(require(doc, "session", ""));
    s.status = as_string(require(doc, "status", ""), "/status");
    s.last_error = as_string(require(doc, "last_error", ""), "/last_error");
    for (const auto& [token, r] : require(doc, "responses", "").items()) s.responses[token] = r;
    return s;
}

/// One JSON document per session in `dir`, replaced atomically on save.
class SessionStore {
public:
    explicit SessionStore(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    const fs::path& dir() const { return dir_; }

    void save(const StoredSession& s) const {
        const fs::path target = file(s.session.id);
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot write session file " + tmp.string());
            out << stored_to_json(s).dump();
            out.flush();
            if (!out) throw Error("short write to session file " + tmp.string());
        }
        fs::rename(tmp, target);
    }

    std::optional<StoredSession> load(const std::string& id) const {
        if (!valid_id(id)) return std::nullopt;
        std::ifstream in(file(id), std::ios::binary);
        if (!in) return std::nullopt;
        try {
            return stored_from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ParseError("", "corrupt session file for '" + id + "': " + e.what());
        }
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& entry : fs::directory_iterator(dir_))
            if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
        std::sort(out.begin(), out.end());
        return out;
    }

    static bool valid_id(const std::string& id) {
        if (id.empty() || id.size() > 64) return false;
        for (char c : id)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
        return true;
    }

private:
    fs::path file(const std::string& id) const { return dir_ / (id + ".json"); }
    fs::path dir_;
};

/// Every *.json scene in `dir`, keyed by scene id.
inline std::map<std::string, Scene> load_scene_dir(const fs::path& dir) {
    std::map<std::string, Scene> out;
    if (!fs::is_directory(dir)) throw ConfigError("scene directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        Scene s = load_scene_file(f.string());
        if (!out.emplace(s.id, s).second) throw ConfigError("duplicate scene id '" + s.id + "' in " + f.string());
    }
    if (out.empty()) throw ConfigError("scene directory '" + dir.string() + "' contains no scenes");
    return out;
}

struct ServiceConfig {
    fs::path scene_dir;
    fs::path store_dir;
    std::vector<std::string> allowed_origins;  ///< "*" allows any origin
    PipelineSettings pipeline;
};

/// Error response body and HTTP status for an exception.
inline std::pair<int, json> error_response(const std::exception& e) {
    auto body = [&](const char* code, const std::string& path = "") {
        return json{{"code", code}, {"message", e.what()}, {"path", path}};
    };
    if (const auto* p = dynamic_cast<const ParseError*>(&e)) return {400, body("parse_error", p->path())};
    if (dynamic_cast<const NotFoundError*>(&e)) return {404, body("not_found")};
    if (dynamic_cast<const StateError*>(&e)) return {409, body("state_error")};
    if (dynamic_cast<const DomainError*>(&e)) return {422, body("domain_error")};
    if (dynamic_cast<const ConfigError*>(&e)) return {422, body("config_error")};
    if (const auto* a = dynamic_cast<const AgentError*>(&e)) {
        json b = body("agent_error");
        b["status"] = a->status();
        return {502, b};
    }
    if (dynamic_cast<const EvaluationError*>(&e)) return {500, body("evaluation_error")};
    return {500, body("internal_error")};
}

class Service {
public:
    Service(ServiceConfig config, agents::AgentBackend& backend)
        : config_(std::move(config)),
          scenes_(load_scene_dir(config_.scene_dir)),
          store_(config_.store_dir),
          pipeline_(backend, config_.pipeline) {
        // A crash mid-operation leaves "running" behind; the committed session is intact.
        for (const auto& id : store_.ids()) {
            auto s = store_.load(id);
            if (s && s->status == "running") {
                s->status = "error";
                s->last_error = "interrupted";
                store_.save(*s);
            }
        }
        routes();
    }

    ~Service() { stop(); }

    /// Binds to `port` (0 picks a free port) and serves on a background
    /// thread. Returns the bound port.
    int start(const std::string& host, int port) {
        int bound = port;
        if (port == 0) {
            bound = server_.bind_to_any_port(host);
            if (bound < 0) throw Error("cannot bind to " + host);
        } else if (!server_.bind_to_port(host, port)) {
            throw Error("cannot bind to " + host + ":" + std::to_string(port) + " (port busy?)");
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return bound;
    }

    /// Serves on the calling thread until stop().
    void run(const std::string& host, int port) {
        if (!server_.bind_to_port(host, port))
            throw Error("cannot bind to " + host + ":" + std::to_string(port) + " (port busy?)");
        server_.listen_after_bind();
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    const SessionStore& store() const { return store_; }

private:
    using Req = httplib::Request;
    using Res = httplib::Response;

    static void send(Res& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static json parse_body(const Req& req) {
        if (req.body.empty()) return json::object();
        try {
            json doc = json::parse(req.body);
            if (!doc.is_object()) throw ParseError("", "request body must be a JSON object");
            return doc;
        } catch (const json::parse_error& e) {
            throw ParseError("", std::string("request body is not JSON: ") + e.what());
        }
    }

    template <class F>
    void guarded(Res& res, F&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            auto [status, body] = error_response(e);
            send(res, status, body);
        }
    }

    std::shared_ptr<std::mutex> lock_for(const std::string& id) {
        std::lock_guard<std::mutex> g(locks_mutex_);
        auto& m = locks_[id];
        if (!m) m = std::make_shared<std::mutex>();
        return m;
    }

    StoredSession require_session(const std::string& id) const {
        auto s = store_.load(id);
        if (!s) throw NotFoundError("session '" + id + "' not found");
        return *s;
    }

    static json session_view(const StoredSession& st) {
        const Session& s = st.session;
        const Metrics m = metrics(s);
        return {{"id", s.id},
                {"scene_id", s.scene.id},
                {"phase", phase_name(s.phase)},
                {"status", st.status},
                {"last_error", st.last_error},
                {"history", s.history},
                {"question", s.phase == Phase::Clarifying ? json(s.pending_question) : json(nullptr)},
                {"facet", s.pending_facet ? json(agents::facet_name(*s.pending_facet)) : json(nullptr)},
                {"clarification_rounds", s.ambiguous_rounds},
                {"proceeded_with_defaults", s.proceeded_with_defaults},
                {"spec", s.spec ? spec_to_json(*s.spec) : json(nullptr)},
                {"candidate_count", s.candidates ? s.candidates->candidates.size() : 0},
                {"recommended", s.recommended ? json(*s.recommended) : json(nullptr)},
                {"rationale", s.rationale},
                {"final_layout", s.final_layout ? layout_to_json(*s.final_layout) : json(nullptr)},
                {"metrics", metrics_json(m)}};
    }

    static json metrics_json(const Metrics& m) {
        return {{"number_of_adjustments", m.number_of_adjustments},
                {"adjustment_distance", m.adjustment_distance},
                {"net_displacement", m.net_displacement}};
    }

    std::string new_id() {
        std::lock_guard<std::mutex> g(locks_mutex_);
        static const char* hex = "0123456789abcdef";
        for (;;) {
            std::string id;
            for (int i = 0; i < 16; ++i) id += hex[rng_() & 15u];
            if (!store_.load(id)) return id;
        }
    }

    /// Runs a mutation under the session lock with token replay and
    /// write-ahead status.
    void mutate(const Req& req, Res& res, const std::function<std::pair<int, json>(Session&, const json&)>& op) {
        const std::string id = req.matches[1];
        const json body = parse_body(req);
        std::string token;
        if (body.contains("token") && !body["token"].is_null())
            token = detail::as_string(body["token"], "/token");

        const auto lock = lock_for(id);
        std::lock_guard<std::mutex> g(*lock);
        StoredSession st = require_session(id);
        if (!token.empty()) {
            if (auto it = st.responses.find(token); it != st.responses.end()) {
                send(res, it->second.at("status").get<int>(), it->second.at("body"));
                return;
            }
        }
        StoredSession running = st;
        running.status = "running";
        store_.save(running);

        std::pair<int, json> result;
        try {
            result = op(st.session, body);
            st.status = "idle";
            st.last_error.clear();
        } catch (const std::exception& e) {
            result = error_response(e);
            st = require_session(id);  // the operation's partial state is discarded
            st.status = "error";
            st.last_error = e.what();
        }
        if (!token.empty()) st.responses[token] = {{"status", result.first}, {"body", result.second}};
        store_.save(st);
        send(res, result.first, result.second);
    }

    void routes() {
        // SO_REUSEADDR only: a second server on a busy port must fail to bind.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
        });
        server_.set_post_routing_handler([this](const Req& req, Res& res) { cors(req, res); });
        server_.Options(R"(/api/.*)", [](const Req&, Res& res) { res.status = 204; });

        server_.Get("/api/scenes", [this](const Req&, Res& res) {
            json out = json::array();
            for (const auto& [id, s] : scenes_) {
                json widgets = json::array();
                for (const auto& w : s.widgets) widgets.push_back(w.name);
                json objects = json::array();
                for (const auto& o : s.objects) objects.push_back(o.name);
                out.push_back({{"id", id}, {"widgets", widgets}, {"objects", objects}});
            }
            send(res, 200, out);
        });

        server_.Get(R"(/api/scenes/([^/]+))", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                auto it = scenes_.find(req.matches[1]);
                if (it == scenes_.end()) throw NotFoundError("scene '" + std::string(req.matches[1]) + "' not found");
                send(res, 200, scene_to_json(it->second));
            });
        });

        server_.Post("/api/sessions", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const json body = parse_body(req);
                const std::string scene_id =
                    detail::as_string(detail::require(body, "scene_id", ""), "/scene_id");
                auto it = scenes_.find(scene_id);
                if (it == scenes_.end()) throw NotFoundError("scene '" + scene_id + "' not found");
                StoredSession st;
                st.session = pipeline_.create_session(new_id(), it->second);
                store_.save(st);
                send(res, 201, session_view(st));
            });
        });

        server_.Get(R"(/api/sessions/([^/]+))", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, 200, session_view(require_session(req.matches[1]))); });
        });

        server_.Get(R"(/api/sessions/([^/]+)/candidates)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                const auto st = require_session(req.matches[1]);
                const auto& s = st.session;
                if (!s.candidates) {
                    send(res, 200, json::array());
                    return;
                }
                send(res, 200, candidate_summary(*s.candidates, s.recommended));
            });
        });

        server_.Get(R"(/api/sessions/([^/]+)/metrics)", [this](const Req& req, Res& res) {
            guarded(res, [&] { send(res, 200, metrics_json(metrics(require_session(req.matches[1]).session))); });
        });

        auto submit = [this](bool answer) {
            return [this, answer](const Req& req, Res& res) {
                guarded(res, [&] {
                    mutate(req, res, [&](Session& s, const json& body) -> std::pair<int, json> {
                        const std::string text = detail::as_string(detail::require(body, "text", ""), "/text");
                        const auto out = answer ? pipeline_.submit_answer(s, text) : pipeline_.submit_instruction(s, text);
                        json r = {{"phase", phase_name(s.phase)}};
                        if (out.clarification) {
                            r["question"] = out.question;
                            r["facet"] = agents::facet_name(*out.facet);
                        } else {
                            r["candidate_count"] = out.candidate_count;
                            r["recommended"] = out.recommended;
                        }
                        return {200, r};
                    });
                });
            };
        };
        server_.Post(R"(/api/sessions/([^/]+)/instruction)", submit(false));
        server_.Post(R"(/api/sessions/([^/]+)/answer)", submit(true));

        server_.Post(R"(/api/sessions/([^/]+)/select)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                mutate(req, res, [&](Session& s, const json& body) -> std::pair<int, json> {
                    const json& sel = detail::require(body, "index", "");
                    std::optional<std::size_t> index;
                    if (sel.is_string() && sel.get<std::string>() == "auto") {
                    } else if (sel.is_number_unsigned()) {
                        index = sel.get<std::size_t>();
                    } else {
                        throw ParseError("/index", "expected a candidate index or \"auto\"");
                    }
                    const Layout layout = pipeline_.finalize(s, index);
                    return {200, {{"phase", phase_name(s.phase)}, {"layout", layout_to_json(layout)}}};
                });
            });
        });

        server_.Post(R"(/api/sessions/([^/]+)/adjust)", [this](const Req& req, Res& res) {
            guarded(res, [&] {
                mutate(req, res, [&](Session& s, const json& body) -> std::pair<int, json> {
                    const std::string widget = detail::as_string(detail::require(body, "widget", ""), "/widget");
                    const Vec3 pos = detail::as_vec3(detail::require(body, "position", ""), "/position");
                    const Metrics m = pipeline_.record_adjustment(s, widget, pos);
                    return {200, metrics_json(m)};
                });
            });
        });
    }

    void cors(const Req& req, Res& res) const {
        const std::string origin = req.get_header_value("Origin");
        if (origin.empty()) return;
        for (const auto& allowed : config_.allowed_origins) {
            if (allowed == "*" || allowed == origin) {
                res.set_header("Access-Control-Allow-Origin", allowed == "*" ? "*" : origin);
                res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
                res.set_header("Access-Control-Allow-Headers", "Content-Type");
                res.set_header("Vary", "Origin");
                return;
            }
        }
    }

    ServiceConfig config_;
    std::map<std::string, Scene> scenes_;
    SessionStore store_;
    Pipeline pipeline_;
    httplib::Server server_;
    std::thread thread_;
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
    std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace autoopt
