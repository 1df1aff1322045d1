#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include <unistd.h>

#include "autoopt/service.hpp"
#include "httplib.h"

using namespace autoopt;

namespace {

fs::path fresh_dir(const std::string& name) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() /
                         ("autoopt-" + name + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(dir);
    return dir;
}

ServiceConfig config(const fs::path& store) {
    ServiceConfig c;
    c.scene_dir = AUTOOPT_DATA_DIR "/scenes";
    c.store_dir = store;
    c.allowed_origins = {"http://localhost:5173"};
    c.pipeline.population = 40;
    c.pipeline.generations = 15;
    return c;
}

struct Running {
    agents::RuleBasedBackend backend;
    Service service;
    int port;
    httplib::Client client;

    explicit Running(const fs::path& store)
        : service(config(store), backend), port(service.start("127.0.0.1", 0)), client("127.0.0.1", port) {}

    std::pair<int, json> get(const std::string& path) {
        auto r = client.Get(path);
        EXPECT_TRUE(r) << path;
        return {r->status, json::parse(r->body)};
    }
    std::pair<int, json> post(const std::string& path, const json& body) {
        auto r = client.Post(path, body.dump(), "application/json");
        EXPECT_TRUE(r) << path;
        return {r->status, json::parse(r->body)};
    }
    std::string create(const std::string& scene = "office") {
        auto [status, body] = post("/api/sessions", {{"scene_id", scene}});
        EXPECT_EQ(status, 201) << body;
        return body.at("id");
    }
};

void expect_error(const std::pair<int, json>& r, int status, const std::string& code) {
    EXPECT_EQ(r.first, status) << r.second;
    EXPECT_EQ(r.second.at("code"), code) << r.second;
    EXPECT_TRUE(r.second.contains("message"));
    EXPECT_TRUE(r.second.contains("path"));
}

}  // namespace

TEST(Service, Scenes) {
    Running s(fresh_dir("scenes"));
    auto [status, list] = s.get("/api/scenes");
    EXPECT_EQ(status, 200);
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0]["id"], "livingroom");
    EXPECT_EQ(list[1]["id"], "office");
    auto [st2, scene] = s.get("/api/scenes/office");
    EXPECT_EQ(st2, 200);
    EXPECT_EQ(load_scene(scene.dump()), load_scene_file(AUTOOPT_DATA_DIR "/scenes/office.json"));
    expect_error(s.get("/api/scenes/garage"), 404, "not_found");
}

TEST(Service, CreateSessions) {
    Running s(fresh_dir("create"));
    auto [status, body] = s.post("/api/sessions", {{"scene_id", "office"}});
    EXPECT_EQ(status, 201);
    EXPECT_EQ(body["phase"], "AwaitingInstruction");
    EXPECT_EQ(body["metrics"]["number_of_adjustments"], 0);
    EXPECT_NE(s.create(), s.create());
    expect_error(s.post("/api/sessions", {{"scene_id", "garage"}}), 404, "not_found");
    const auto missing = s.post("/api/sessions", json::object());
    expect_error(missing, 400, "parse_error");
    EXPECT_EQ(missing.second["path"], "/scene_id");
    expect_error(s.get("/api/sessions/nope"), 404, "not_found");
    expect_error(s.get("/api/sessions/bad.id"), 404, "not_found");
}

TEST(Service, ScriptedFlow) {
    Running s(fresh_dir("flow"));
    const std::string id = s.create();
    const std::string base = "/api/sessions/" + id;

    auto [st, q] = s.post(base + "/instruction", {{"text", "I want my email."}, {"token", "t1"}});
    EXPECT_EQ(st, 200);
    EXPECT_EQ(q["phase"], "Clarifying");
    EXPECT_EQ(q["facet"], "interaction");
    EXPECT_EQ(s.get(base).second["question"], q["question"]);
    EXPECT_EQ(s.get(base + "/candidates").second, json::array());
    expect_error(s.post(base + "/select", {{"index", "auto"}}), 409, "state_error");

    auto [st2, done] =
        s.post(base + "/answer", {{"text", "I reply by touch with it on the desk."}, {"token", "t2"}});
    EXPECT_EQ(st2, 200) << done;
    EXPECT_EQ(done["phase"], "Optimized");
    const auto view = s.get(base).second;
    EXPECT_EQ(view["status"], "idle");
    EXPECT_EQ(view["history"].size(), 2u);
    EXPECT_TRUE(view["question"].is_null());

    const auto cands = s.get(base + "/candidates").second;
    ASSERT_EQ(cands.size(), done["candidate_count"].get<std::size_t>());
    std::size_t recommended = 0, flagged = 0;
    for (const auto& c : cands) {
        EXPECT_TRUE(c.contains("layout") && c.contains("objectives") && c.contains("feasible"));
        if (c["recommended"].get<bool>()) {
            ++flagged;
            recommended = c["index"];
        }
    }
    EXPECT_EQ(flagged, 1u);
    EXPECT_EQ(recommended, done["recommended"].get<std::size_t>());

    expect_error(s.post(base + "/select", {{"index", 99}}), 422, "domain_error");
    expect_error(s.post(base + "/select", {{"index", "best"}}), 400, "parse_error");
    auto [st3, sel] = s.post(base + "/select", {{"index", "auto"}, {"token", "t3"}});
    EXPECT_EQ(st3, 200);
    EXPECT_EQ(sel["layout"], cands[recommended]["layout"]);

    const json pos = {0.1, 1.2, -0.5};
    auto [st4, m] = s.post(base + "/adjust", {{"widget", "Email"}, {"position", pos}, {"token", "t4"}});
    EXPECT_EQ(st4, 200) << m;
    EXPECT_EQ(m["number_of_adjustments"], 1);
    EXPECT_EQ(s.get(base + "/metrics").second, m);
    EXPECT_EQ(s.get(base).second["final_layout"]["Email"], pos);
    expect_error(s.post(base + "/adjust", {{"widget", "Map"}, {"position", pos}}), 422, "domain_error");
    const auto bad = s.post(base + "/adjust", {{"widget", "Email"}, {"position", "here"}});
    expect_error(bad, 400, "parse_error");
    EXPECT_EQ(bad.second["path"], "/position");
}

TEST(Service, TokensMakeMutationsIdempotent) {
    Running s(fresh_dir("tokens"));
    const std::string base = "/api/sessions/" + s.create();
    const json body = {{"text", "Put the email on the desk so I can reply by touch."}, {"token", "abc"}};
    const auto first = s.post(base + "/instruction", body);
    const auto again = s.post(base + "/instruction", body);
    EXPECT_EQ(first, again);
    EXPECT_EQ(s.get(base).second["history"].size(), 1u);

    s.post(base + "/select", {{"index", "auto"}, {"token", "sel"}});
    const json adj = {{"widget", "Email"}, {"position", {0.1, 1.2, -0.5}}, {"token", "move-1"}};
    EXPECT_EQ(s.post(base + "/adjust", adj), s.post(base + "/adjust", adj));
    EXPECT_EQ(s.get(base + "/metrics").second["number_of_adjustments"], 1);
    json adj2 = adj;
    adj2["token"] = "move-2";
    s.post(base + "/adjust", adj2);
    EXPECT_EQ(s.get(base + "/metrics").second["number_of_adjustments"], 2);
}

TEST(Service, StoreSurvivesRestart) {
    const fs::path store = fresh_dir("restart");
    std::string id;
    json before;
    {
        Running s(store);
        id = s.create();
        s.post("/api/sessions/" + id + "/instruction", {{"text", "I want my email."}});
        before = s.get("/api/sessions/" + id).second;
    }
    Running s(store);
    EXPECT_EQ(s.get("/api/sessions/" + id).second, before);
    const auto out = s.post("/api/sessions/" + id + "/answer", {{"text", "I reply by touch on the desk."}});
    EXPECT_EQ(out.second["phase"], "Optimized");
}

TEST(Service, InterruptedOperationIsReported) {
    const fs::path store = fresh_dir("crash");
    StoredSession st;
    agents::RuleBasedBackend backend;
    st.session = Pipeline(backend).create_session("crashed", load_scene_file(AUTOOPT_DATA_DIR "/scenes/office.json"));
    st.status = "running";
    SessionStore(store).save(st);
    Running s(store);
    const auto view = s.get("/api/sessions/crashed").second;
    EXPECT_EQ(view["status"], "error");
    EXPECT_EQ(view["last_error"], "interrupted");
    EXPECT_EQ(view["phase"], "AwaitingInstruction");
}

TEST(Service, StoreRoundTrip) {
    agents::RuleBasedBackend backend;
    PipelineSettings settings;
    settings.population = 20;
    settings.generations = 5;
    const Pipeline p(backend, settings);
    StoredSession st;
    st.session = p.create_session("rt", load_scene_file(AUTOOPT_DATA_DIR "/scenes/office.json"));
    p.submit_instruction(st.session, "Put the email on the desk so I can reply by touch.");
    st.responses["x"] = {{"status", 200}, {"body", {{"a", 1}}}};
    EXPECT_EQ(stored_from_json(json::parse(stored_to_json(st).dump())), st);
    const SessionStore store(fresh_dir("rt"));
    store.save(st);
    EXPECT_EQ(store.load("rt"), st);
    EXPECT_EQ(store.ids(), (std::vector<std::string>{"rt"}));
    EXPECT_FALSE(store.load("missing"));
    EXPECT_FALSE(store.load("../etc/passwd"));
}

TEST(Service, Cors) {
    Running s(fresh_dir("cors"));
    auto allowed = s.client.Get("/api/scenes", {{"Origin", "http://localhost:5173"}});
    ASSERT_TRUE(allowed);
    EXPECT_EQ(allowed->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
    auto denied = s.client.Get("/api/scenes", {{"Origin", "http://evil.example"}});
    ASSERT_TRUE(denied);
    EXPECT_FALSE(denied->has_header("Access-Control-Allow-Origin"));
    auto preflight = s.client.Options("/api/sessions", {{"Origin", "http://localhost:5173"}});
    ASSERT_TRUE(preflight);
    EXPECT_EQ(preflight->status, 204);
    EXPECT_EQ(preflight->get_header_value("Access-Control-Allow-Methods"), "GET, POST, OPTIONS");
}

TEST(Service, PortBusyIsAStartupError) {
    Running s(fresh_dir("busy"));
    agents::RuleBasedBackend backend;
    Service other(config(fresh_dir("busy2")), backend);
    EXPECT_THROW(other.start("127.0.0.1", s.port), Error);
}

TEST(Service, EmptySceneDirIsRejected) {
    agents::RuleBasedBackend backend;
    ServiceConfig c = config(fresh_dir("noscenes"));
    c.scene_dir = fresh_dir("empty");
    fs::create_directories(c.scene_dir);
    EXPECT_THROW(Service(c, backend), ConfigError);
}

TEST(Service, ConcurrentSessions) {
    Running s(fresh_dir("concurrent"));
    const std::string a = s.create(), b = s.create();
    auto run = [&](const std::string& id, json* out) {
        httplib::Client c("127.0.0.1", s.port);
        auto r = c.Post("/api/sessions/" + id + "/instruction",
                        json{{"text", "Put the email on the desk so I can reply by touch."}}.dump(), "application/json");
        *out = r ? json::parse(r->body) : json();
    };
    json ra, rb;
    std::thread ta(run, a, &ra), tb(run, b, &rb);
    ta.join();
    tb.join();
    EXPECT_EQ(ra["phase"], "Optimized");
    EXPECT_EQ(rb["phase"], "Optimized");
    // Same instruction, same seed: identical candidates.
    EXPECT_EQ(s.get("/api/sessions/" + a + "/candidates").second, s.get("/api/sessions/" + b + "/candidates").second);
}
