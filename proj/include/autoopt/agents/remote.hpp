#pragma once

// Agent backend that delegates the three roles to a chat-completions
// compatible HTTP endpoint.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "autoopt/agents/describe.hpp"
#include "autoopt/agents/fewshot.hpp"
#include "autoopt/agents/prompts.hpp"
#include "autoopt/agents/types.hpp"
#include "autoopt/config.hpp"
#include "autoopt/error.hpp"

namespace autoopt::agents {

struct RemoteConfig {
    std::string endpoint;  ///< full URL, e.g. http://host:port/v1/chat/completions
    std::string api_key;
    std::string model = "gpt-4o";
    double timeout_s = 60.0;

    /// Reads AUTOOPT_LLM_ENDPOINT, AUTOOPT_LLM_API_KEY, AUTOOPT_LLM_MODEL and
    /// AUTOOPT_LLM_TIMEOUT_S.
    static RemoteConfig from_env() {
        RemoteConfig c;
        auto get = [](const char* name) -> std::optional<std::string> {
            const char* v = std::getenv(name);
            if (!v || !*v) return std::nullopt;
            return std::string(v);
        };
        if (auto v = get("AUTOOPT_LLM_ENDPOINT")) c.endpoint = *v;
        if (auto v = get("AUTOOPT_LLM_API_KEY")) c.api_key = *v;
        if (auto v = get("AUTOOPT_LLM_MODEL")) c.model = *v;
        if (auto v = get("AUTOOPT_LLM_TIMEOUT_S")) {
            char* end = nullptr;
            const double t = std::strtod(v->c_str(), &end);
            if (end == v->c_str() || *end != '\0' || !(t > 0.0) || !std::isfinite(t))
                throw ConfigError("AUTOOPT_LLM_TIMEOUT_S must be a positive number, got '" + *v + "'");
            c.timeout_s = t;
        }
        return c;
    }
};

namespace remote_detail {

struct Url {
    std::string origin;  ///< scheme://host[:port]
    std::string path;
};

inline Url split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute URL: '" + url + "'");
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

inline void set_timeout(httplib::Client& cli, double seconds) {
    const auto us = std::chrono::microseconds(static_cast<long long>(std::ceil(seconds * 1e6)));
    const auto s = std::chrono::duration_cast<std::chrono::seconds>(us);
    const auto rest = us - s;
    cli.set_connection_timeout(static_cast<time_t>(s.count()), static_cast<time_t>(rest.count()));
    cli.set_read_timeout(static_cast<time_t>(s.count()), static_cast<time_t>(rest.count()));
    cli.set_write_timeout(static_cast<time_t>(s.count()), static_cast<time_t>(rest.count()));
}

}  // namespace remote_detail

/// Sends `prompt` as a single user message and returns the reply text.
/// Failures raise AgentError; status() is the HTTP status, or 0 for
/// transport errors and timeouts.
inline std::string remote_complete(const RemoteConfig& config, const std::string& prompt) {
    if (config.endpoint.empty()) throw AgentError("remote agent endpoint is not configured (AUTOOPT_LLM_ENDPOINT)");
    const auto url = remote_detail::split_url(config.endpoint);
    httplib::Client cli(url.origin);
    remote_detail::set_timeout(cli, config.timeout_s);

    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);
    const json body = {{"model", config.model},
                       {"temperature", 0},
                       {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};

    const auto start = std::chrono::steady_clock::now();
    auto res = cli.Post(url.path, headers, body.dump(), "application/json");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                               ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                                elapsed >= config.timeout_s);
        if (timed_out)
            throw AgentError("remote agent timed out after " + describe::fixed(config.timeout_s, 3) + " s");
        throw AgentError("remote agent request failed: " + httplib::to_string(err));
    }
    if (res->status != 200)
        throw AgentError("remote agent returned HTTP " + std::to_string(res->status), res->status);
    try {
        const json reply = json::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw AgentError(std::string("malformed chat-completions response: ") + e.what(), res->status);
    }
}

/// The JSON object embedded in a model reply: from the first '{' to the last '}'.
inline json extract_json(const std::string& reply) {
    const auto b = reply.find('{');
    const auto e = reply.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) throw ParseError("", "reply contains no JSON object");
    try {
        return json::parse(reply.substr(b, e - b + 1));
    } catch (const json::parse_error& ex) {
        throw ParseError("", std::string("reply is not valid JSON: ") + ex.what());
    }
}

class RemoteBackend : public AgentBackend {
public:
    /// Injectable transport; defaults to remote_complete with `config`.
    using Transport = std::function<std::string(const std::string& prompt)>;

    explicit RemoteBackend(RemoteConfig config, std::vector<FewShotExample> examples = {})
        : config_(std::move(config)), examples_(std::move(examples)) {
        transport_ = [this](const std::string& p) { return remote_complete(config_, p); };
    }

    RemoteBackend(Transport transport, std::vector<FewShotExample> examples = {})
        : examples_(std::move(examples)), transport_(std::move(transport)) {}

    std::string name() const override { return "remote"; }

    AmbiguityOutcome detect_ambiguity(const AgentContext& ctx) override {
        const std::string combined = ctx.instruction();
        if (combined.empty()) throw DomainError("detect_ambiguity: empty instruction");
        const std::string prompt = prompts::render(prompts::kAmbiguity, {{"list of widgets", describe::widget_list(ctx.scene)},
                                                                         {"list of areas", describe::area_list(ctx.scene)},
                                                                         {"examples", format_examples(examples_)},
                                                                         {"user's instructions", combined}});
        return with_retry(prompt, [&](const json& doc) {
            const std::string verdict = detail::as_string(detail::require(doc, "verdict", ""), "/verdict");
            if (verdict == "sufficient") return AmbiguityOutcome::Clear(combined);
            if (verdict != "ambiguous") throw ParseError("/verdict", "expected 'sufficient' or 'ambiguous'");
            const Facet facet = facet_from_name(detail::as_string(detail::require(doc, "facet", ""), "/facet"));
            const std::string question = detail::as_string(detail::require(doc, "question", ""), "/question");
            if (question.empty()) throw ParseError("/question", "must not be empty");
            return AmbiguityOutcome::Ambiguous(combined, facet, question);
        });
    }

    OptimizationSpec configure(const AgentContext& ctx) override {
        const std::string prompt =
            prompts::render(prompts::kConfigure, {{"number of widgets", std::to_string(ctx.scene.widgets.size())},
                                                  {"list of widgets", describe::widget_list(ctx.scene)},
                                                  {"list of areas", describe::area_list(ctx.scene)},
                                                  {"user's instructions", ctx.instruction()}});
        OptimizationSpec spec = with_retry(prompt, [](const json& doc) { return spec_from_json(doc); });
        if (auto v = validate_spec(spec, ctx.scene); !v.empty())
            throw AgentError("remote configuration is invalid for the scene: " + to_string(v));
        return spec;
    }

    ValidationChoice validate_candidates(const AgentContext& ctx, const ProblemInstance& problem,
                                         const CandidateSet& set) override {
        if (set.candidates.empty()) throw DomainError("validate_candidates: no candidates");
        std::string listing;
        for (std::size_t i = 0; i < set.candidates.size(); ++i)
            listing += "Candidate " + std::to_string(i) + ":\n" + describe::candidate(problem, set.candidates[i]);
        std::vector<std::string> shown = problem.enabled_widgets;
        const std::string prompt = prompts::render(prompts::kValidate, {{"list of widgets", describe::join_list(shown, ", ")},
                                                                        {"list of areas", describe::area_list(ctx.scene)},
                                                                        {"candidates", listing},
                                                                        {"user's instructions", ctx.instruction()}});
        const std::size_t n = set.candidates.size();
        return with_retry(prompt, [n](const json& doc) {
            const json& idx = detail::require(doc, "index", "");
            if (!idx.is_number_integer() || idx.get<long long>() < 0 || idx.get<long long>() >= static_cast<long long>(n))
                throw ParseError("/index", "expected a candidate number in [0, " + std::to_string(n) + ")");
            std::string why;
            if (doc.contains("rationale") && doc["rationale"].is_string()) why = doc["rationale"].get<std::string>();
            return ValidationChoice{static_cast<std::size_t>(idx.get<long long>()), why};
        });
    }

    /// Number of transport calls made so far.
    std::size_t calls() const { return calls_; }

private:
    template <class Parse>
    std::invoke_result_t<Parse, const json&> with_retry(const std::string& prompt, Parse&& parse) {
        std::string last_error;
        for (int attempt = 0; attempt < 2; ++attempt) {
            std::string p = prompt;
            if (attempt > 0)
                p += "\nYour previous reply could not be used (" + last_error +
                     "). Reply again with only the JSON object.\n";
            ++calls_;
            const std::string reply = transport_(p);
            try {
                return parse(extract_json(reply));
            } catch (const ParseError& e) {
                last_error = e.what();
            }
        }
        throw AgentError("remote agent reply unusable after retry: " + last_error);
    }

    RemoteConfig config_;
    std::vector<FewShotExample> examples_;
    Transport transport_;
    std::size_t calls_ = 0;
};

}  // namespace autoopt::agents
