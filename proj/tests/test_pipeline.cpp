#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "autoopt/pipeline.hpp"
#include "autoopt/rng.hpp"

using namespace autoopt;

namespace {

Scene office() { return load_scene_file(AUTOOPT_DATA_DIR "/scenes/office.json"); }

json office_script() {
    std::ifstream in(AUTOOPT_DATA_DIR "/scripts/office.json");
    return json::parse(in);
}

PipelineSettings fast() {
    PipelineSettings s;
    s.population = 40;
    s.generations = 15;
    return s;
}

const char* kClear = "Put the email on the desk so I can reply by touch, and don't block the monitor.";

/// Rule-based agents whose configure step can be made to fail.
class FlakyBackend : public agents::RuleBasedBackend {
public:
    bool fail = false;
    OptimizationSpec configure(const agents::AgentContext& ctx) override {
        if (fail) throw AgentError("configure failed");
        return RuleBasedBackend::configure(ctx);
    }
};

}  // namespace

TEST(Session, Create) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    const auto a = p.create_session("a", office());
    const auto b = p.create_session("b", office());
    EXPECT_EQ(a.phase, Phase::AwaitingInstruction);
    EXPECT_TRUE(a.history.empty());
    EXPECT_EQ(metrics(a), Metrics{});
    EXPECT_NE(a.id, b.id);
}

TEST(Session, AmbiguousThenClear) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    EXPECT_THROW(p.submit_answer(s, "x"), StateError);

    const auto q = p.submit_instruction(s, "I want my email.");
    EXPECT_TRUE(q.clarification);
    EXPECT_FALSE(q.question.empty());
    EXPECT_EQ(q.facet, agents::Facet::Interaction);
    EXPECT_EQ(s.phase, Phase::Clarifying);

    const auto done = p.submit_answer(s, "I reply by touch while it sits on the desk.");
    EXPECT_FALSE(done.clarification);
    EXPECT_EQ(s.phase, Phase::Optimized);
    ASSERT_TRUE(s.candidates);
    EXPECT_GE(done.candidate_count, 1u);
    EXPECT_LT(done.recommended, done.candidate_count);
    EXPECT_EQ(s.history.size(), 2u);
    EXPECT_EQ(s.spec->widgets.at("Email").anchor, std::optional<std::string>("desk"));
    EXPECT_THROW(p.submit_instruction(s, "more"), StateError);
    EXPECT_THROW(p.submit_answer(s, "more"), StateError);
}

TEST(Session, RoundCapProceedsWithDefaults) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    p.submit_instruction(s, "Make it nice.");
    for (int round = 2; round <= 5; ++round) {
        const auto out = p.submit_answer(s, "I don't know.");
        EXPECT_TRUE(out.clarification) << round;
        EXPECT_EQ(s.phase, Phase::Clarifying);
    }
    EXPECT_EQ(s.ambiguous_rounds, kMaxClarificationRounds);
    EXPECT_FALSE(s.proceeded_with_defaults);
    const auto out = p.submit_answer(s, "Whatever.");
    EXPECT_FALSE(out.clarification);
    EXPECT_EQ(s.phase, Phase::Optimized);
    EXPECT_TRUE(s.proceeded_with_defaults);
    // Nothing was named, so every widget is shown.
    EXPECT_EQ(s.spec->enabled_widgets().size(), office().widgets.size());
}

TEST(Session, FinalizeAndAdjust) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    EXPECT_THROW(p.finalize(s, std::nullopt), StateError);
    p.submit_instruction(s, kClear);
    ASSERT_EQ(s.phase, Phase::Optimized);
    EXPECT_THROW(p.record_adjustment(s, "Email", {0, 1, -0.5}), StateError);
    EXPECT_THROW(p.finalize(s, 99), DomainError);
    EXPECT_EQ(s.phase, Phase::Optimized);

    const Layout chosen = p.finalize(s, std::nullopt);
    EXPECT_EQ(chosen, s.candidates->candidates[*s.recommended].layout);
    EXPECT_EQ(s.phase, Phase::Finalized);
    EXPECT_EQ(metrics(s), Metrics{});

    const Vec3 start{0.0, 1.2, -0.5};
    const Metrics m0 = p.record_adjustment(s, "Email", start);
    EXPECT_EQ(m0.number_of_adjustments, 1u);
    Metrics m = p.record_adjustment(s, "Email", start + Vec3{0.1, 0, 0});
    EXPECT_EQ(m.number_of_adjustments, 2u);
    EXPECT_NEAR(m.adjustment_distance - m0.adjustment_distance, 0.1, 1e-12);
    m = p.record_adjustment(s, "Email", start + Vec3{0.3, 0, 0});
    EXPECT_EQ(m.number_of_adjustments, 3u);
    EXPECT_NEAR(m.adjustment_distance - m0.adjustment_distance, 0.3, 1e-12);
    // Back to the start of the 0.1 and 0.2 moves: path grows, net returns to the first move.
    m = p.record_adjustment(s, "Email", start);
    EXPECT_NEAR(m.adjustment_distance - m0.adjustment_distance, 0.6, 1e-12);
    EXPECT_NEAR(m.net_displacement, m0.net_displacement, 1e-12);
    EXPECT_EQ(s.final_layout->positions.at("Email"), start);

    EXPECT_THROW(p.record_adjustment(s, "Map", start), DomainError);
    EXPECT_THROW(p.record_adjustment(s, "Email", {0, 9, 0}), DomainError);
}

TEST(Session, PinsPersistIntoNewRounds) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    p.submit_instruction(s, kClear);
    p.finalize(s, std::nullopt);
    const Vec3 pin{0.2, 1.1, -0.45};
    p.record_adjustment(s, "Email", pin);

    // The new round does not mention email again, but the aggregate does.
    const auto out = p.submit_instruction(s, "Also show the calendar and let me read it above the monitor.");
    ASSERT_FALSE(out.clarification);
    EXPECT_EQ(s.spec->widgets.at("Email").pinned_position, pin);
    for (const auto& c : s.candidates->candidates) {
        EXPECT_EQ(c.layout.positions.at("Email"), pin);
        EXPECT_TRUE(c.layout.positions.count("Calendar"));
    }
    EXPECT_EQ(s.history.size(), 2u);
}

TEST(Session, ErrorsLeaveSessionUnchanged) {
    FlakyBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    p.submit_instruction(s, "I want my email.");
    const Session before = s;
    backend.fail = true;
    EXPECT_THROW(p.submit_answer(s, "I reply by touch on the desk."), AgentError);
    EXPECT_EQ(s, before);
    EXPECT_THROW(p.submit_answer(s, "   "), DomainError);
    EXPECT_EQ(s, before);
    backend.fail = false;
    p.submit_answer(s, "I reply by touch on the desk.");
    EXPECT_EQ(s.phase, Phase::Optimized);
}

TEST(Session, ScriptTranscriptIsDeterministic) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto run = [&] {
        auto s = p.create_session("golden", office());
        run_script(p, s, office_script());
        return s;
    };
    const Session a = run();
    const Session b = run();
    EXPECT_EQ(session_to_json(a).dump(), session_to_json(b).dump());
    EXPECT_EQ(a.phase, Phase::Finalized);
    EXPECT_EQ(a.pins.at("Calendar"), (Vec3{0.1, 1.25, -0.5}));
    EXPECT_EQ(a.final_layout->positions.at("Calendar"), (Vec3{0.1, 1.25, -0.5}));
    EXPECT_TRUE(a.final_layout->positions.count("Messenger"));
}

TEST(Session, SerializationRoundTrip) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("rt", office());
    EXPECT_EQ(session_from_json(session_to_json(s)), s);
    run_script(p, s, office_script());
    const Session back = session_from_json(json::parse(session_to_json(s).dump()));
    EXPECT_EQ(back, s);
    EXPECT_THROW(session_from_json(json::parse(R"({"id": "x"})")), ParseError);
}

TEST(Session, ScriptErrors) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    auto s = p.create_session("s", office());
    try {
        run_script(p, s, json::parse(R"({"steps": [{"dance": 1}]})"));
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.path(), "/steps/0");
    }
    EXPECT_THROW(run_script(p, s, json::parse(R"({"steps": [{"select": "auto"}]})")), StateError);
}

TEST(Session, PhaseGraphProperty) {
    agents::RuleBasedBackend backend;
    PipelineSettings settings;
    settings.population = 12;
    settings.generations = 2;
    const Pipeline p(backend, settings);
    const std::vector<std::string> texts = {"hello", "I want my email.", kClear, "I tap the calendar on the desk.",
                                            "read the messenger"};
    CounterRng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto s = p.create_session("s", office());
        for (int step = 0; step < 12; ++step) {
            const Phase before = s.phase;
            try {
                switch (rng.below(4)) {
                    case 0: p.submit_instruction(s, texts[rng.below(texts.size())]); break;
                    case 1: p.submit_answer(s, texts[rng.below(texts.size())]); break;
                    case 2: p.finalize(s, std::nullopt); break;
                    default: p.record_adjustment(s, "Email", {0.0, 1.2, -0.5}); break;
                }
            } catch (const Error&) {
                EXPECT_EQ(s.phase, before);
                continue;
            }
            if (s.phase != before) EXPECT_TRUE(transition_allowed(before, s.phase))
                << phase_name(before) << " -> " << phase_name(s.phase);
            EXPECT_NE(s.phase, Phase::Configured);
        }
    }
}

TEST(Session, PlainTextScript) {
    agents::RuleBasedBackend backend;
    const Pipeline p(backend, fast());
    std::istringstream text(
        "# office\n"
        "I want my email.\n"
        "  I reply by touch on the desk.  \n"
        "\n"
        "Also show the calendar and let me read it above the monitor.\n");
    const json script = script_from_lines(text);
    ASSERT_EQ(script["steps"].size(), 4u);
    EXPECT_EQ(script["steps"][1]["say"], "I reply by touch on the desk.");
    auto s = p.create_session("s", office());
    run_script(p, s, script);
    EXPECT_EQ(s.phase, Phase::Finalized);
    EXPECT_EQ(s.history.size(), 3u);
    EXPECT_TRUE(s.final_layout->positions.count("Calendar"));
    std::istringstream empty("# nothing\n\n");
    EXPECT_THROW(script_from_lines(empty), ParseError);
}
