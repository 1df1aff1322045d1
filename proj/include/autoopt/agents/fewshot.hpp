#pragma once

// Labelled instruction corpora: loading JSON-lines files, formatting them as
// few-shot examples, and scoring an ambiguity detector against them.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "autoopt/agents/types.hpp"
#include "autoopt/error.hpp"
#include "autoopt/json_util.hpp"

namespace autoopt::agents {

enum class Label { WellFormed, Ambiguous };

inline std::string label_name(Label l) { return l == Label::WellFormed ? "well-formed" : "ambiguous"; }

struct FewShotExample {
    std::string instruction;
    Label label = Label::WellFormed;
    /// Optional annotation: the first facet the instruction leaves open.
    std::optional<Facet> missing;

    bool operator==(const FewShotExample&) const = default;
};

/// One record per non-blank line: {"instruction", "label"[, "missing"]}.
/// Errors name the line as /<line number>/<field>, counting from 1.
inline std::vector<FewShotExample> parse_fewshot(std::istream& in) {
    std::vector<FewShotExample> out;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string path = "/" + std::to_string(lineno);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path, std::string("invalid JSON: ") + e.what());
        }
        FewShotExample ex;
        ex.instruction = detail::as_string(detail::require(doc, "instruction", path), path + "/instruction");
        if (ex.instruction.empty()) throw ParseError(path + "/instruction", "must not be empty");
        const std::string label = detail::as_string(detail::require(doc, "label", path), path + "/label");
        if (label == "well-formed") {
            ex.label = Label::WellFormed;
        } else if (label == "ambiguous") {
            ex.label = Label::Ambiguous;
        } else {
            throw ParseError(path + "/label", "expected 'well-formed' or 'ambiguous', got '" + label + "'");
        }
        if (doc.contains("missing") && !doc["missing"].is_null()) {
            try {
                ex.missing = facet_from_name(detail::as_string(doc["missing"], path + "/missing"));
            } catch (const ParseError& e) {
                throw ParseError(path + "/missing", e.what());
            }
            if (ex.label == Label::WellFormed)
                throw ParseError(path + "/missing", "a well-formed example cannot miss a facet");
        }
        out.push_back(std::move(ex));
    }
    return out;
}

inline std::vector<FewShotExample> load_fewshot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("", "cannot open few-shot file '" + path + "'");
    return parse_fewshot(in);
}

/// The examples as prompt lines: `- "<instruction>" => <label>`.
inline std::string format_examples(const std::vector<FewShotExample>& examples) {
    if (examples.empty()) return "(none)";
    std::string out;
    for (const auto& ex : examples) {
        if (!out.empty()) out += '\n';
        out += "- " + json(ex.instruction).dump() + " => " + label_name(ex.label);
    }
    return out;
}

struct ClassificationReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    /// confusion[expected][predicted], indexed by Label.
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
    /// Annotated examples whose reported facet differs from the annotation.
    std::size_t facet_mismatches = 0;
    std::vector<std::size_t> misclassified;

    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Runs the backend's detector on each example as a fresh one-entry history.
inline ClassificationReport classify_corpus(const std::vector<FewShotExample>& examples, AgentBackend& backend,
                                            const Scene& scene) {
    if (examples.empty()) throw DomainError("classify_corpus: empty corpus");
    ClassificationReport r;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        const auto outcome = backend.detect_ambiguity(AgentContext{scene, {ex.instruction}});
        const Label got = outcome.clear ? Label::WellFormed : Label::Ambiguous;
        ++r.total;
        ++r.confusion[static_cast<int>(ex.label)][static_cast<int>(got)];
        if (got == ex.label) {
            ++r.correct;
        } else {
            r.misclassified.push_back(i);
        }
        if (ex.missing && outcome.facet != ex.missing) ++r.facet_mismatches;
    }
    return r;
}

}  // namespace autoopt::agents
