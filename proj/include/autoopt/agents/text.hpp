#pragma once

// Lexical analysis of layout instructions for the rule-based agents:
// tokenization, widget/object mention matching, clause segmentation, and the
// keyword tables.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "autoopt/scene.hpp"

namespace autoopt::agents::text {

struct Token {
    std::string word;  ///< lowercase; empty for punctuation
    char punct = 0;    ///< one of , . ; : ! ? for punctuation tokens

    bool is_word() const { return !word.empty(); }
};

/// Lowercases and splits into words ([a-z0-9'-]) and clause punctuation.
/// Typographic apostrophes are folded to '.
inline std::vector<Token> tokenize(std::string_view s) {
    std::string folded;
    folded.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
            static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(s[i + 2]) == 0x99 || static_cast<unsigned char>(s[i + 2]) == 0x98)) {
            folded += '\'';
            i += 2;
        } else {
            folded += static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        }
    }

    std::vector<Token> out;
    std::string word;
    auto flush = [&] {
        while (!word.empty() && (word.back() == '\'' || word.back() == '-')) word.pop_back();
        while (!word.empty() && (word.front() == '\'' || word.front() == '-')) word.erase(word.begin());
        if (!word.empty()) out.push_back({word, 0});
        word.clear();
    };
    for (char c : folded) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-') {
            word += c;
        } else {
            flush();
            if (c == ',' || c == '.' || c == ';' || c == ':' || c == '!' || c == '?') out.push_back({"", c});
        }
    }
    flush();
    return out;
}

/// "FlightBooking" -> {"flight", "booking"}; "YouTube" -> {"you", "tube"}.
inline std::vector<std::string> split_camel(const std::string& name) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < name.size(); ++i) {
        const char c = name[i];
        if (!std::isalnum(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
            continue;
        }
        const bool upper = std::isupper(static_cast<unsigned char>(c));
        const bool next_lower = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
        const bool prev_lower = i > 0 && std::islower(static_cast<unsigned char>(name[i - 1]));
        if (upper && !cur.empty() && (prev_lower || next_lower)) {
            out.push_back(cur);
            cur.clear();
        }
        cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// "FlightBooking" -> "flight booking".
inline std::string humanize(const std::string& name) {
    std::string out;
    for (const auto& w : split_camel(name)) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Keyword tables

inline const std::set<std::string>& interaction_verbs() {
    static const std::set<std::string> words = {
        "touch",    "touches",  "touched",  "touching",    "scroll",      "scrolls",   "scrolled",
        "scrolling", "type",    "types",    "typed",       "typing",      "interact",  "interacts",
        "interacted", "interacting", "interaction", "interactive", "click", "clicks", "clicked",
        "clicking", "drag",     "drags",    "dragged",     "dragging",    "tap",       "taps",
        "tapped",   "tapping",  "press",    "presses",     "pressed",     "pressing",  "reply",
        "replies",  "replied",  "replying", "write",       "writes",      "writing",   "swipe",
        "swiping"};
    return words;
}

inline const std::set<std::string>& viewing_verbs() {
    static const std::set<std::string> words = {
        "watch",   "watches",  "watched",   "watching", "see",      "sees",     "seeing",
        "read",    "reads",    "reading",   "monitor",  "monitors", "monitored", "monitoring",
        "view",    "views",    "viewing",   "look",     "looks",    "looking",  "observe",
        "observes", "observed", "observing", "check",   "checks",   "checking", "glance",
        "glancing", "follow",   "following"};
    return words;
}

/// Imperative placement verbs; they open a new clause after "and".
inline const std::set<std::string>& action_verbs() {
    static const std::set<std::string> words = {
        "place", "put", "show", "display", "position", "arrange", "move", "keep", "set", "add", "open",
        "make", "attach", "pin", "anchor", "give", "bring", "leave", "let", "please", "i", "i'd", "i'll",
        "i'm", "it", "they", "don't", "do", "avoid", "also", "align"};
    return words;
}

inline const std::set<std::string>& determiners() {
    static const std::set<std::string> words = {"the", "my", "a", "an", "our", "your", "this", "that",
                                                "these", "those", "his", "her", "their", "its"};
    return words;
}

inline const std::set<std::string>& clause_breakers() {
    static const std::set<std::string> words = {"so", "while", "but", "also", "then", "because", "although",
                                                "whereas", "and then"};
    return words;
}

inline const std::set<std::string>& protect_verbs() {
    static const std::set<std::string> words = {"block",    "blocks",    "blocking",  "obstruct", "obstructs",
                                                "obstructing", "occlude", "occludes", "occluding", "cover",
                                                "covers",   "covering",  "hide",      "hides",    "hiding",
                                                "overlap",  "overlapping"};
    return words;
}

inline const std::set<std::string>& negations() {
    static const std::set<std::string> words = {"don't", "dont", "not", "never", "without", "avoid", "no",
                                                "shouldn't", "mustn't", "won't", "can't", "cannot"};
    return words;
}

inline const std::set<std::string>& keep_visible_words() {
    static const std::set<std::string> words = {"visible", "clean", "clear", "unobstructed", "free", "uncovered"};
    return words;
}

inline const std::set<std::string>& alignment_words() {
    static const std::set<std::string> words = {"align", "aligned", "aligns", "alignment", "tidy",
                                                "organize", "organized", "organise", "organised", "neat",
                                                "neatly", "grid", "row", "column"};
    return words;
}

inline const std::set<std::string>& strain_words() {
    static const std::set<std::string> words = {"strain", "effort", "exertion", "fatigue", "comfortable",
                                                "comfortably", "ergonomic", "tired", "neck"};
    return words;
}

/// Single-word spatial relations and placement preferences.
inline const std::set<std::string>& preference_words() {
    static const std::set<std::string> words = {
        "near",   "nearby",   "beside",   "left",    "right",     "above",    "below",   "under",
        "underneath", "beneath", "behind", "around", "center",   "centre",   "middle",  "corner",
        "top",    "bottom",   "side",     "close",   "closer",    "reach",    "level",   "mid-air",
        "visible", "clean",   "unobstructed", "careful", "easy", "easily", "minimal", "between",
        "front",  "surround", "surrounding", "next", "away"};
    return words;
}

inline const std::set<std::string>& everything_words() {
    static const std::set<std::string> words = {"everything", "all"};
    return words;
}

// ---------------------------------------------------------------------------
// Mentions

struct Mention {
    std::string name;       ///< catalog widget or scene object name
    std::size_t begin = 0;  ///< token range [begin, end)
    std::size_t end = 0;
};

namespace detail {

struct Form {
    std::string name;
    std::vector<std::string> words;
};

inline bool match_at(const std::vector<Token>& tokens, std::size_t i, const std::vector<std::string>& words,
                     bool allow_plural) {
    if (i + words.size() > tokens.size()) return false;
    for (std::size_t k = 0; k < words.size(); ++k) {
        const std::string& t = tokens[i + k].word;
        const bool last = k + 1 == words.size();
        if (t == words[k]) continue;
        if (last && allow_plural && (t == words[k] + "s" || t == words[k] + "es")) continue;
        return false;
    }
    return true;
}

/// Longest-match scan; forms are tried longest first.
inline std::vector<Mention> find(const std::vector<Token>& tokens, std::vector<Form> forms) {
    std::stable_sort(forms.begin(), forms.end(),
                     [](const Form& a, const Form& b) { return a.words.size() > b.words.size(); });
    std::vector<Mention> out;
    for (std::size_t i = 0; i < tokens.size();) {
        bool hit = false;
        if (tokens[i].is_word()) {
            for (const auto& f : forms) {
                if (match_at(tokens, i, f.words, true)) {
                    out.push_back({f.name, i, i + f.words.size()});
                    i += f.words.size();
                    hit = true;
                    break;
                }
            }
        }
        if (!hit) ++i;
    }
    return out;
}

}  // namespace detail

/// Catalog widgets referenced by name: the camel-case words as a phrase
/// ("flight booking"), or joined ("flightbooking", "youtube"); plurals allowed.
inline std::vector<Mention> widget_mentions(const std::vector<Token>& tokens, const std::vector<WidgetSpec>& catalog) {
    std::vector<detail::Form> forms;
    for (const auto& w : catalog) {
        const auto words = split_camel(w.name);
        forms.push_back({w.name, words});
        std::string joined;
        for (const auto& p : words) joined += p;
        if (words.size() > 1) forms.push_back({w.name, {joined}});
    }
    return detail::find(tokens, std::move(forms));
}

/// Scene objects referenced by name, by full label, or by the label's last word.
inline std::vector<Mention> object_mentions(const std::vector<Token>& tokens,
                                            const std::vector<PhysicalObject>& objects) {
    std::vector<detail::Form> forms;
    for (const auto& o : objects) {
        forms.push_back({o.name, split_camel(o.name)});
        std::vector<std::string> label;
        for (const auto& t : tokenize(o.label))
            if (t.is_word()) label.push_back(t.word);
        if (!label.empty()) {
            forms.push_back({o.name, label});
            forms.push_back({o.name, {label.back()}});
        }
    }
    return detail::find(tokens, std::move(forms));
}

/// "monitor" is a viewing verb only where a noun reading is implausible:
/// at the start of a clause or after a subject, modal, or "to".
inline bool is_viewing_verb(const std::vector<Token>& tokens, std::size_t i) {
    const std::string& w = tokens[i].word;
    if (!viewing_verbs().count(w)) return false;
    if (w != "monitor" && w != "monitors") return true;
    if (i == 0 || !tokens[i - 1].is_word()) return true;
    static const std::set<std::string> before_verb = {"i", "to", "we", "you", "can", "will", "must", "should",
                                                      "and", "please", "could", "would", "also", "it"};
    return before_verb.count(tokens[i - 1].word) > 0;
}

/// True if tokens[i] is "everything" or starts "all (the|my|other)* (widgets|apps|...)".
inline bool is_everything(const std::vector<Token>& tokens, std::size_t i) {
    const std::string& w = tokens[i].word;
    if (w == "everything") return true;
    if (w != "all") return false;
    static const std::set<std::string> fillers = {"the", "my", "other", "of", "available", "these"};
    static const std::set<std::string> nouns = {"widgets", "widget", "apps", "app", "applications",
                                                "application", "windows", "panels", "tools"};
    for (std::size_t k = i + 1; k < tokens.size() && k < i + 5; ++k) {
        if (!tokens[k].is_word()) return false;
        if (nouns.count(tokens[k].word)) return true;
        if (!fillers.count(tokens[k].word)) return false;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Clauses

struct Clause {
    std::size_t sentence = 0;
    std::size_t begin = 0;  ///< token range [begin, end)
    std::size_t end = 0;
};

/// Sentences end at . ! ? ; clauses additionally break at , : and at
/// connectives ("so", "while", ...) and at "and" followed by a verb or subject.
inline std::vector<Clause> clauses(const std::vector<Token>& tokens) {
    std::vector<Clause> out;
    std::size_t sentence = 0;
    std::size_t begin = 0;
    auto close = [&](std::size_t end) {
        if (end > begin) out.push_back({sentence, begin, end});
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (!t.is_word()) {
            close(i);
            begin = i + 1;
            if (t.punct == '.' || t.punct == '!' || t.punct == '?' || t.punct == ';') ++sentence;
            continue;
        }
        bool breaks = clause_breakers().count(t.word) > 0 && i > begin;
        if (t.word == "and" && i + 1 < tokens.size() && tokens[i + 1].is_word()) {
            const std::string& next = tokens[i + 1].word;
            breaks = action_verbs().count(next) || interaction_verbs().count(next) ||
                     (viewing_verbs().count(next) && next != "monitor" && next != "monitors");
        }
        if (breaks) {
            close(i);
            begin = i;
        }
    }
    close(tokens.size());
    return out;
}

}  // namespace autoopt::agents::text
