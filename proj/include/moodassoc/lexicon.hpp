#pragma once

// Mood vocabulary with part-of-speech metadata. Each mood can be cast into a
// natural-language hypothesis sentence, either from a per-term override or
// from the POS default template.

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "moodassoc/errors.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/text.hpp"

namespace moodassoc {

enum class PartOfSpeech { Adjective, Noun, Verb };

inline std::string to_string(PartOfSpeech pos) {
    switch (pos) {
        case PartOfSpeech::Adjective: return "adjective";
        case PartOfSpeech::Noun: return "noun";
        case PartOfSpeech::Verb: return "verb";
    }
    throw InternalError("unknown part of speech");
}

inline PartOfSpeech parse_pos(const std::string& s) {
    if (s == "adjective") return PartOfSpeech::Adjective;
    if (s == "noun") return PartOfSpeech::Noun;
    if (s == "verb") return PartOfSpeech::Verb;
    throw DataError("unknown part of speech: \"" + s + "\"");
}

struct Mood {
    std::string term;  // normalized: NFKC, lowercase, trimmed
    PartOfSpeech pos = PartOfSpeech::Adjective;
    std::optional<std::string> template_override;  // contains "{term}" exactly once
    std::vector<std::string> term_tokens;          // precomputed for phrase matching
};

struct MoodLexicon {
    std::vector<Mood> moods;  // file order

    const Mood* find(const std::string& normalized_term) const {
        auto it = index_.find(normalized_term);
        return it == index_.end() ? nullptr : &moods[it->second];
    }

    void rebuild_index() {
        index_.clear();
        for (size_t i = 0; i < moods.size(); ++i) index_[moods[i].term] = i;
    }

private:
    std::unordered_map<std::string, size_t> index_;
};

namespace detail {

inline size_t count_placeholder(const std::string& tmpl) {
    size_t n = 0;
    for (size_t pos = tmpl.find("{term}"); pos != std::string::npos;
         pos = tmpl.find("{term}", pos + 6)) {
        ++n;
    }
    return n;
}

}  // namespace detail

inline Mood make_mood(std::string term, PartOfSpeech pos,
                      std::optional<std::string> template_override = std::nullopt) {
    Mood m;
    m.term = normalize_term(term);
    if (m.term.empty()) throw DataError("mood term is empty after normalization");
    if (m.term.find('\n') != std::string::npos)
        throw DataError("mood term contains a newline: \"" + term + "\"");
    m.pos = pos;
    if (template_override && !template_override->empty()) {
        if (detail::count_placeholder(*template_override) != 1) {
            throw DataError("template override for \"" + m.term +
                            "\" must contain {term} exactly once");
        }
        m.template_override = std::move(*template_override);
    }
    m.term_tokens = tokenize(m.term);
    if (m.term_tokens.empty())
        throw DataError("mood term \"" + m.term + "\" has no alphanumeric tokens");
    return m;
}

inline MoodLexicon load_lexicon(std::istream& in) {
    MoodLexicon lex;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != "term,pos,template_override") {
                throw DataError("lexicon line 1: expected header "
                                "\"term,pos,template_override\", got \"" + line + "\"");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = csv_split(line);
        } catch (const DataError& e) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
        }
        if (fields.size() != 3) {
            throw DataError("lexicon line " + std::to_string(line_no) +
                            ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        Mood m;
        try {
            std::optional<std::string> tmpl;
            if (!fields[2].empty()) tmpl = fields[2];
            m = make_mood(fields[0], parse_pos(fields[1]), std::move(tmpl));
        } catch (const DataError& e) {
            throw DataError("lexicon line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen.insert(m.term).second) {
            throw DataError("lexicon line " + std::to_string(line_no) +
                            ": duplicate term \"" + m.term + "\"");
        }
        lex.moods.push_back(std::move(m));
    }
    if (!header_seen) throw DataError("lexicon file is empty");
    if (lex.moods.empty()) throw DataError("lexicon contains no moods");
    lex.rebuild_index();
    return lex;
}

inline MoodLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    try {
        return load_lexicon(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

inline void write_lexicon(std::ostream& out, const MoodLexicon& lex) {
    out << "term,pos,template_override\n";
    for (const Mood& m : lex.moods) {
        out << csv_quote(m.term) << ',' << to_string(m.pos) << ','
            << csv_quote(m.template_override.value_or("")) << '\n';
    }
}

// POS defaults; a per-term override wins when present.
inline std::string cast_to_sentence(const Mood& mood) {
    if (mood.template_override) {
        std::string out = *mood.template_override;
        out.replace(out.find("{term}"), 6, mood.term);
        return out;
    }
    switch (mood.pos) {
        case PartOfSpeech::Adjective: return "This is a " + mood.term + " song.";
        case PartOfSpeech::Noun: return "This song is about " + mood.term + ".";
        case PartOfSpeech::Verb: return "This song makes you " + mood.term + ".";
    }
    throw InternalError("unknown part of speech");
}

}  // namespace moodassoc
