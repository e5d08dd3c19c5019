#pragma once

// Corpus ingestion: JSONL playlist/song parsing with per-line error capture,
// whole-token mood matching in titles and descriptions, first-wins song
// deduplication, and the hash-based train/test split.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodassoc/acoustic.hpp"
#include "moodassoc/errors.hpp"
#include "moodassoc/io.hpp"
#include "moodassoc/lexicon.hpp"
#include "moodassoc/random.hpp"
#include "moodassoc/text.hpp"

namespace moodassoc {

struct PlaylistRecord {
    std::string playlist_id;
    std::string title;
    std::optional<std::string> description;
    std::vector<std::string> track_ids;  // may be empty
};

struct SongRecord {
    std::string song_id;
    std::string lyrics;
    std::optional<AcousticFeatures> acoustic;
};

struct ParseIssue {
    size_t line = 0;
    std::string reason;
};

struct ParseReport {
    std::vector<ParseIssue> issues;
    size_t lines_total = 0;
    size_t records_parsed = 0;
};

inline void write_error_report(std::ostream& out, const ParseReport& report) {
    out << "line,reason\n";
    for (const ParseIssue& issue : report.issues) {
        out << issue.line << ',' << csv_quote(issue.reason) << '\n';
    }
}

namespace detail {

inline void report_or_throw(ParseReport* report, bool strict, size_t line_no,
                            const std::string& reason) {
    if (strict) {
        throw DataError("line " + std::to_string(line_no) + ": " + reason);
    }
    if (report) report->issues.push_back({line_no, reason});
}

}  // namespace detail

// One JSON object per line with keys id, title, description (optional),
// tracks. Malformed lines go to the report; strict mode makes the first one
// fatal.
inline std::vector<PlaylistRecord> parse_playlists(std::istream& in,
                                                   ParseReport* report = nullptr,
                                                   bool strict = false) {
    std::vector<PlaylistRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (report) report->lines_total = line_no;
        if (line.empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            detail::report_or_throw(report, strict, line_no, "not a JSON object");
            continue;
        }
        if (!obj.contains("id") || !obj["id"].is_string() ||
            obj["id"].get<std::string>().empty()) {
            detail::report_or_throw(report, strict, line_no, "missing or empty \"id\"");
            continue;
        }
        if (!obj.contains("title") || !obj["title"].is_string()) {
            detail::report_or_throw(report, strict, line_no, "missing \"title\"");
            continue;
        }
        PlaylistRecord rec;
        rec.playlist_id = obj["id"].get<std::string>();
        rec.title = obj["title"].get<std::string>();
        if (obj.contains("description") && !obj["description"].is_null()) {
            if (!obj["description"].is_string()) {
                detail::report_or_throw(report, strict, line_no,
                                        "\"description\" is not a string");
                continue;
            }
            rec.description = obj["description"].get<std::string>();
        }
        if (obj.contains("tracks") && !obj["tracks"].is_null()) {
            if (!obj["tracks"].is_array()) {
                detail::report_or_throw(report, strict, line_no, "\"tracks\" is not an array");
                continue;
            }
            bool bad = false;
            for (const auto& t : obj["tracks"]) {
                if (!t.is_string()) {
                    detail::report_or_throw(report, strict, line_no,
                                            "track id is not a string");
                    bad = true;
                    break;
                }
                rec.track_ids.push_back(t.get<std::string>());
            }
            if (bad) continue;
        }
        out.push_back(std::move(rec));
        if (report) ++report->records_parsed;
    }
    return out;
}

// Song JSONL: keys id, lyrics, acoustic (optional object of the 17 fields).
inline std::vector<SongRecord> parse_songs(std::istream& in,
                                           ParseReport* report = nullptr,
                                           bool strict = false) {
    std::vector<SongRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (report) report->lines_total = line_no;
        if (line.empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            detail::report_or_throw(report, strict, line_no, "not a JSON object");
            continue;
        }
        if (!obj.contains("id") || !obj["id"].is_string() ||
            obj["id"].get<std::string>().empty()) {
            detail::report_or_throw(report, strict, line_no, "missing or empty \"id\"");
            continue;
        }
        if (!obj.contains("lyrics") || !obj["lyrics"].is_string()) {
            detail::report_or_throw(report, strict, line_no, "missing \"lyrics\"");
            continue;
        }
        SongRecord rec;
        rec.song_id = obj["id"].get<std::string>();
        rec.lyrics = obj["lyrics"].get<std::string>();
        if (obj.contains("acoustic") && !obj["acoustic"].is_null()) {
            if (!obj["acoustic"].is_object()) {
                detail::report_or_throw(report, strict, line_no,
                                        "\"acoustic\" is not an object");
                continue;
            }
            try {
                rec.acoustic = AcousticFeatures::from_json(obj["acoustic"]);
            } catch (const DataError& e) {
                detail::report_or_throw(report, strict, line_no, e.what());
                continue;
            }
        }
        out.push_back(std::move(rec));
        if (report) ++report->records_parsed;
    }
    return out;
}

// Every mood whose normalized term appears as a whole-token phrase in the
// title or in the description. Multiword terms match as consecutive tokens;
// phrases never span the title/description boundary, which keeps matching
// invariant under swapping the two fields. Returned in lexicon order.
inline std::vector<const Mood*> match_moods(const PlaylistRecord& playlist,
                                            const MoodLexicon& lexicon) {
    std::vector<std::vector<std::string>> fields;
    fields.push_back(tokenize(playlist.title));
    if (playlist.description) fields.push_back(tokenize(*playlist.description));

    auto phrase_at = [](const std::vector<std::string>& tokens, size_t start,
                        const std::vector<std::string>& phrase) {
        if (start + phrase.size() > tokens.size()) return false;
        for (size_t i = 0; i < phrase.size(); ++i) {
            if (tokens[start + i] != phrase[i]) return false;
        }
        return true;
    };

    std::vector<const Mood*> matched;
    for (const Mood& mood : lexicon.moods) {
        bool hit = false;
        for (const auto& tokens : fields) {
            for (size_t s = 0; !hit && s + mood.term_tokens.size() <= tokens.size(); ++s) {
                if (phrase_at(tokens, s, mood.term_tokens)) hit = true;
            }
            if (hit) break;
        }
        if (hit) matched.push_back(&mood);
    }
    return matched;
}

// Keeps the first record for each song id, preserving input order.
inline std::vector<SongRecord> dedupe_songs(std::vector<SongRecord> records) {
    std::unordered_set<std::string> seen;
    std::vector<SongRecord> out;
    out.reserve(records.size());
    for (SongRecord& rec : records) {
        if (seen.insert(rec.song_id).second) out.push_back(std::move(rec));
    }
    return out;
}

struct CorpusSplit {
    std::unordered_set<std::string> train_ids;
    std::unordered_set<std::string> test_ids;

    bool is_train(const std::string& id) const { return train_ids.count(id) > 0; }
    bool is_test(const std::string& id) const { return test_ids.count(id) > 0; }
};

// Assignment is a pure function of (song_id, seed): adding songs later never
// reassigns existing ones.
inline bool assign_to_train(const std::string& song_id, double train_fraction,
                            uint64_t seed) {
    return unit_interval(stable_hash64(song_id, seed)) < train_fraction;
}

inline CorpusSplit split_train_test(const std::vector<std::string>& song_ids,
                                    double train_fraction, uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0,1), got " +
                          std::to_string(train_fraction));
    }
    if (song_ids.empty()) throw ConfigError("split requires at least one song id");
    CorpusSplit split;
    for (const std::string& id : song_ids) {
        if (assign_to_train(id, train_fraction, seed)) {
            split.train_ids.insert(id);
        } else {
            split.test_ids.insert(id);
        }
    }
    return split;
}

inline void write_split_csv(std::ostream& out, const CorpusSplit& split) {
    std::vector<std::string> rows;
    rows.reserve(split.train_ids.size() + split.test_ids.size());
    for (const auto& id : split.train_ids) rows.push_back(csv_quote(id) + ",train");
    for (const auto& id : split.test_ids) rows.push_back(csv_quote(id) + ",test");
    std::sort(rows.begin(), rows.end());
    out << "song_id,split\n";
    for (const auto& r : rows) out << r << '\n';
}

inline CorpusSplit read_split_csv(std::istream& in) {
    CorpusSplit split;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "song_id,split")
                throw DataError("split file: unexpected header \"" + line + "\"");
            continue;
        }
        if (line.empty()) continue;
        auto fields = csv_split(line);
        if (fields.size() != 2)
            throw DataError("split file line " + std::to_string(line_no) + ": bad row");
        if (fields[1] == "train") {
            split.train_ids.insert(fields[0]);
        } else if (fields[1] == "test") {
            split.test_ids.insert(fields[0]);
        } else {
            throw DataError("split file line " + std::to_string(line_no) +
                            ": unknown split \"" + fields[1] + "\"");
        }
    }
    return split;
}

}  // namespace moodassoc
